"""Constant string-concatenation folding.

Collapses `"a" + "b"` chains into single string literals so hardcoded
values split across concatenations still surface to pattern matching.
Only adjacent string literals fold; anything else is left intact.
"""

from __future__ import annotations

import json

from .nodes import AstNode, AstRoot


def fold_string_concats(root: AstRoot) -> AstRoot:
    """Return a root whose tree has string-concat constants folded.

    The input tree is not modified; untouched subtrees are shared.
    """
    program, changed = _fold(root.program)
    if not changed:
        return root
    return AstRoot(root.file_path, program, root.comments)


def _fold(node: AstNode) -> tuple[AstNode, bool]:
    new_children: list[AstNode] = []
    changed = False
    for child in node.children:
        folded, child_changed = _fold(child)
        new_children.append(folded)
        changed = changed or child_changed
    if node.kind == "BinaryExpression" and node.operator == "+":
        left, right = new_children
        if (left.kind == "Literal" and isinstance(left.value, str)
                and not left.attrs.get("regex")
                and right.kind == "Literal" and isinstance(right.value, str)
                and not right.attrs.get("regex")):
            value = left.value + right.value
            return AstNode("Literal", node.span, value=value,
                           raw=json.dumps(value, ensure_ascii=False)), True
    if not changed:
        return node, False
    return AstNode(node.kind, node.span, children=new_children,
                   node_id=node.node_id, name=node.name, value=node.value,
                   raw=node.raw, operator=node.operator,
                   attrs=dict(node.attrs)), True
