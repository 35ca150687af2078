"""Syntax tree model shared by the parser, printer, and analyses.

Trees are uniform: every node is an AstNode with a kind drawn from the
closed NODE_KINDS set, an ordered child list, a source span, and a
pre-order node id. Kind-specific payload lives in a handful of optional
fields (name, value, raw, operator) plus a small attrs dict for
structural flags (computed members, declaration keywords, and so on).
Trees are treated as immutable once built; analyses share them freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple


class Span(NamedTuple):
    """1-based (line, col) endpoints; end is exclusive."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "Span") -> bool:
        return (self.start_line, self.start_col) <= (other.start_line, other.start_col) \
            and (other.end_line, other.end_col) <= (self.end_line, self.end_col)


NODE_KINDS = frozenset({
    "Program", "FunctionDeclaration", "FunctionExpression", "ArrowFunction",
    "VariableDeclarator", "AssignmentExpression", "CallExpression",
    "MemberExpression", "Identifier", "Literal", "ObjectLiteral", "Property",
    "ReturnStatement", "IfStatement", "BlockStatement", "BinaryExpression",
    "TemplateLiteral", "NewExpression", "ThisExpression", "ArrayLiteral",
    "ConditionalExpression", "UnaryExpression", "ForStatement",
    "WhileStatement", "TryStatement", "SpreadElement", "AwaitExpression",
})

FUNCTION_KINDS = frozenset({
    "FunctionDeclaration", "FunctionExpression", "ArrowFunction",
})


@dataclass
class AstNode:
    kind: str
    span: Span
    children: list["AstNode"] = field(default_factory=list)
    node_id: int = -1
    name: str | None = None       # Identifier and named functions
    value: object = None          # Literal value
    raw: str | None = None        # Literal source text
    operator: str | None = None   # Binary / Unary / Assignment
    attrs: dict = field(default_factory=dict)

    def __repr__(self) -> str:  # compact, for test failure output
        bits = [self.kind]
        if self.name is not None:
            bits.append(self.name)
        if self.raw is not None:
            bits.append(self.raw)
        if self.operator is not None:
            bits.append(self.operator)
        return f"<{' '.join(bits)} #{self.node_id}>"


@dataclass
class AstRoot:
    file_path: str
    program: AstNode
    comments: list[tuple[Span, str]] = field(default_factory=list)


def walk(root: AstRoot | AstNode, order: str = "pre") -> Iterator[AstNode]:
    """Yield every node exactly once in pre- or post-order."""
    if order not in ("pre", "post"):
        raise ValueError(f"unknown traversal order: {order!r}")
    node = root.program if isinstance(root, AstRoot) else root
    stack: list[tuple[AstNode, bool]] = [(node, False)]
    while stack:
        cur, expanded = stack.pop()
        if order == "pre":
            yield cur
            stack.extend((c, False) for c in reversed(cur.children))
        else:
            if expanded:
                yield cur
            else:
                stack.append((cur, True))
                stack.extend((c, False) for c in reversed(cur.children))


def member_path(node: AstNode) -> str | None:
    """Dotted path of a static member chain, or None.

    Returns a value only when the chain consists solely of
    non-computed member accesses over identifiers (or `this` at the
    root); `a[b].c` and call results yield None.
    """
    if node.kind == "Identifier":
        return node.name
    if node.kind == "ThisExpression":
        return "this"
    if node.kind == "MemberExpression" and not node.attrs.get("computed"):
        base = member_path(node.children[0])
        prop = node.children[1]
        if base is not None and prop.kind == "Identifier":
            return f"{base}.{prop.name}"
    return None


_EQ_ATTRS = ("computed", "decl_kind", "prefix", "optional", "shorthand",
             "method", "style", "is_async", "do_while", "has_catch",
             "catch_param", "has_finally", "expression_body", "regex")


def structural_equal(a: AstNode, b: AstNode) -> bool:
    """Equality over kind, payload, and children; spans and ids ignored."""
    if a.kind != b.kind or a.name != b.name or a.operator != b.operator:
        return False
    if a.value != b.value:
        return False
    for key in _EQ_ATTRS:
        if a.attrs.get(key) != b.attrs.get(key):
            return False
    if len(a.children) != len(b.children):
        return False
    return all(structural_equal(x, y) for x, y in zip(a.children, b.children))


def to_debug_dict(node: AstNode) -> dict:
    """JSON-friendly dump used by test oracles and `--dump-ast`."""
    out: dict = {"kind": node.kind, "span": list(node.span), "id": node.node_id}
    if node.name is not None:
        out["name"] = node.name
    if node.raw is not None:
        out["value"] = node.value
        out["raw"] = node.raw
    if node.operator is not None:
        out["operator"] = node.operator
    if node.attrs:
        out["attrs"] = {k: v for k, v in sorted(node.attrs.items())}
    out["children"] = [to_debug_dict(c) for c in node.children]
    return out


def finalize(root: AstRoot) -> AstRoot:
    """Assign pre-order node ids and check span nesting."""
    next_id = 0
    stack = [root.program]
    order: list[AstNode] = []
    while stack:
        node = stack.pop()
        node.node_id = next_id
        next_id += 1
        order.append(node)
        stack.extend(reversed(node.children))
    for node in order:
        for child in node.children:
            if not node.span.contains(child.span):
                raise AssertionError(
                    f"span nesting violated: {node!r} {node.span} "
                    f"does not contain {child!r} {child.span}")
    return root
