"""Deterministic pretty-printer for the syntax tree.

The output is the package's canonical layout: one statement per line,
four-space indents, K&R braces. Reparsing the output yields a tree
structurally equal to the input (spans and ids aside); the printer
inserts parentheses wherever precedence or statement-position rules
would otherwise change the parse.
"""

from __future__ import annotations

from .nodes import AstNode, AstRoot

_INDENT = "    "

_PREC_COMMA = 1
_PREC_ASSIGN = 2
_PREC_COND = 3
_PREC_UNARY = 16
_PREC_POSTFIX = 17
_PREC_CALL = 18
_PREC_NEW = 19
_PREC_PRIMARY = 20

_BINARY_PREC = {
    ",": _PREC_COMMA,
    "??": 4, "||": 5, "&&": 6, "|": 7, "^": 8, "&": 9,
    "==": 10, "!=": 10, "===": 10, "!==": 10,
    "<": 11, ">": 11, "<=": 11, ">=": 11, "instanceof": 11, "in": 11,
    "<<": 12, ">>": 12, ">>>": 12,
    "+": 13, "-": 13,
    "*": 14, "/": 14, "%": 14,
    "**": 15,
}

_WORD_OPS = {"typeof", "void", "delete", "instanceof", "in"}


def print_canonical(root: AstRoot | AstNode) -> str:
    node = root.program if isinstance(root, AstRoot) else root
    lines: list[str] = []
    for stmt in node.children:
        lines.extend(_stmt_lines(stmt, 0))
    return "\n".join(lines) + "\n"


def _prec(node: AstNode) -> int:
    kind = node.kind
    if kind == "BinaryExpression":
        return _BINARY_PREC[node.operator]
    if kind in ("AssignmentExpression", "ArrowFunction"):
        return _PREC_ASSIGN
    if kind == "ConditionalExpression":
        return _PREC_COND
    if kind in ("UnaryExpression",):
        return _PREC_UNARY if node.attrs.get("prefix") else _PREC_POSTFIX
    if kind == "AwaitExpression":
        return _PREC_UNARY
    if kind in ("CallExpression", "MemberExpression"):
        return _PREC_CALL
    if kind == "NewExpression":
        return _PREC_NEW
    return _PREC_PRIMARY


def _expr(node: AstNode, min_prec: int, indent: int) -> str:
    text = _expr_inner(node, indent)
    if _prec(node) < min_prec:
        return f"({text})"
    return text


def _expr_inner(node: AstNode, indent: int) -> str:
    kind = node.kind
    if kind == "Identifier":
        return node.name or ""
    if kind == "ThisExpression":
        return "this"
    if kind == "Literal":
        return node.raw if node.raw is not None else repr(node.value)
    if kind == "TemplateLiteral":
        parts = ["`"]
        for i, child in enumerate(node.children):
            if i % 2 == 0:
                parts.append(child.raw or "")
            else:
                parts.append("${" + _expr(child, 0, indent) + "}")
        parts.append("`")
        return "".join(parts)
    if kind == "ArrayLiteral":
        inner = ", ".join(_element(c, indent) for c in node.children)
        return f"[{inner}]"
    if kind == "ObjectLiteral":
        return _object_literal(node, indent)
    if kind == "BinaryExpression":
        return _binary(node, indent)
    if kind == "AssignmentExpression":
        left = _expr(node.children[0], _PREC_COND, indent)
        right = _expr(node.children[1], _PREC_ASSIGN, indent)
        return f"{left} {node.operator} {right}"
    if kind == "ConditionalExpression":
        test = _expr(node.children[0], _PREC_COND + 1, indent)
        cons = _expr(node.children[1], _PREC_ASSIGN, indent)
        alt = _expr(node.children[2], _PREC_ASSIGN, indent)
        return f"{test} ? {cons} : {alt}"
    if kind == "UnaryExpression":
        arg = _expr(node.children[0], _PREC_POSTFIX, indent)
        if node.attrs.get("prefix"):
            sep = " " if node.operator in _WORD_OPS else ""
            return f"{node.operator}{sep}{arg}"
        return f"{arg}{node.operator}"
    if kind == "AwaitExpression":
        return "await " + _expr(node.children[0], _PREC_POSTFIX, indent)
    if kind == "CallExpression":
        callee = _expr(node.children[0], _PREC_CALL, indent)
        args = ", ".join(_element(a, indent) for a in node.children[1:])
        q = "?." if node.attrs.get("optional") else ""
        return f"{callee}{q}({args})"
    if kind == "NewExpression":
        callee_node = node.children[0]
        callee = _expr(callee_node, _PREC_CALL, indent)
        if _callee_contains_call(callee_node):
            callee = f"({callee})"
        args = ", ".join(_element(a, indent) for a in node.children[1:])
        return f"new {callee}({args})"
    if kind == "MemberExpression":
        obj_node = node.children[0]
        obj = _expr(obj_node, _PREC_CALL, indent)
        if obj_node.kind == "Literal" and isinstance(obj_node.value, (int, float)) \
                and not isinstance(obj_node.value, bool):
            obj = f"({obj})"
        if node.attrs.get("computed"):
            q = "?." if node.attrs.get("optional") else ""
            return f"{obj}{q}[{_expr(node.children[1], 0, indent)}]"
        dot = "?." if node.attrs.get("optional") else "."
        return f"{obj}{dot}{node.children[1].name}"
    if kind in ("FunctionExpression", "FunctionDeclaration"):
        return _function(node, indent)
    if kind == "ArrowFunction":
        return _arrow(node, indent)
    if kind == "SpreadElement":
        return "..." + _expr(node.children[0], _PREC_ASSIGN, indent)
    if kind == "VariableDeclarator":
        # occurs only inside for-statement heads
        return _declarator(node, indent, with_kind=True)
    raise AssertionError(f"unprintable node kind: {kind}")


def _element(node: AstNode, indent: int) -> str:
    # list contexts: a bare comma expression needs parentheses
    return _expr(node, _PREC_ASSIGN, indent)


def _binary(node: AstNode, indent: int) -> str:
    op = node.operator
    prec = _BINARY_PREC[op]
    left_min, right_min = prec, prec + 1
    if op == "**":
        left_min, right_min = prec + 1, prec
    left, right = node.children
    left_txt = _expr(left, left_min, indent)
    right_txt = _expr(right, right_min, indent)
    # `??` may not mix bare with `||`/`&&`
    for child, txt, side in ((left, left_txt, "l"), (right, right_txt, "r")):
        if child.kind == "BinaryExpression" and (
                (op == "??" and child.operator in ("||", "&&"))
                or (op in ("||", "&&") and child.operator == "??")):
            txt = f"({txt})"
            if side == "l":
                left_txt = txt
            else:
                right_txt = txt
    if op == ",":
        return f"{left_txt}, {right_txt}"
    return f"{left_txt} {op} {right_txt}"


def _callee_contains_call(node: AstNode) -> bool:
    while node.kind == "MemberExpression":
        node = node.children[0]
    return node.kind == "CallExpression"


def _object_literal(node: AstNode, indent: int) -> str:
    if not node.children:
        return "{}"
    multiline = len(node.children) >= 3 or any(
        c.kind == "Property" and c.children[1].kind in (
            "FunctionExpression", "ArrowFunction", "ObjectLiteral")
        for c in node.children)
    parts = [_property(c, indent + 1 if multiline else indent)
             for c in node.children]
    if multiline:
        pad = _INDENT * (indent + 1)
        inner = ",\n".join(pad + p for p in parts)
        return "{\n" + inner + "\n" + _INDENT * indent + "}"
    return "{ " + ", ".join(parts) + " }"


def _property(node: AstNode, indent: int) -> str:
    if node.kind == "SpreadElement":
        return "..." + _expr(node.children[0], _PREC_ASSIGN, indent)
    key_node, value = node.children
    if node.attrs.get("computed"):
        key = "[" + _expr(key_node, _PREC_ASSIGN, indent) + "]"
    elif key_node.kind == "Literal":
        key = key_node.raw or ""
    else:
        key = key_node.name or ""
    if node.attrs.get("method"):
        fn = value
        params = ", ".join(_param(p, indent) for p in fn.children[:-1])
        body = _block_text(fn.children[-1], indent)
        prefix = "async " if fn.attrs.get("is_async") else ""
        return f"{prefix}{key}({params}) {body}"
    if node.attrs.get("shorthand"):
        if value.kind == "AssignmentExpression":
            return f"{key} = " + _expr(value.children[1], _PREC_ASSIGN, indent)
        return key
    return f"{key}: " + _expr(value, _PREC_ASSIGN, indent)


def _param(node: AstNode, indent: int) -> str:
    if node.kind == "SpreadElement":
        return "..." + _expr(node.children[0], _PREC_ASSIGN, indent)
    return _expr(node, _PREC_ASSIGN, indent)


def _function(node: AstNode, indent: int) -> str:
    prefix = "async " if node.attrs.get("is_async") else ""
    name = f" {node.name}" if node.name else ""
    params = ", ".join(_param(p, indent) for p in node.children[:-1])
    body = _block_text(node.children[-1], indent)
    return f"{prefix}function{name}({params}) {body}"


def _arrow(node: AstNode, indent: int) -> str:
    prefix = "async " if node.attrs.get("is_async") else ""
    params = ", ".join(_param(p, indent) for p in node.children[:-1])
    body_node = node.children[-1]
    if node.attrs.get("expression_body"):
        body = _expr(body_node, _PREC_ASSIGN, indent)
        if body.startswith("{"):
            body = f"({body})"
        return f"{prefix}({params}) => {body}"
    return f"{prefix}({params}) => " + _block_text(body_node, indent)


def _block_text(block: AstNode, indent: int) -> str:
    if not block.children:
        return "{}"
    lines = ["{"]
    for stmt in block.children:
        lines.extend(_stmt_lines(stmt, indent + 1))
    lines.append(_INDENT * indent + "}")
    return "\n".join(lines)


def _stmt_lines(node: AstNode, indent: int) -> list[str]:
    pad = _INDENT * indent
    kind = node.kind
    if kind == "VariableDeclarator":
        return [pad + _declarator(node, indent, with_kind=True) + ";"]
    if kind == "FunctionDeclaration":
        return (pad + _function(node, indent)).split("\n")
    if kind == "ReturnStatement":
        if node.children:
            return [pad + "return " + _expr(node.children[0], 0, indent) + ";"]
        return [pad + "return;"]
    if kind == "IfStatement":
        return _if_lines(node, indent)
    if kind == "BlockStatement":
        return (pad + _block_text(node, indent)).split("\n")
    if kind == "ForStatement":
        return _for_lines(node, indent)
    if kind == "WhileStatement":
        test = _expr(node.children[0], 0, indent)
        if node.attrs.get("do_while"):
            body = _embedded(node.children[1], indent)
            return _join_head(pad + "do", body, f" while ({test});", indent)
        body = _embedded(node.children[1], indent)
        return _join_head(pad + f"while ({test})", body, "", indent)
    if kind == "TryStatement":
        return _try_lines(node, indent)
    # expression statement
    text = _expr(node, 0, indent)
    if text.startswith(("function", "async function", "{")):
        text = f"({text})"
    return (pad + text + ";").split("\n")


def _declarator(node: AstNode, indent: int, with_kind: bool) -> str:
    decl_kind = node.attrs.get("decl_kind", "var")
    target = _expr(node.children[0], _PREC_ASSIGN, indent)
    head = f"{decl_kind} {target}" if with_kind else target
    if len(node.children) > 1:
        return head + " = " + _expr(node.children[1], _PREC_ASSIGN, indent)
    return head


def _embedded(node: AstNode, indent: int) -> tuple[str, list[str]]:
    """Render an if/loop body: ('inline', ...) or ('block', lines)."""
    if node.kind == "BlockStatement":
        return ("block", (_block_text(node, indent)).split("\n"))
    lines = _stmt_lines(node, indent + 1)
    return ("stmt", lines)


def _join_head(head: str, body: tuple[str, list[str]], tail: str,
               indent: int) -> list[str]:
    mode, lines = body
    if mode == "block":
        out = [head + " " + lines[0]] + lines[1:]
        out[-1] = out[-1] + tail
        return out
    out = [head] + lines
    if tail:
        out.append(_INDENT * indent + tail.lstrip())
    return out


def _if_lines(node: AstNode, indent: int) -> list[str]:
    pad = _INDENT * indent
    test = _expr(node.children[0], 0, indent)
    consequent = node.children[1]
    has_alt = len(node.children) > 2
    # a block-less if-without-else consequent under an else-bearing if
    # would re-bind the else on reparse; force braces there
    if has_alt and consequent.kind == "IfStatement" and len(consequent.children) == 2:
        body: tuple[str, list[str]] = (
            "block", ["{"] + _stmt_lines(consequent, indent + 1) + [pad + "}"])
    else:
        body = _embedded(consequent, indent)
    out = _join_head(pad + f"if ({test})", body, "", indent)
    if not has_alt:
        return out
    if body[0] == "block":
        else_head = out.pop() + " else"
    else:
        else_head = pad + "else"
    alternate = node.children[2]
    if alternate.kind == "IfStatement":
        alt_lines = _if_lines(alternate, indent)
        out.append(else_head + " " + alt_lines[0][len(pad):])
        out.extend(alt_lines[1:])
        return out
    out.extend(_join_head(else_head, _embedded(alternate, indent), "", indent))
    return out


def _for_lines(node: AstNode, indent: int) -> list[str]:
    pad = _INDENT * indent
    style = node.attrs.get("style", "classic")
    if style in ("in", "of"):
        left, right, body = node.children
        left_txt = _declarator(left, indent, with_kind=True) \
            if left.kind == "VariableDeclarator" else _expr(left, _PREC_ASSIGN, indent)
        head = pad + f"for ({left_txt} {style} " + \
            _expr(right, _PREC_ASSIGN, indent) + ")"
        return _join_head(head, _embedded(body, indent), "", indent)
    init_count = node.attrs.get("init_count", 0)
    idx = init_count
    inits = node.children[:init_count]
    init_txt = ""
    if inits:
        if inits[0].kind == "VariableDeclarator":
            decl_kind = inits[0].attrs.get("decl_kind", "var")
            init_txt = f"{decl_kind} " + ", ".join(
                _declarator(d, indent, with_kind=False) for d in inits)
        else:
            init_txt = ", ".join(_expr(i, _PREC_ASSIGN, indent) for i in inits)
    test_txt = ""
    if node.attrs.get("has_test"):
        test_txt = " " + _expr(node.children[idx], 0, indent)
        idx += 1
    update_txt = ""
    if node.attrs.get("has_update"):
        update_txt = " " + _expr(node.children[idx], 0, indent)
        idx += 1
    body = node.children[idx]
    head = pad + f"for ({init_txt};{test_txt};{update_txt})"
    return _join_head(head, _embedded(body, indent), "", indent)


def _try_lines(node: AstNode, indent: int) -> list[str]:
    pad = _INDENT * indent
    out = (pad + "try " + _block_text(node.children[0], indent)).split("\n")
    idx = 1
    if node.attrs.get("has_catch"):
        param = ""
        if node.attrs.get("catch_param"):
            param = " (" + _expr(node.children[idx], _PREC_ASSIGN, indent) + ")"
            idx += 1
        catch_block = _block_text(node.children[idx], indent)
        idx += 1
        out[-1] += f" catch{param} " + catch_block.split("\n")[0]
        out.extend(catch_block.split("\n")[1:])
    if node.attrs.get("has_finally"):
        fin = _block_text(node.children[idx], indent)
        out[-1] += " finally " + fin.split("\n")[0]
        out.extend(fin.split("\n")[1:])
    return out
