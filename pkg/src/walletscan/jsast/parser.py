"""Recursive-descent parser for the supported ECMAScript subset.

The grammar targets the idioms found in bundled extension code: IIFE
wrappers, nested functions, promise chains, object and array literals,
template strings, destructuring declarations, and async/await. Valid
JavaScript outside the subset (classes, switch, throw, modules, ...)
raises ParseUnsupported with the offending span so coverage gaps stay
measurable per corpus; malformed input raises ParseError.
"""

from __future__ import annotations

from .lexer import (
    Lexer, ParseError, Token,
    T_EOF, T_IDENT, T_KEYWORD, T_NUM, T_PUNCT, T_REGEX, T_STR, T_TEMPLATE,
)
from .nodes import AstNode, AstRoot, Span, finalize


class ParseUnsupported(Exception):
    """Valid ECMAScript that falls outside the supported subset."""

    def __init__(self, construct: str, line: int, col: int):
        super().__init__(f"unsupported construct: {construct} at ({line}, {col})")
        self.construct = construct
        self.line = line
        self.col = col


_UNSUPPORTED_STMT_KEYWORDS = {
    "class", "switch", "break", "continue", "throw", "yield", "import",
    "export", "debugger", "with", "super", "case", "default", "extends",
}

_ASSIGN_OPS = {
    "=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=",
    "&=", "|=", "^=", "&&=", "||=", "??=",
}

_BINARY_PREC = {
    "??": 4, "||": 5, "&&": 6, "|": 7, "^": 8, "&": 9,
    "==": 10, "!=": 10, "===": 10, "!==": 10,
    "<": 11, ">": 11, "<=": 11, ">=": 11, "instanceof": 11, "in": 11,
    "<<": 12, ">>": 12, ">>>": 12,
    "+": 13, "-": 13,
    "*": 14, "/": 14, "%": 14,
    "**": 15,
}

_UNARY_OPS = {"!", "~", "+", "-", "typeof", "void", "delete", "++", "--"}


def _unescape(raw: str) -> str:
    """Cooked value of a quoted string or template chunk."""
    out: list[str] = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        i += 1
        if i >= len(raw):
            break
        esc = raw[i]
        i += 1
        simple = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f",
                  "v": "\v", "0": "\0"}
        if esc in simple:
            out.append(simple[esc])
        elif esc == "x" and i + 2 <= len(raw):
            out.append(chr(int(raw[i:i + 2], 16)))
            i += 2
        elif esc == "u":
            if i < len(raw) and raw[i] == "{":
                end = raw.index("}", i)
                out.append(chr(int(raw[i + 1:end], 16)))
                i = end + 1
            elif i + 4 <= len(raw):
                out.append(chr(int(raw[i:i + 4], 16)))
                i += 4
        elif esc == "\n":
            pass  # line continuation
        else:
            out.append(esc)
    return "".join(out)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        # true while parsing a for-head init, where 'in' is not a binary op
        self.no_in = False

    # token helpers -----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != T_EOF:
            self.pos += 1
        return tok

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.type == T_PUNCT and tok.value == value

    def at_keyword(self, value: str) -> bool:
        tok = self.peek()
        return tok.type == T_KEYWORD and tok.value == value

    def expect_punct(self, value: str) -> Token:
        if not self.at_punct(value):
            self._unexpected(f"expected {value!r}")
        return self.next()

    def _unexpected(self, message: str | None = None) -> None:
        tok = self.peek()
        if tok.type == T_EOF and self.pos > 0:
            prev = self.tokens[self.pos - 1]
            raise ParseError(message or "unexpected end of input",
                             prev.line, prev.col)
        shown = tok.value or "end of input"
        raise ParseError(message or f"unexpected token {shown!r}",
                         tok.line, tok.col)

    def _unsupported(self, construct: str, tok: Token | None = None) -> None:
        tok = tok or self.peek()
        raise ParseUnsupported(construct, tok.line, tok.col)

    @staticmethod
    def _span(start: Token, end: Token) -> Span:
        return Span(start.line, start.col, end.end_line, end.end_col)

    def _span_to_prev(self, start: Token) -> Span:
        prev = self.tokens[max(self.pos - 1, 0)]
        return self._span(start, prev)

    def _node(self, kind: str, start: Token, **kw) -> AstNode:
        attrs = kw.pop("attrs", {})
        return AstNode(kind, self._span_to_prev(start), attrs=attrs, **kw)

    # program -----------------------------------------------------------

    def parse_program(self) -> AstNode:
        start = self.peek()
        body: list[AstNode] = []
        while self.peek().type != T_EOF:
            stmt = self.parse_statement()
            if stmt is not None:
                body.extend(stmt if isinstance(stmt, list) else [stmt])
        eof = self.peek()
        span = Span(1, 1, max(eof.end_line, start.line), eof.end_col + 1)
        return AstNode("Program", span, children=body)

    # statements ---------------------------------------------------------

    def parse_statement(self) -> AstNode | list[AstNode] | None:
        tok = self.peek()
        if tok.type == T_PUNCT:
            if tok.value == ";":
                self.next()
                return None
            if tok.value == "{":
                return self.parse_block()
        if tok.type == T_KEYWORD:
            kw = tok.value
            if kw in ("var", "let", "const"):
                return self.parse_var_statement()
            if kw == "function":
                return self.parse_function(declaration=True)
            if kw == "async" and self.peek(1).type == T_KEYWORD \
                    and self.peek(1).value == "function":
                return self.parse_function(declaration=True)
            if kw == "return":
                return self.parse_return()
            if kw == "if":
                return self.parse_if()
            if kw == "for":
                return self.parse_for()
            if kw == "while":
                return self.parse_while()
            if kw == "do":
                return self.parse_do_while()
            if kw == "try":
                return self.parse_try()
            if kw in _UNSUPPORTED_STMT_KEYWORDS:
                self._unsupported(f"{kw} statement")
        if tok.type == T_IDENT and self.peek(1).type == T_PUNCT \
                and self.peek(1).value == ":":
            self._unsupported("labeled statement")
        expr = self.parse_expression()
        self._consume_semicolon()
        return expr

    def _consume_semicolon(self) -> None:
        tok = self.peek()
        if tok.type == T_PUNCT and tok.value == ";":
            self.next()
            return
        if tok.type == T_EOF or (tok.type == T_PUNCT and tok.value == "}"):
            return
        if tok.nl_before:
            return
        self._unexpected("expected ';'")

    def parse_block(self) -> AstNode:
        start = self.expect_punct("{")
        body: list[AstNode] = []
        while not self.at_punct("}"):
            if self.peek().type == T_EOF:
                raise ParseError("unterminated block", start.line, start.col)
            stmt = self.parse_statement()
            if stmt is not None:
                body.extend(stmt if isinstance(stmt, list) else [stmt])
        self.next()
        return self._node("BlockStatement", start, children=body)

    def parse_var_statement(self) -> list[AstNode]:
        decl_kind = self.next().value
        decls = [self.parse_declarator(decl_kind)]
        while self.at_punct(","):
            self.next()
            decls.append(self.parse_declarator(decl_kind))
        self._consume_semicolon()
        return decls

    def parse_declarator(self, decl_kind: str, allow_init: bool = True) -> AstNode:
        start = self.peek()
        target = self.parse_binding_target()
        children = [target]
        if allow_init and self.at_punct("="):
            self.next()
            children.append(self.parse_assignment())
        return self._node("VariableDeclarator", start, children=children,
                          attrs={"decl_kind": decl_kind})

    def parse_binding_target(self) -> AstNode:
        tok = self.peek()
        if tok.type == T_IDENT:
            self.next()
            return self._node("Identifier", tok, name=tok.value)
        if tok.type == T_PUNCT and tok.value == "{":
            return self.parse_object_literal()
        if tok.type == T_PUNCT and tok.value == "[":
            return self.parse_array_literal()
        self._unexpected("expected binding target")
        raise AssertionError  # unreachable

    def parse_return(self) -> AstNode:
        start = self.next()
        children: list[AstNode] = []
        tok = self.peek()
        ends = tok.type == T_EOF or (tok.type == T_PUNCT and tok.value in (";", "}"))
        if not ends and not tok.nl_before:
            children.append(self.parse_expression())
        self._consume_semicolon()
        return self._node("ReturnStatement", start, children=children)

    def parse_if(self) -> AstNode:
        start = self.next()
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        consequent = self._embedded_statement()
        children = [test, consequent]
        if self.at_keyword("else"):
            self.next()
            children.append(self._embedded_statement())
        return self._node("IfStatement", start, children=children)

    def _embedded_statement(self) -> AstNode:
        """Body of if/for/while; a bare declaration is not allowed there."""
        stmt = self.parse_statement()
        if stmt is None:
            prev = self.tokens[self.pos - 1]
            return AstNode("BlockStatement", self._span(prev, prev))
        if isinstance(stmt, list):
            if len(stmt) != 1:
                raise ParseError("declaration list not allowed here",
                                 stmt[0].span.start_line, stmt[0].span.start_col)
            return stmt[0]
        return stmt

    def parse_for(self) -> AstNode:
        start = self.next()
        self.expect_punct("(")
        init: list[AstNode] = []
        left: AstNode | None = None
        if self.peek().type == T_KEYWORD and self.peek().value in ("var", "let", "const"):
            decl_kind = self.next().value
            first = self.parse_declarator(decl_kind, allow_init=False)
            if (self.at_keyword("in") or self.at_keyword("of")) and len(first.children) == 1:
                return self._parse_for_in_of(start, first)
            if self.at_punct("="):
                self.next()
                first.children.append(self.parse_assignment())
                first.span = Span(first.span.start_line, first.span.start_col,
                                  *self._span_to_prev(start)[2:])
            init.append(first)
            while self.at_punct(","):
                self.next()
                init.append(self.parse_declarator(decl_kind))
        elif not self.at_punct(";"):
            self.no_in = True
            try:
                left = self.parse_expression()
            finally:
                self.no_in = False
            if self.at_keyword("in") or self.at_keyword("of"):
                return self._parse_for_in_of(start, left)
            init.append(left)
        self.expect_punct(";")
        children = list(init)
        has_test = not self.at_punct(";")
        if has_test:
            children.append(self.parse_expression())
        self.expect_punct(";")
        has_update = not self.at_punct(")")
        if has_update:
            children.append(self.parse_expression())
        self.expect_punct(")")
        children.append(self._embedded_statement())
        return self._node("ForStatement", start, children=children, attrs={
            "style": "classic", "init_count": len(init),
            "has_test": has_test, "has_update": has_update,
        })

    def _parse_for_in_of(self, start: Token, left: AstNode) -> AstNode:
        style = self.next().value  # 'in' or 'of'
        right = self.parse_assignment()
        self.expect_punct(")")
        body = self._embedded_statement()
        return self._node("ForStatement", start, children=[left, right, body],
                          attrs={"style": style})

    def parse_while(self) -> AstNode:
        start = self.next()
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        body = self._embedded_statement()
        return self._node("WhileStatement", start, children=[test, body])

    def parse_do_while(self) -> AstNode:
        start = self.next()
        body = self._embedded_statement()
        if not self.at_keyword("while"):
            self._unexpected("expected 'while'")
        self.next()
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        if self.at_punct(";"):
            self.next()
        return self._node("WhileStatement", start, children=[test, body],
                          attrs={"do_while": True})

    def parse_try(self) -> AstNode:
        start = self.next()
        children = [self.parse_block()]
        attrs = {"has_catch": False, "catch_param": False, "has_finally": False}
        if self.at_keyword("catch"):
            self.next()
            attrs["has_catch"] = True
            if self.at_punct("("):
                self.next()
                attrs["catch_param"] = True
                children.append(self.parse_binding_target())
                self.expect_punct(")")
            children.append(self.parse_block())
        if self.at_keyword("finally"):
            self.next()
            attrs["has_finally"] = True
            children.append(self.parse_block())
        if not attrs["has_catch"] and not attrs["has_finally"]:
            self._unexpected("expected 'catch' or 'finally'")
        return self._node("TryStatement", start, children=children, attrs=attrs)

    # functions ----------------------------------------------------------

    def parse_function(self, declaration: bool) -> AstNode:
        start = self.peek()
        is_async = False
        if self.at_keyword("async"):
            self.next()
            is_async = True
        self.next()  # 'function'
        if self.at_punct("*"):
            self._unsupported("generator function")
        name: str | None = None
        if self.peek().type == T_IDENT:
            name = self.next().value
        elif declaration:
            self._unexpected("expected function name")
        params = self.parse_params()
        body = self.parse_block()
        kind = "FunctionDeclaration" if declaration else "FunctionExpression"
        attrs = {"is_async": True} if is_async else {}
        return self._node(kind, start, children=params + [body],
                          name=name, attrs=attrs)

    def parse_params(self) -> list[AstNode]:
        open_tok = self.expect_punct("(")
        params: list[AstNode] = []
        while not self.at_punct(")"):
            if self.peek().type == T_EOF:
                raise ParseError("unterminated parameter list",
                                 open_tok.line, open_tok.col)
            if self.at_punct("..."):
                rest_start = self.next()
                params.append(self._node("SpreadElement", rest_start,
                                         children=[self.parse_binding_target()]))
            else:
                start = self.peek()
                target = self.parse_binding_target()
                if self.at_punct("="):
                    self.next()
                    default = self.parse_assignment()
                    target = self._node("AssignmentExpression", start,
                                        children=[target, default], operator="=")
                params.append(target)
            if self.at_punct(","):
                self.next()
            elif not self.at_punct(")"):
                self._unexpected("expected ',' or ')'")
        self.next()
        return params

    def _try_parse_arrow(self) -> AstNode | None:
        """Arrow function at expression position, or None."""
        tok = self.peek()
        is_async = False
        idx = 0
        if tok.type == T_KEYWORD and tok.value == "async" \
                and not self.peek(1).nl_before:
            nxt = self.peek(1)
            if nxt.type == T_IDENT or (nxt.type == T_PUNCT and nxt.value == "("):
                is_async = True
                idx = 1
        head = self.peek(idx)
        if head.type == T_IDENT:
            arrow = self.peek(idx + 1)
            if arrow.type == T_PUNCT and arrow.value == "=>":
                if is_async:
                    self.next()  # 'async'
                name_tok = self.next()
                param = self._node("Identifier", name_tok, name=name_tok.value)
                self.next()  # '=>'
                return self._finish_arrow(tok, [param], is_async)
            return None
        if head.type == T_PUNCT and head.value == "(":
            close = self._find_matching_paren(self.pos + idx)
            if close is None:
                return None
            after = self.tokens[min(close + 1, len(self.tokens) - 1)]
            if not (after.type == T_PUNCT and after.value == "=>"):
                return None
            if is_async:
                self.next()
            params = self.parse_params()
            self.next()  # '=>'
            return self._finish_arrow(tok, params, is_async)
        return None

    def _find_matching_paren(self, start_idx: int) -> int | None:
        depth = 0
        for i in range(start_idx, len(self.tokens)):
            t = self.tokens[i]
            if t.type != T_PUNCT:
                continue
            if t.value in ("(", "[", "{"):
                depth += 1
            elif t.value in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return i
                if depth < 0:
                    return None
        return None

    def _finish_arrow(self, start: Token, params: list[AstNode],
                      is_async: bool) -> AstNode:
        attrs: dict = {"is_async": True} if is_async else {}
        if self.at_punct("{"):
            body = self.parse_block()
        else:
            body = self.parse_assignment()
            attrs["expression_body"] = True
        return self._node("ArrowFunction", start, children=params + [body],
                          attrs=attrs)

    # expressions ----------------------------------------------------------

    def parse_expression(self) -> AstNode:
        start = self.peek()
        expr = self.parse_assignment()
        while self.at_punct(","):
            self.next()
            right = self.parse_assignment()
            expr = self._node("BinaryExpression", start,
                              children=[expr, right], operator=",")
        return expr

    def parse_assignment(self) -> AstNode:
        arrow = self._try_parse_arrow()
        if arrow is not None:
            return arrow
        start = self.peek()
        left = self.parse_conditional()
        tok = self.peek()
        if tok.type == T_PUNCT and tok.value in _ASSIGN_OPS:
            self.next()
            right = self.parse_assignment()
            return self._node("AssignmentExpression", start,
                              children=[left, right], operator=tok.value)
        return left

    def parse_conditional(self) -> AstNode:
        start = self.peek()
        test = self.parse_binary(0)
        if self.at_punct("?"):
            self.next()
            consequent = self.parse_assignment()
            self.expect_punct(":")
            alternate = self.parse_assignment()
            return self._node("ConditionalExpression", start,
                              children=[test, consequent, alternate])
        return test

    def parse_binary(self, min_prec: int) -> AstNode:
        start = self.peek()
        left = self.parse_unary()
        while True:
            tok = self.peek()
            op = tok.value
            if tok.type == T_KEYWORD and op in ("in", "instanceof"):
                if op == "in" and self.no_in:
                    return left
                prec = _BINARY_PREC[op]
            elif tok.type == T_PUNCT and op in _BINARY_PREC:
                prec = _BINARY_PREC[op]
            else:
                return left
            if prec < min_prec:
                return left
            self.next()
            # '**' is right-associative; everything else left.
            right = self.parse_binary(prec if op == "**" else prec + 1)
            left = self._node("BinaryExpression", start,
                              children=[left, right], operator=op)

    def parse_unary(self) -> AstNode:
        tok = self.peek()
        if tok.type == T_KEYWORD and tok.value == "await":
            start = self.next()
            arg = self.parse_unary()
            return self._node("AwaitExpression", start, children=[arg])
        if (tok.type == T_PUNCT and tok.value in _UNARY_OPS) or \
                (tok.type == T_KEYWORD and tok.value in ("typeof", "void", "delete")):
            start = self.next()
            arg = self.parse_unary()
            return self._node("UnaryExpression", start, children=[arg],
                              operator=start.value, attrs={"prefix": True})
        expr = self.parse_postfix()
        return expr

    def parse_postfix(self) -> AstNode:
        start = self.peek()
        expr = self.parse_call_member()
        tok = self.peek()
        if tok.type == T_PUNCT and tok.value in ("++", "--") and not tok.nl_before:
            self.next()
            return self._node("UnaryExpression", start, children=[expr],
                              operator=tok.value, attrs={"prefix": False})
        return expr

    def parse_call_member(self) -> AstNode:
        start = self.peek()
        if self.at_keyword("new"):
            self.next()
            if self.at_punct("."):
                self._unsupported("new.target", start)
            callee = self._parse_member_chain(self.parse_primary(), start,
                                              allow_calls=False)
            args = self.parse_args() if self.at_punct("(") else []
            expr = self._node("NewExpression", start, children=[callee] + args)
            return self._parse_member_chain(expr, start, allow_calls=True)
        expr = self.parse_primary()
        return self._parse_member_chain(expr, start, allow_calls=True)

    def _parse_member_chain(self, expr: AstNode, start: Token,
                            allow_calls: bool) -> AstNode:
        while True:
            tok = self.peek()
            if tok.type != T_PUNCT:
                if tok.type == T_TEMPLATE:
                    self._unsupported("tagged template", tok)
                return expr
            if tok.value == ".":
                self.next()
                prop = self._parse_property_name()
                expr = self._node("MemberExpression", start,
                                  children=[expr, prop],
                                  attrs={"computed": False})
            elif tok.value == "?.":
                self.next()
                if self.at_punct("("):
                    if not allow_calls:
                        return expr
                    args = self.parse_args()
                    expr = self._node("CallExpression", start,
                                      children=[expr] + args,
                                      attrs={"optional": True})
                elif self.at_punct("["):
                    self.next()
                    prop = self.parse_expression()
                    self.expect_punct("]")
                    expr = self._node("MemberExpression", start,
                                      children=[expr, prop],
                                      attrs={"computed": True, "optional": True})
                else:
                    prop = self._parse_property_name()
                    expr = self._node("MemberExpression", start,
                                      children=[expr, prop],
                                      attrs={"computed": False, "optional": True})
            elif tok.value == "[":
                self.next()
                prop = self.parse_expression()
                self.expect_punct("]")
                expr = self._node("MemberExpression", start,
                                  children=[expr, prop],
                                  attrs={"computed": True})
            elif tok.value == "(" and allow_calls:
                args = self.parse_args()
                expr = self._node("CallExpression", start,
                                  children=[expr] + args)
            else:
                return expr

    def _parse_property_name(self) -> AstNode:
        tok = self.peek()
        if tok.type in (T_IDENT, T_KEYWORD):
            self.next()
            return self._node("Identifier", tok, name=tok.value)
        self._unexpected("expected property name")
        raise AssertionError  # unreachable

    def parse_args(self) -> list[AstNode]:
        open_tok = self.expect_punct("(")
        args: list[AstNode] = []
        while not self.at_punct(")"):
            if self.peek().type == T_EOF:
                raise ParseError("unterminated argument list",
                                 open_tok.line, open_tok.col)
            if self.at_punct("..."):
                start = self.next()
                args.append(self._node("SpreadElement", start,
                                       children=[self.parse_assignment()]))
            else:
                args.append(self.parse_assignment())
            if self.at_punct(","):
                self.next()
            elif not self.at_punct(")"):
                self._unexpected("expected ',' or ')'")
        self.next()
        return args

    # primary ---------------------------------------------------------------

    def parse_primary(self) -> AstNode:
        tok = self.peek()
        if tok.type == T_IDENT:
            self.next()
            return self._node("Identifier", tok, name=tok.value)
        if tok.type == T_NUM:
            self.next()
            try:
                value = self._num_value(tok.value)
            except ValueError:
                raise ParseError(f"malformed number {tok.value!r}",
                                 tok.line, tok.col) from None
            return self._node("Literal", tok, value=value, raw=tok.value)
        if tok.type == T_STR:
            self.next()
            return self._node("Literal", tok, value=_unescape(tok.value[1:-1]),
                              raw=tok.value)
        if tok.type == T_REGEX:
            self.next()
            return self._node("Literal", tok, value=tok.value, raw=tok.value,
                              attrs={"regex": True})
        if tok.type == T_TEMPLATE:
            return self.parse_template(tok)
        if tok.type == T_KEYWORD:
            kw = tok.value
            if kw == "this":
                self.next()
                return self._node("ThisExpression", tok)
            if kw in ("true", "false"):
                self.next()
                return self._node("Literal", tok, value=(kw == "true"), raw=kw)
            if kw == "null":
                self.next()
                return self._node("Literal", tok, value=None, raw=kw)
            if kw == "function" or (kw == "async" and self.peek(1).type == T_KEYWORD
                                    and self.peek(1).value == "function"):
                return self.parse_function(declaration=False)
            if kw == "async":
                # plain identifier use of a contextual keyword
                self.next()
                return self._node("Identifier", tok, name=kw)
            if kw in _UNSUPPORTED_STMT_KEYWORDS:
                self._unsupported(f"{kw} expression")
            self._unexpected()
        if tok.type == T_PUNCT:
            if tok.value == "(":
                self.next()
                saved_no_in, self.no_in = self.no_in, False
                try:
                    expr = self.parse_expression()
                finally:
                    self.no_in = saved_no_in
                self.expect_punct(")")
                return expr
            if tok.value == "{":
                return self.parse_object_literal()
            if tok.value == "[":
                return self.parse_array_literal()
        self._unexpected()
        raise AssertionError  # unreachable

    @staticmethod
    def _num_value(raw: str) -> int | float:
        text = raw.replace("_", "")
        if text[:2].lower() in ("0x", "0o", "0b"):
            return int(text, 0)
        val = float(text)
        return int(val) if val.is_integer() and abs(val) < 2 ** 53 else val

    def parse_template(self, tok: Token) -> AstNode:
        self.next()
        children: list[AstNode] = []
        for segment in tok.segments:
            if isinstance(segment, str):
                children.append(AstNode(
                    "Literal", Span(tok.line, tok.col, tok.end_line, tok.end_col),
                    value=_unescape(segment), raw=segment))
            else:
                src, line, col = segment
                sub_tokens, _ = Lexer(src, start_line=line, start_col=col).tokenize()
                sub = Parser(sub_tokens)
                expr = sub.parse_expression()
                if sub.peek().type != T_EOF:
                    sub._unexpected("trailing tokens in template expression")
                children.append(expr)
        return self._node("TemplateLiteral", tok, children=children)

    def parse_object_literal(self) -> AstNode:
        start = self.expect_punct("{")
        props: list[AstNode] = []
        while not self.at_punct("}"):
            if self.peek().type == T_EOF:
                raise ParseError("unterminated object literal",
                                 start.line, start.col)
            if self.at_punct("..."):
                spread_start = self.next()
                props.append(self._node("SpreadElement", spread_start,
                                        children=[self.parse_assignment()]))
            else:
                props.append(self.parse_property())
            if self.at_punct(","):
                self.next()
            elif not self.at_punct("}"):
                self._unexpected("expected ',' or '}'")
        self.next()
        return self._node("ObjectLiteral", start, children=props)

    def parse_property(self) -> AstNode:
        start = self.peek()
        is_async = False
        if self.at_keyword("async") and self.peek(1).type in (T_IDENT, T_KEYWORD) \
                and self.peek(2).type == T_PUNCT and self.peek(2).value == "(":
            self.next()
            is_async = True
        computed = False
        if self.at_punct("["):
            self.next()
            key = self.parse_assignment()
            self.expect_punct("]")
            computed = True
        else:
            tok = self.peek()
            if tok.type in (T_IDENT, T_KEYWORD):
                if tok.type == T_IDENT and tok.value in ("get", "set") \
                        and self.peek(1).type in (T_IDENT, T_KEYWORD, T_STR, T_NUM):
                    self._unsupported("accessor property", tok)
                self.next()
                key = self._node("Identifier", tok, name=tok.value)
            elif tok.type == T_STR:
                self.next()
                key = self._node("Literal", tok, value=_unescape(tok.value[1:-1]),
                                 raw=tok.value)
            elif tok.type == T_NUM:
                self.next()
                try:
                    num = self._num_value(tok.value)
                except ValueError:
                    raise ParseError(f"malformed number {tok.value!r}",
                                     tok.line, tok.col) from None
                key = self._node("Literal", tok, value=num, raw=tok.value)
            else:
                self._unexpected("expected property key")
                raise AssertionError
        if self.at_punct("("):
            params = self.parse_params()
            body = self.parse_block()
            fn_attrs = {"is_async": True} if is_async else {}
            fn = self._node("FunctionExpression", start,
                            children=params + [body], attrs=fn_attrs)
            return self._node("Property", start, children=[key, fn],
                              attrs={"computed": computed, "method": True})
        if self.at_punct(":"):
            self.next()
            value = self.parse_assignment()
            return self._node("Property", start, children=[key, value],
                              attrs={"computed": computed})
        if key.kind != "Identifier":
            self._unexpected("expected ':'")
        if self.at_punct("="):
            # shorthand with default, occurs in destructuring patterns
            self.next()
            default = self.parse_assignment()
            target = AstNode("Identifier", key.span, name=key.name)
            value = self._node("AssignmentExpression", start,
                               children=[target, default], operator="=")
            return self._node("Property", start, children=[key, value],
                              attrs={"computed": False, "shorthand": True})
        value = AstNode("Identifier", key.span, name=key.name)
        return self._node("Property", start, children=[key, value],
                          attrs={"computed": False, "shorthand": True})

    def parse_array_literal(self) -> AstNode:
        start = self.expect_punct("[")
        elements: list[AstNode] = []
        while not self.at_punct("]"):
            if self.peek().type == T_EOF:
                raise ParseError("unterminated array literal",
                                 start.line, start.col)
            if self.at_punct(","):
                self._unsupported("array hole")
            if self.at_punct("..."):
                spread_start = self.next()
                elements.append(self._node("SpreadElement", spread_start,
                                           children=[self.parse_assignment()]))
            else:
                elements.append(self.parse_assignment())
            if self.at_punct(","):
                self.next()
            elif not self.at_punct("]"):
                self._unexpected("expected ',' or ']'")
        self.next()
        return self._node("ArrayLiteral", start, children=elements)


def parse_script(source: str, path: str = "<source>") -> AstRoot:
    """Parse source into a finalized tree with pre-order node ids."""
    tokens, comments = Lexer(source).tokenize()
    parser = Parser(tokens)
    program = parser.parse_program()
    root = AstRoot(
        file_path=path,
        program=program,
        comments=[(Span(c.line, c.col, c.end_line, c.end_col), c.text)
                  for c in comments],
    )
    return finalize(root)
