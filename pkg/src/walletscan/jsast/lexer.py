"""Tokenizer for the ECMAScript subset handled by this package.

Produces a flat token list (the parser indexes into it freely for
lookahead). Positions are 1-based line/column; every token records
whether a line terminator preceded it, which drives semicolon
insertion in the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(Exception):
    """Source is not syntactically valid under the supported grammar."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at ({line}, {col})")
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {
    "var", "let", "const", "function", "return", "if", "else", "new",
    "this", "for", "while", "do", "try", "catch", "finally", "true",
    "false", "null", "typeof", "void", "delete", "in", "of",
    "instanceof", "await", "async",
    # Recognized but unsupported; the parser reports these as outside
    # the subset rather than as syntax errors.
    "class", "switch", "case", "default", "break", "continue", "throw",
    "yield", "import", "export", "super", "debugger", "with", "extends",
}

PUNCTUATORS = [
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=",
    "||=", "??=", "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<",
    ">>", "**", "{", "}", "(", ")", "[", "]", ";", ",", ".", "?", ":",
    "=", "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^",
]

# Token types
T_IDENT = "ident"
T_KEYWORD = "keyword"
T_NUM = "num"
T_STR = "str"
T_TEMPLATE = "template"
T_REGEX = "regex"
T_PUNCT = "punct"
T_EOF = "eof"


@dataclass
class Token:
    type: str
    value: str
    line: int
    col: int
    end_line: int
    end_col: int
    nl_before: bool = False
    # Template tokens carry their parsed segments: a list alternating
    # raw string chunks and (expr_source, line, col) tuples.
    segments: list = field(default_factory=list)


@dataclass
class Comment:
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


_ASCII_DIGITS = frozenset("0123456789")


def _is_digit(ch: str) -> bool:
    # str.isdigit accepts Unicode digits that float()/int() reject
    return ch in _ASCII_DIGITS


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


# Tokens a '/' may directly follow while still meaning division.
_DIV_PRECEDERS_PUNCT = {")", "]", "++", "--"}


class Lexer:
    def __init__(self, source: str, start_line: int = 1, start_col: int = 1):
        self.src = source.lstrip("﻿")
        self.pos = 0
        self.line = start_line
        self.col = start_col
        self.tokens: list[Token] = []
        self.comments: list[Comment] = []
        self._nl_pending = False

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.src) and self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def tokenize(self) -> tuple[list[Token], list[Comment]]:
        while True:
            self._skip_trivia()
            if self.pos >= len(self.src):
                break
            self._lex_token()
        self.tokens.append(
            Token(T_EOF, "", self.line, self.col, self.line, self.col,
                  nl_before=self._nl_pending)
        )
        return self.tokens, self.comments

    def _skip_trivia(self) -> None:
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch in " \t\r\v\f":
                self._advance()
            elif ch == "\n":
                self._nl_pending = True
                self._advance()
            elif ch == "/" and self._peek(1) == "/":
                start = (self.line, self.col)
                begin = self.pos
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self._advance()
                self.comments.append(Comment(
                    self.src[begin:self.pos], start[0], start[1],
                    self.line, self.col))
            elif ch == "/" and self._peek(1) == "*":
                start = (self.line, self.col)
                begin = self.pos
                self._advance(2)
                while self.pos < len(self.src):
                    if self.src[self.pos] == "*" and self._peek(1) == "/":
                        self._advance(2)
                        break
                    if self.src[self.pos] == "\n":
                        self._nl_pending = True
                    self._advance()
                else:
                    raise self.error("unterminated block comment")
                self.comments.append(Comment(
                    self.src[begin:self.pos], start[0], start[1],
                    self.line, self.col))
            else:
                return

    def _emit(self, type_: str, value: str, line: int, col: int,
              segments: list | None = None) -> None:
        tok = Token(type_, value, line, col, self.line, self.col,
                    nl_before=self._nl_pending)
        if segments is not None:
            tok.segments = segments
        self._nl_pending = False
        self.tokens.append(tok)

    def _lex_token(self) -> None:
        ch = self.src[self.pos]
        line, col = self.line, self.col
        if _is_ident_start(ch):
            begin = self.pos
            while self.pos < len(self.src) and _is_ident_part(self.src[self.pos]):
                self._advance()
            word = self.src[begin:self.pos]
            self._emit(T_KEYWORD if word in KEYWORDS else T_IDENT, word, line, col)
        elif _is_digit(ch) or (ch == "." and _is_digit(self._peek(1))):
            self._lex_number(line, col)
        elif ch in "'\"":
            self._lex_string(ch, line, col)
        elif ch == "`":
            self._lex_template(line, col)
        elif ch == "/" and self._regex_allowed():
            self._lex_regex(line, col)
        else:
            for punct in PUNCTUATORS:
                if self.src.startswith(punct, self.pos):
                    self._advance(len(punct))
                    self._emit(T_PUNCT, punct, line, col)
                    return
            raise self.error(f"unexpected character {ch!r}")

    def _regex_allowed(self) -> bool:
        # A '/' begins a regex unless the previous token can end an
        # expression (identifier, literal, ')', ']', postfix ++/--).
        if not self.tokens:
            return True
        prev = self.tokens[-1]
        if prev.type in (T_NUM, T_STR, T_TEMPLATE, T_REGEX):
            return False
        if prev.type == T_IDENT:
            return False
        if prev.type == T_KEYWORD:
            return prev.value not in ("this", "true", "false", "null", "super")
        if prev.type == T_PUNCT:
            return prev.value not in _DIV_PRECEDERS_PUNCT
        return True

    def _lex_number(self, line: int, col: int) -> None:
        begin = self.pos
        src = self.src
        if src[self.pos] == "0" and self._peek(1) in "xXoObB":
            self._advance(2)
            while self.pos < len(src) and (src[self.pos].isalnum() or src[self.pos] == "_"):
                self._advance()
        else:
            while self.pos < len(src) and _is_digit(src[self.pos]):
                self._advance()
            if self._peek() == ".":
                self._advance()
                while self.pos < len(src) and _is_digit(src[self.pos]):
                    self._advance()
            if self._peek() in "eE":
                self._advance()
                if self._peek() in "+-":
                    self._advance()
                while self.pos < len(src) and _is_digit(src[self.pos]):
                    self._advance()
        raw = src[begin:self.pos]
        if self.pos < len(src) and _is_ident_start(src[self.pos]):
            raise self.error(f"malformed number {raw!r}")
        self._emit(T_NUM, raw, line, col)

    def _lex_string(self, quote: str, line: int, col: int) -> None:
        begin = self.pos
        self._advance()
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch == "\\":
                self._advance(2)
            elif ch == quote:
                self._advance()
                self._emit(T_STR, self.src[begin:self.pos], line, col)
                return
            elif ch == "\n":
                raise self.error("unterminated string literal")
            else:
                self._advance()
        raise self.error("unterminated string literal")

    def _lex_regex(self, line: int, col: int) -> None:
        begin = self.pos
        self._advance()
        in_class = False
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch == "\\":
                self._advance(2)
                continue
            if ch == "\n":
                raise self.error("unterminated regular expression")
            if ch == "[":
                in_class = True
            elif ch == "]":
                in_class = False
            elif ch == "/" and not in_class:
                self._advance()
                while self.pos < len(self.src) and _is_ident_part(self.src[self.pos]):
                    self._advance()
                self._emit(T_REGEX, self.src[begin:self.pos], line, col)
                return
            self._advance()
        raise self.error("unterminated regular expression")

    def _lex_template(self, line: int, col: int) -> None:
        # Segments alternate: raw chunk, (expr_src, line, col), raw chunk, ...
        # always beginning and ending with a (possibly empty) raw chunk.
        segments: list = []
        begin = self.pos
        self._advance()  # opening backtick
        chunk_start = self.pos
        while True:
            if self.pos >= len(self.src):
                raise self.error("unterminated template literal")
            ch = self.src[self.pos]
            if ch == "\\":
                self._advance(2)
            elif ch == "`":
                segments.append(self.src[chunk_start:self.pos])
                self._advance()
                break
            elif ch == "$" and self._peek(1) == "{":
                segments.append(self.src[chunk_start:self.pos])
                self._advance(2)
                expr_line, expr_col = self.line, self.col
                expr_start = self.pos
                self._scan_template_expr()
                segments.append((self.src[expr_start:self.pos], expr_line, expr_col))
                self._advance()  # closing brace
                chunk_start = self.pos
            else:
                self._advance()
        self._emit(T_TEMPLATE, self.src[begin:self.pos], line, col, segments=segments)

    def _scan_template_expr(self) -> None:
        # Leaves pos at the matching '}'. Tracks nested braces, strings,
        # comments, and nested templates so '${a ? `${b}` : "}"}' scans.
        depth = 0
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch == "\\":
                self._advance(2)
                continue
            if ch in "'\"":
                self._lex_string_raw(ch)
                continue
            if ch == "`":
                self._skip_nested_template()
                continue
            if ch == "/" and self._peek(1) == "/":
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self._advance()
                continue
            if ch == "/" and self._peek(1) == "*":
                self._advance(2)
                while self.pos < len(self.src) and not (
                        self.src[self.pos] == "*" and self._peek(1) == "/"):
                    self._advance()
                self._advance(2)
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                if depth == 0:
                    return
                depth -= 1
            self._advance()
        raise self.error("unterminated template expression")

    def _lex_string_raw(self, quote: str) -> None:
        self._advance()
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch == "\\":
                self._advance(2)
            elif ch == quote:
                self._advance()
                return
            else:
                self._advance()
        raise self.error("unterminated string literal")

    def _skip_nested_template(self) -> None:
        self._advance()
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch == "\\":
                self._advance(2)
            elif ch == "`":
                self._advance()
                return
            elif ch == "$" and self._peek(1) == "{":
                self._advance(2)
                self._scan_template_expr()
                self._advance()
            else:
                self._advance()
        raise self.error("unterminated template literal")
