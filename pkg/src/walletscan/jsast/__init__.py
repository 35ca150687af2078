"""ECMAScript-subset parsing, traversal, and canonical printing."""

from .fold import fold_string_concats
from .lexer import ParseError
from .nodes import (
    AstNode, AstRoot, FUNCTION_KINDS, NODE_KINDS, Span,
    member_path, structural_equal, to_debug_dict, walk,
)
from .parser import ParseUnsupported, parse_script
from .printer import print_canonical

__all__ = [
    "AstNode", "AstRoot", "FUNCTION_KINDS", "NODE_KINDS", "ParseError",
    "ParseUnsupported", "Span", "fold_string_concats", "member_path",
    "parse_script", "print_canonical", "structural_equal", "to_debug_dict",
    "walk",
]
