"""MiniJ lexer, parser and pretty-printer."""

from .lexer import LexError, Span, Token, TokenKind, lex
from .parser import ParseResult, SyntaxIssue, parse, parse_source
from .printer import source_file as pretty

__all__ = [
    "LexError", "Span", "Token", "TokenKind", "lex",
    "ParseResult", "SyntaxIssue", "parse", "parse_source", "pretty",
]
