"""Tokenizer for MiniJ source text."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class TokenKind(enum.Enum):
    AT = "At"
    IDENT = "Ident"
    KEYWORD = "Keyword"
    INT = "Int"
    STRING = "String"
    SEMI = "Semi"
    COMMA = "Comma"
    DOT = "Dot"
    LPAREN = "LParen"
    RPAREN = "RParen"
    LBRACE = "LBrace"
    RBRACE = "RBrace"
    LBRACKET = "LBracket"
    RBRACKET = "RBracket"
    ARROW = "Arrow"
    OP = "Op"
    COMMENT = "Comment"
    EOF = "EOF"


KEYWORDS = frozenset(
    {
        "package", "class", "interface", "extends", "new", "return", "if",
        "else", "while", "throw", "null", "true", "false", "this", "void",
        "static", "final", "private", "public", "abstract", "native", "int",
        "boolean",
    }
)


@dataclass(frozen=True, slots=True)
class Span:
    line: int
    col: int
    start: int
    end: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    span: Span

    def __repr__(self) -> str:
        return f"{self.kind.value}({self.text!r})@{self.span}"


class LexError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


_PUNCT = {
    ";": TokenKind.SEMI,
    ",": TokenKind.COMMA,
    ".": TokenKind.DOT,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "@": TokenKind.AT,
    "->": TokenKind.ARROW,
}

_MASTER = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*(?:.|\n)*?\*/)
  | (?P<open_comment>/\*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<open_string>")
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<int>[0-9]+)
  | (?P<punct>->|==|!=|<=|>=|&&|\|\||[;,.(){}\[\]@=<>!+\-*?:])
    """,
    re.VERBOSE,
)


def lex(text: str, *, trivia: bool = False) -> list[Token]:
    """Split ``text`` into tokens.

    Whitespace is dropped. Comments are dropped unless ``trivia`` is set, in
    which case they appear in the stream as COMMENT tokens.
    """
    tokens: list[Token] = []
    append = tokens.append
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    match = _MASTER.match
    kw = KEYWORDS
    punct = _PUNCT
    while pos < n:
        m = match(text, pos)
        if m is None:
            span = Span(line, pos - line_start + 1, pos, pos + 1)
            raise LexError(f"unexpected character {text[pos]!r}", span)
        group = m.lastgroup
        end = m.end()
        if group == "ws":
            nl = text.count("\n", pos, end)
            if nl:
                line += nl
                line_start = text.rindex("\n", pos, end) + 1
            pos = end
            continue
        span = Span(line, pos - line_start + 1, pos, end)
        lexeme = m.group()
        if group == "ident":
            append(Token(TokenKind.KEYWORD if lexeme in kw else TokenKind.IDENT, lexeme, span))
        elif group == "punct":
            kind = punct.get(lexeme)
            append(Token(kind if kind is not None else TokenKind.OP, lexeme, span))
        elif group == "int":
            append(Token(TokenKind.INT, lexeme, span))
        elif group == "string":
            append(Token(TokenKind.STRING, lexeme, span))
        elif group == "line_comment":
            if trivia:
                append(Token(TokenKind.COMMENT, lexeme, span))
        elif group == "block_comment":
            if trivia:
                append(Token(TokenKind.COMMENT, lexeme, span))
            nl = text.count("\n", pos, end)
            if nl:
                line += nl
                line_start = text.rindex("\n", pos, end) + 1
        elif group == "open_comment":
            raise LexError("unterminated block comment", Span(line, span.col, pos, n))
        else:
            raise LexError("unterminated string literal", span)
        pos = end
    return tokens


def unquote(literal: str) -> str:
    """Decode a string literal token (including its quotes)."""
    body = literal[1:-1]
    if "\\" not in body:
        return body
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body)
