"""Recursive-descent parser for MiniJ.

Grammar sketch::

    file   := 'package' qname ';' classdecl*
    class  := annot* mods ('class'|'interface') Ident tparams? ('extends' type)? body
    member := field | method | ctor | block | 'static' block
    stmt   := block | if | while | return | throw | local ';' | expr ('=' expr)? ';'

Syntax errors are collected rather than raised; the parser resynchronizes at
the next ``;`` or ``}`` so one file can report several of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .lexer import LexError, Span, Token, TokenKind, lex, unquote

K = TokenKind

_CLASS_MODS = frozenset({"final", "abstract", "public", "private"})
_MEMBER_MODS = frozenset({"private", "public", "final", "static", "abstract", "native"})


@dataclass
class SyntaxIssue:
    message: str
    span: Span
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class _Bail(Exception):
    pass


@dataclass
class ParseResult:
    file: Optional[A.SourceFile]
    errors: list[SyntaxIssue] = field(default_factory=list)


class Parser:
    def __init__(self, tokens: list[Token], path: str = "<input>"):
        self.tokens = [t for t in tokens if t.kind is not K.COMMENT]
        end = self.tokens[-1].span if self.tokens else Span(1, 1, 0, 0)
        self.tokens.append(Token(K.EOF, "", Span(end.line, end.col, end.end, end.end)))
        self.pos = 0
        self.path = path
        self.errors: list[SyntaxIssue] = []

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        i = self.pos + k
        return self.tokens[i] if i < len(self.tokens) else self.tokens[-1]

    def at(self, kind: TokenKind, text: Optional[str] = None) -> bool:
        t = self.tokens[self.pos]
        return t.kind is kind and (text is None or t.text == text)

    def at_kw(self, word: str) -> bool:
        t = self.tokens[self.pos]
        return t.kind is K.KEYWORD and t.text == word

    def at_op(self, op: str) -> bool:
        t = self.tokens[self.pos]
        return t.kind is K.OP and t.text == op

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind is not K.EOF:
            self.pos += 1
        return t

    def fail(self, *expected: str) -> None:
        t = self.tok
        got = "end of input" if t.kind is K.EOF else repr(t.text)
        self.errors.append(
            SyntaxIssue(f"expected {' or '.join(expected)}, got {got}", t.span, tuple(expected))
        )
        raise _Bail

    def expect(self, kind: TokenKind, text: Optional[str] = None) -> Token:
        if self.at(kind, text):
            return self.advance()
        self.fail(repr(text) if text else kind.value)

    def expect_kw(self, word: str) -> Token:
        if self.at_kw(word):
            return self.advance()
        self.fail(repr(word))

    def expect_op(self, op: str) -> Token:
        if self.at_op(op):
            return self.advance()
        self.fail(repr(op))

    def ident(self) -> Token:
        if self.tok.kind is K.IDENT:
            return self.advance()
        self.fail("identifier")

    def sync(self) -> None:
        """Skip to just past the next ';' or to the next '}'."""
        while not self.at(K.EOF):
            if self.at(K.SEMI):
                self.advance()
                return
            if self.at(K.RBRACE):
                return
            self.advance()

    @staticmethod
    def join(a: Span, b: Span) -> Span:
        return Span(a.line, a.col, a.start, b.end)

    def prev_span(self) -> Span:
        return self.tokens[self.pos - 1].span if self.pos else self.tok.span

    # -- file level ----------------------------------------------------------

    def parse_file(self) -> Optional[A.SourceFile]:
        start = self.tok.span
        try:
            self.expect_kw("package")
            pkg = self.qualified_name()
            self.expect(K.SEMI)
        except _Bail:
            return None
        decls: list[A.ClassDecl] = []
        while not self.at(K.EOF):
            before = self.pos
            try:
                decls.append(self.class_decl())
            except _Bail:
                self.sync()
                if self.at(K.RBRACE):
                    self.advance()
                if self.pos == before:
                    self.advance()
        return A.SourceFile(self.path, pkg, decls, span=self.join(start, self.prev_span()))

    def qualified_name(self) -> str:
        parts = [self.ident().text]
        while self.at(K.DOT) and self.peek().kind is K.IDENT:
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    def annotation(self) -> A.Annotation:
        at = self.expect(K.AT)
        name = self.ident()
        arg = None
        if self.at(K.LPAREN):
            self.advance()
            arg = unquote(self.expect(K.STRING).text)
            self.expect(K.RPAREN)
        return A.Annotation(name.text, arg, span=self.join(at.span, self.prev_span()))

    def modifiers(self, allowed: frozenset[str]) -> tuple[list[A.Annotation], frozenset[str]]:
        annots: list[A.Annotation] = []
        mods: set[str] = set()
        while True:
            if self.at(K.AT):
                annots.append(self.annotation())
            elif self.tok.kind is K.KEYWORD and self.tok.text in allowed:
                mods.add(self.advance().text)
            else:
                return annots, frozenset(mods)

    def class_decl(self) -> A.ClassDecl:
        start = self.tok.span
        annots, mods = self.modifiers(_CLASS_MODS)
        if self.at_kw("class"):
            kind = "class"
        elif self.at_kw("interface"):
            kind = "interface"
        else:
            self.fail("'class'", "'interface'")
        self.advance()
        name = self.ident()
        tparams: list[str] = []
        if self.at_op("<"):
            self.advance()
            tparams.append(self.ident().text)
            while self.at(K.COMMA):
                self.advance()
                tparams.append(self.ident().text)
            self.expect_op(">")
        sup = None
        if self.at_kw("extends"):
            self.advance()
            sup = self.type_use()
        cls = A.ClassDecl(
            name.text, kind, tparams, sup, mods, annots, span=start, name_span=name.span
        )
        self.expect(K.LBRACE)
        while not self.at(K.RBRACE) and not self.at(K.EOF):
            before = self.pos
            try:
                self.member(cls)
            except _Bail:
                self.sync()
                if self.pos == before:
                    self.advance()
        self.expect(K.RBRACE)
        cls.span = self.join(start, self.prev_span())
        return cls

    def member(self, cls: A.ClassDecl) -> None:
        if self.at(K.SEMI):
            self.advance()
            return
        if self.at(K.LBRACE):
            cls.init_blocks.append(self.block())
            return
        if self.at_kw("static") and self.peek().kind is K.LBRACE:
            self.advance()
            cls.static_init_blocks.append(self.block())
            return
        start = self.tok.span
        annots, mods = self.modifiers(_MEMBER_MODS)
        # constructor: ClassName '('
        if (
            self.tok.kind is K.IDENT
            and self.tok.text == cls.name
            and self.peek().kind is K.LPAREN
        ):
            name = self.advance()
            params = self.params()
            body = self.block()
            cls.constructors.append(
                A.MethodDecl(name.text, params, None, body, mods, annots, True,
                             span=self.join(start, self.prev_span()), name_span=name.span)
            )
            return
        if self.at_kw("void"):
            self.advance()
            rtype = None
        else:
            rtype = self.type_use()
        # annotations written after modifiers but before the type are folded in above;
        # allow them between modifiers and type too (`public @Nullable Object m()`)
        name = self.ident()
        if self.at(K.LPAREN):
            params = self.params()
            body = None
            if self.at(K.SEMI):
                self.advance()
            else:
                body = self.block()
            cls.methods.append(
                A.MethodDecl(name.text, params, rtype, body, mods, annots, False,
                             span=self.join(start, self.prev_span()), name_span=name.span)
            )
            return
        if rtype is None:
            self.fail("'('")
        decls = [self.declarator(name)]
        while self.at(K.COMMA):
            self.advance()
            decls.append(self.declarator(self.ident()))
        self.expect(K.SEMI)
        cls.fields.append(
            A.FieldDecl(rtype, decls, mods, annots, span=self.join(start, self.prev_span()))
        )

    def declarator(self, name: Token) -> A.Declarator:
        init = None
        if self.at_op("="):
            self.advance()
            init = self.expr()
        return A.Declarator(name.text, init, span=name.span)

    def params(self) -> list[A.Param]:
        self.expect(K.LPAREN)
        out: list[A.Param] = []
        if not self.at(K.RPAREN):
            while True:
                start = self.tok.span
                annots, _ = self.modifiers(frozenset({"final"}))
                t = self.type_use()
                name = self.ident()
                out.append(A.Param(name.text, t, annots, span=self.join(start, name.span)))
                if not self.at(K.COMMA):
                    break
                self.advance()
        self.expect(K.RPAREN)
        return out

    def type_use(self) -> A.TypeUse:
        start = self.tok.span
        annots: list[A.Annotation] = []
        while self.at(K.AT):
            annots.append(self.annotation())
        if self.at_kw("int") or self.at_kw("boolean"):
            name = self.advance().text
            args: list[A.TypeUse] = []
        else:
            name = self.qualified_name()
            args = []
            if self.at_op("<"):
                self.advance()
                args.append(self.type_use())
                while self.at(K.COMMA):
                    self.advance()
                    args.append(self.type_use())
                self.expect_op(">")
        dims = 0
        while self.at(K.LBRACKET) and self.peek().kind is K.RBRACKET:
            self.advance()
            self.advance()
            dims += 1
        return A.TypeUse(name, args, dims, annots, span=self.join(start, self.prev_span()))

    # -- statements ----------------------------------------------------------

    def block(self) -> A.Block:
        start = self.expect(K.LBRACE).span
        stmts: list[A.Stmt] = []
        while not self.at(K.RBRACE) and not self.at(K.EOF):
            before = self.pos
            try:
                stmts.append(self.stmt())
            except _Bail:
                self.sync()
                if self.pos == before:
                    self.advance()
        self.expect(K.RBRACE)
        return A.Block(stmts, span=self.join(start, self.prev_span()))

    def stmt(self) -> A.Stmt:
        t = self.tok
        if t.kind is K.LBRACE:
            return self.block()
        if t.kind is K.SEMI:
            self.advance()
            return A.Empty(span=t.span)
        if t.kind is K.KEYWORD:
            w = t.text
            if w == "if":
                self.advance()
                self.expect(K.LPAREN)
                cond = self.expr()
                self.expect(K.RPAREN)
                then = self.stmt()
                other = None
                if self.at_kw("else"):
                    self.advance()
                    other = self.stmt()
                return A.If(cond, then, other, span=self.join(t.span, self.prev_span()))
            if w == "while":
                self.advance()
                self.expect(K.LPAREN)
                cond = self.expr()
                self.expect(K.RPAREN)
                body = self.stmt()
                return A.While(cond, body, span=self.join(t.span, self.prev_span()))
            if w == "return":
                self.advance()
                value = None if self.at(K.SEMI) else self.expr()
                self.expect(K.SEMI)
                return A.Return(value, span=self.join(t.span, self.prev_span()))
            if w == "throw":
                self.advance()
                value = self.expr()
                self.expect(K.SEMI)
                return A.Throw(value, span=self.join(t.span, self.prev_span()))
            if w in ("int", "boolean"):
                return self.local_decl([])
            if w == "final":
                self.advance()
                return self.local_decl([])
        if t.kind is K.AT:
            annots = []
            while self.at(K.AT):
                annots.append(self.annotation())
            return self.local_decl(annots, t.span)
        if t.kind is K.IDENT and self.looks_like_local():
            return self.local_decl([])
        target = self.expr()
        if self.at_op("="):
            self.advance()
            value = self.expr()
            self.expect(K.SEMI)
            if not isinstance(target, (A.Name, A.FieldAccess, A.ArrayIndex)):
                self.errors.append(SyntaxIssue("invalid assignment target", target.span))
            return A.Assign(target, value, span=self.join(t.span, self.prev_span()))
        self.expect(K.SEMI)
        return A.ExprStmt(target, span=self.join(t.span, self.prev_span()))

    def looks_like_local(self) -> bool:
        """Speculatively parse `Type Ident` without consuming input."""
        save, nerr = self.pos, len(self.errors)
        try:
            self.type_use()
            ok = self.tok.kind is K.IDENT and (
                self.peek().kind in (K.SEMI, K.COMMA) or (self.peek().kind is K.OP and self.peek().text == "=")
            )
        except _Bail:
            ok = False
        self.pos = save
        del self.errors[nerr:]
        return ok

    def local_decl(self, annots: list[A.Annotation], start: Optional[Span] = None) -> A.Stmt:
        start = start or self.tok.span
        t = self.type_use()
        name = self.ident()
        init = None
        if self.at_op("="):
            self.advance()
            init = self.expr()
        self.expect(K.SEMI)
        return A.LocalDecl(t, name.text, init, annots,
                           span=self.join(start, self.prev_span()), name_span=name.span)

    # -- expressions ---------------------------------------------------------

    def expr(self) -> A.Expr:
        if self.lambda_ahead():
            return self.lambda_expr()
        return self.conditional()

    def lambda_ahead(self) -> bool:
        t = self.tok
        if t.kind is K.IDENT:
            return self.peek().kind is K.ARROW
        if t.kind is not K.LPAREN:
            return False
        i = 1
        if self.peek(i).kind is K.RPAREN:
            return self.peek(i + 1).kind is K.ARROW
        while True:
            if self.peek(i).kind is not K.IDENT:
                return False
            i += 1
            if self.peek(i).kind is K.COMMA:
                i += 1
                continue
            return self.peek(i).kind is K.RPAREN and self.peek(i + 1).kind is K.ARROW

    def lambda_expr(self) -> A.Lambda:
        start = self.tok.span
        params: list[str] = []
        if self.at(K.IDENT):
            params.append(self.advance().text)
        else:
            self.expect(K.LPAREN)
            if not self.at(K.RPAREN):
                params.append(self.ident().text)
                while self.at(K.COMMA):
                    self.advance()
                    params.append(self.ident().text)
            self.expect(K.RPAREN)
        self.expect(K.ARROW)
        body = self.block() if self.at(K.LBRACE) else self.expr()
        return A.Lambda(params, body, span=self.join(start, self.prev_span()))

    def conditional(self) -> A.Expr:
        cond = self.binary(0)
        if self.at_op("?"):
            self.advance()
            then = self.expr()
            self.expect_op(":")
            other = self.expr() if self.lambda_ahead() else self.conditional()
            return A.Conditional(cond, then, other, span=self.join(cond.span, other.span))
        return cond

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*",))

    def binary(self, level: int) -> A.Expr:
        if level == len(self._LEVELS):
            return self.unary()
        ops = self._LEVELS[level]
        left = self.binary(level + 1)
        while self.tok.kind is K.OP and self.tok.text in ops:
            op = self.advance().text
            right = self.binary(level + 1)
            left = A.Binary(op, left, right, span=self.join(left.span, right.span))
            if level == 3:
                break  # relational operators do not chain
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind is K.OP and t.text in ("!", "-"):
            self.advance()
            operand = self.unary()
            return A.Unary(t.text, operand, span=self.join(t.span, operand.span))
        return self.postfix(self.primary())

    def args(self) -> list[A.Expr]:
        self.expect(K.LPAREN)
        out: list[A.Expr] = []
        if not self.at(K.RPAREN):
            out.append(self.expr())
            while self.at(K.COMMA):
                self.advance()
                out.append(self.expr())
        self.expect(K.RPAREN)
        return out

    def postfix(self, e: A.Expr) -> A.Expr:
        while True:
            if self.at(K.DOT):
                self.advance()
                name = self.ident()
                if self.at(K.LPAREN):
                    args = self.args()
                    e = A.MethodCall(e, name.text, args,
                                     span=self.join(e.span, self.prev_span()), name_span=name.span)
                else:
                    e = A.FieldAccess(e, name.text, span=self.join(e.span, name.span),
                                      name_span=name.span)
            elif self.at(K.LBRACKET):
                self.advance()
                idx = self.expr()
                self.expect(K.RBRACKET)
                e = A.ArrayIndex(e, idx, span=self.join(e.span, self.prev_span()))
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.tok
        k = t.kind
        if k is K.IDENT:
            self.advance()
            if self.at(K.LPAREN):
                args = self.args()
                return A.MethodCall(None, t.text, args, span=self.join(t.span, self.prev_span()),
                                    name_span=t.span)
            return A.Name(t.text, span=t.span)
        if k is K.KEYWORD:
            w = t.text
            if w == "null":
                self.advance()
                return A.NullLit(span=t.span)
            if w == "this":
                self.advance()
                return A.This(span=t.span)
            if w in ("true", "false"):
                self.advance()
                return A.BoolLit(w == "true", span=t.span)
            if w == "new":
                self.advance()
                ty = self.type_use()
                if self.at(K.LBRACKET):
                    self.advance()
                    size = self.expr()
                    self.expect(K.RBRACKET)
                    return A.NewArray(ty, size, span=self.join(t.span, self.prev_span()))
                args = self.args()
                return A.New(ty, args, span=self.join(t.span, self.prev_span()))
        if k is K.INT:
            self.advance()
            return A.IntLit(int(t.text), span=t.span)
        if k is K.STRING:
            self.advance()
            return A.StringLit(unquote(t.text), span=t.span)
        if k is K.LPAREN:
            self.advance()
            e = self.expr()
            self.expect(K.RPAREN)
            return e
        self.fail("expression")


def parse(tokens: list[Token], path: str = "<input>") -> ParseResult:
    p = Parser(tokens, path)
    f = p.parse_file()
    return ParseResult(f, p.errors)


def parse_source(text: str, path: str = "<input>") -> ParseResult:
    """Lex and parse ``text``; lexical errors are reported like syntax errors."""
    try:
        tokens = lex(text)
    except LexError as e:
        return ParseResult(None, [SyntaxIssue(e.message, e.span)])
    return parse(tokens, path)
