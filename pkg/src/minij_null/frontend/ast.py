"""Syntax tree for MiniJ.

Spans and the resolution slots (``type``, ``ref``) are excluded from equality
so two trees compare equal iff they are structurally identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .lexer import Span

ANNOTATION_NAMES = frozenset(
    {"Nullable", "NonNull", "Initializer", "Contract", "Generated", "SuppressWarnings"}
)


def _span() -> Any:
    return field(default=None, compare=False, repr=False, kw_only=True)


def _slot() -> Any:
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(slots=True)
class Annotation:
    name: str
    arg: Optional[str] = None
    span: Span = _span()
    # set for annotations on generic type arguments, which carry no meaning
    ignored: bool = field(default=False, compare=False, repr=False, kw_only=True)


@dataclass(slots=True)
class TypeUse:
    name: str
    args: list[TypeUse] = field(default_factory=list)
    dims: int = 0
    annotations: list[Annotation] = field(default_factory=list)
    span: Span = _span()

    @property
    def is_primitive(self) -> bool:
        return self.dims == 0 and self.name in ("int", "boolean")


# -- expressions -------------------------------------------------------------


@dataclass(slots=True)
class Expr:
    span: Span = _span()
    type: Any = _slot()
    ref: Any = _slot()
    memo: Any = _slot()


@dataclass(slots=True)
class NullLit(Expr):
    pass


@dataclass(slots=True)
class BoolLit(Expr):
    value: bool = False


@dataclass(slots=True)
class IntLit(Expr):
    value: int = 0


@dataclass(slots=True)
class StringLit(Expr):
    value: str = ""


@dataclass(slots=True)
class Name(Expr):
    id: str = ""


@dataclass(slots=True)
class This(Expr):
    pass


@dataclass(slots=True)
class FieldAccess(Expr):
    target: Expr = None
    name: str = ""
    name_span: Span = _span()


@dataclass(slots=True)
class MethodCall(Expr):
    target: Optional[Expr] = None
    name: str = ""
    args: list[Expr] = field(default_factory=list)
    name_span: Span = _span()


@dataclass(slots=True)
class New(Expr):
    cls: TypeUse = None
    args: list[Expr] = field(default_factory=list)


@dataclass(slots=True)
class NewArray(Expr):
    elem: TypeUse = None
    size: Expr = None


@dataclass(slots=True)
class ArrayIndex(Expr):
    array: Expr = None
    index: Expr = None


@dataclass(slots=True)
class Lambda(Expr):
    params: list[str] = field(default_factory=list)
    body: Union[Expr, "Block"] = None


@dataclass(slots=True)
class Conditional(Expr):
    cond: Expr = None
    then: Expr = None
    other: Expr = None


@dataclass(slots=True)
class Binary(Expr):
    op: str = ""
    left: Expr = None
    right: Expr = None


@dataclass(slots=True)
class Unary(Expr):
    op: str = ""
    operand: Expr = None


# -- statements --------------------------------------------------------------


@dataclass(slots=True)
class Stmt:
    span: Span = _span()


@dataclass(slots=True)
class Block(Stmt):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass(slots=True)
class LocalDecl(Stmt):
    type: TypeUse = None
    name: str = ""
    init: Optional[Expr] = None
    annotations: list[Annotation] = field(default_factory=list)
    name_span: Span = _span()
    ref: Any = _slot()


@dataclass(slots=True)
class Assign(Stmt):
    target: Expr = None
    value: Expr = None


@dataclass(slots=True)
class ExprStmt(Stmt):
    expr: Expr = None


@dataclass(slots=True)
class If(Stmt):
    cond: Expr = None
    then: Stmt = None
    other: Optional[Stmt] = None


@dataclass(slots=True)
class While(Stmt):
    cond: Expr = None
    body: Stmt = None


@dataclass(slots=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(slots=True)
class Throw(Stmt):
    value: Expr = None


@dataclass(slots=True)
class Empty(Stmt):
    pass


# -- declarations ------------------------------------------------------------


@dataclass(slots=True)
class Param:
    name: str
    type: TypeUse
    annotations: list[Annotation] = field(default_factory=list)
    span: Span = _span()


@dataclass(slots=True)
class Declarator:
    name: str
    init: Optional[Expr] = None
    span: Span = _span()


@dataclass(slots=True)
class FieldDecl:
    type: TypeUse
    declarators: list[Declarator]
    modifiers: frozenset[str] = frozenset()
    annotations: list[Annotation] = field(default_factory=list)
    span: Span = _span()


@dataclass(slots=True)
class MethodDecl:
    name: str
    params: list[Param] = field(default_factory=list)
    return_type: Optional[TypeUse] = None  # None means void (or constructor)
    body: Optional[Block] = None
    modifiers: frozenset[str] = frozenset()
    annotations: list[Annotation] = field(default_factory=list)
    is_ctor: bool = False
    span: Span = _span()
    name_span: Span = _span()


@dataclass(slots=True)
class ClassDecl:
    name: str
    kind: str = "class"
    type_params: list[str] = field(default_factory=list)
    super_type: Optional[TypeUse] = None
    modifiers: frozenset[str] = frozenset()
    annotations: list[Annotation] = field(default_factory=list)
    fields: list[FieldDecl] = field(default_factory=list)
    constructors: list[MethodDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    init_blocks: list[Block] = field(default_factory=list)
    static_init_blocks: list[Block] = field(default_factory=list)
    span: Span = _span()
    name_span: Span = _span()


@dataclass(slots=True)
class SourceFile:
    path: str
    package_name: str
    declarations: list[ClassDecl] = field(default_factory=list)
    span: Span = _span()


def annotation(annotations: list[Annotation], name: str) -> Optional[Annotation]:
    for a in annotations:
        if a.name == name:
            return a
    return None
