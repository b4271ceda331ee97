"""Symbol tables, class hierarchy, and name/type resolution.

``build_program`` turns parsed files into a ``ProgramTable``: one
``ClassFacts`` per class, declaration-level nullness under the
non-null-except-locals default, override links, and resolution info attached
to every expression (``expr.type`` and ``expr.ref``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from ..diagnostics import Code, Diagnostic
from ..frontend import ast as A
from ..frontend.lexer import Span
from .nullness import Nullness

STD_PACKAGE = "std"
OBJECT = "std.Object"
STRING = "std.String"
PRIMITIVES = frozenset({"int", "boolean"})


@dataclass(frozen=True, slots=True)
class TypeRef:
    name: str
    args: tuple["TypeRef", ...] = ()
    dims: int = 0
    var: bool = False

    @property
    def is_primitive(self) -> bool:
        return self.dims == 0 and self.name in PRIMITIVES

    @property
    def is_reference(self) -> bool:
        return not self.is_primitive and self.name != "void"

    @property
    def is_array(self) -> bool:
        return self.dims > 0

    def element(self) -> TypeRef:
        return TypeRef(self.name, self.args, self.dims - 1, self.var)

    def __str__(self) -> str:
        s = self.name
        if self.args:
            s += "<" + ", ".join(str(a) for a in self.args) + ">"
        return s + "[]" * self.dims


INT = TypeRef("int")
BOOLEAN = TypeRef("boolean")
NULL_TYPE = TypeRef("null")
OBJECT_T = TypeRef(OBJECT)
STRING_T = TypeRef(STRING)


@dataclass(eq=False)
class LocalVar:
    name: str
    type: TypeRef
    is_param: bool = False
    span: Optional[Span] = None

    def __repr__(self) -> str:
        return f"LocalVar({self.name})"


@dataclass(eq=False)
class PackageRef:
    name: str


ARRAY_LENGTH = "length"


@dataclass(frozen=True)
class DeclaredSignature:
    owner: str
    name: str
    param_nullness: tuple[Optional[Nullness], ...]
    return_nullness: Optional[Nullness]  # None for void / primitive
    origin: tuple[str, ...]  # per param, then return: explicit | nnel-default | boundary-resolved


@dataclass(eq=False)
class FieldInfo:
    owner: "ClassFacts"
    name: str
    decl: A.FieldDecl
    declarator: A.Declarator
    type: TypeRef
    static: bool
    nullness: Optional[Nullness] = None
    origin: Optional[str] = None

    @property
    def qname(self) -> str:
        return f"{self.owner.qname}.{self.name}"

    @property
    def annotations(self) -> list[A.Annotation]:
        return self.decl.annotations

    @property
    def span(self) -> Span:
        return self.declarator.span

    def __repr__(self) -> str:
        return f"FieldInfo({self.qname})"


@dataclass(eq=False)
class ParamInfo:
    name: str
    type: TypeRef
    annotations: list[A.Annotation]
    span: Optional[Span]
    nullness: Optional[Nullness] = None
    origin: Optional[str] = None


@dataclass(eq=False)
class MethodInfo:
    """A procedure: method, constructor, or (static) initializer block."""

    owner: "ClassFacts"
    name: str
    kind: str  # method | ctor | init | static_init
    params: list[ParamInfo]
    ret: Optional[TypeRef]
    body: Optional[A.Block]
    decl: Optional[A.MethodDecl] = None
    static: bool = False
    private: bool = False
    final: bool = False
    abstract: bool = False
    native: bool = False
    ret_nullness: Optional[Nullness] = None
    ret_origin: Optional[str] = None
    overrides: Optional["MethodInfo"] = None
    index: int = 0
    # LocalVar bound to each parameter by the resolver
    param_vars: list[LocalVar] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.owner.qname, self.name, len(self.params))

    @property
    def qname(self) -> str:
        return f"{self.owner.qname}.{self.name}"

    @property
    def annotations(self) -> list[A.Annotation]:
        return self.decl.annotations if self.decl is not None else []

    @property
    def span(self) -> Span:
        if self.decl is not None:
            return self.decl.name_span
        return self.body.span

    @property
    def is_initializer(self) -> bool:
        return self.kind == "method" and A.annotation(self.annotations, "Initializer") is not None

    def signature(self) -> DeclaredSignature:
        return DeclaredSignature(
            self.owner.qname,
            self.name,
            tuple(p.nullness for p in self.params),
            self.ret_nullness,
            tuple(p.origin or "-" for p in self.params) + (self.ret_origin or "-",),
        )

    def __repr__(self) -> str:
        return f"MethodInfo({self.qname}/{len(self.params)})"


@dataclass(eq=False)
class LambdaInfo:
    params: list[LocalVar]
    iface_method: MethodInfo
    target: TypeRef
    ret: Optional[TypeRef]


@dataclass(eq=False)
class ClassFacts:
    qname: str
    decl: A.ClassDecl
    file: A.SourceFile
    package: str
    super: Optional["ClassFacts"] = None
    super_type: Optional[TypeRef] = None
    fields: dict[str, FieldInfo] = field(default_factory=dict)
    methods: dict[str, list[MethodInfo]] = field(default_factory=dict)
    ctors: list[MethodInfo] = field(default_factory=list)
    init_blocks: list[MethodInfo] = field(default_factory=list)
    static_init_blocks: list[MethodInfo] = field(default_factory=list)
    overrides: dict[MethodInfo, MethodInfo] = field(default_factory=dict)
    annotated: bool = True
    partition: str = "annotated"

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def is_interface(self) -> bool:
        return self.decl.kind == "interface"

    @property
    def type_params(self) -> list[str]:
        return self.decl.type_params

    @property
    def annotations(self) -> list[A.Annotation]:
        return self.decl.annotations

    @property
    def nonnull_fields(self) -> list[FieldInfo]:
        return [f for f in self.fields.values() if f.nullness is Nullness.NONNULL]

    @property
    def initializer_methods(self) -> list[MethodInfo]:
        return [m for ms in self.methods.values() for m in ms if m.is_initializer]

    def all_methods(self) -> list[MethodInfo]:
        return [m for ms in self.methods.values() for m in ms]

    def procedures(self) -> list[MethodInfo]:
        """Every body-carrying procedure, in a stable order."""
        out = [*self.static_init_blocks, *self.init_blocks, *self.ctors, *self.all_methods()]
        return [m for m in out if m.body is not None]

    def __repr__(self) -> str:
        return f"ClassFacts({self.qname})"


class ProgramTable:
    def __init__(self, files: list[A.SourceFile]):
        self.files = files
        self.classes: dict[str, ClassFacts] = {}
        self.packages: set[str] = set()
        self.diagnostics: list[Diagnostic] = []

    # -- lookups -------------------------------------------------------------

    def error(self, cls: Optional[ClassFacts], span: Span, message: str,
              code: Code = Code.RESOLUTION, scope: tuple = (), file: Optional[str] = None) -> None:
        path = file if file is not None else (cls.file.path if cls else "<program>")
        if cls is not None and not scope:
            scope = (cls.decl,)
        self.diagnostics.append(Diagnostic(code, path, span, message, scope=scope))

    def lookup_class(self, name: str, package: str) -> Optional[ClassFacts]:
        if "." in name:
            return self.classes.get(name)
        c = self.classes.get(f"{package}.{name}")
        if c is None:
            c = self.classes.get(f"{STD_PACKAGE}.{name}")
        return c

    def is_package(self, name: str) -> bool:
        return name in self.packages

    def ancestors(self, cls: ClassFacts) -> Iterable[ClassFacts]:
        seen = set()
        c: Optional[ClassFacts] = cls
        while c is not None and id(c) not in seen:
            seen.add(id(c))
            yield c
            c = c.super

    def find_field(self, cls: ClassFacts, name: str) -> Optional[FieldInfo]:
        for c in self.ancestors(cls):
            f = c.fields.get(name)
            if f is not None:
                return f
        return None

    def find_method(self, cls: ClassFacts, name: str, arity: int) -> Optional[MethodInfo]:
        for c in self.ancestors(cls):
            for m in c.methods.get(name, ()):
                if len(m.params) == arity:
                    return m
        return None

    def is_subclass(self, sub: ClassFacts, sup: ClassFacts) -> bool:
        return any(c is sup for c in self.ancestors(sub))

    def functional_method(self, iface: ClassFacts) -> Optional[MethodInfo]:
        if not iface.is_interface:
            return None
        found: dict[tuple[str, int], MethodInfo] = {}
        for c in self.ancestors(iface):
            if c.qname == OBJECT:
                break
            for m in c.all_methods():
                if m.abstract and not m.static:
                    found.setdefault((m.name, len(m.params)), m)
        return next(iter(found.values())) if len(found) == 1 else None

    def member_env(self, recv: TypeRef, owner: ClassFacts) -> dict[str, TypeRef]:
        """Type-variable bindings for members of ``owner`` seen through ``recv``."""
        cls = self.classes.get(recv.name)
        if cls is None or recv.dims:
            return {}
        env = dict(zip(cls.type_params, recv.args)) if len(recv.args) == len(cls.type_params) else {}
        guard = 0
        while cls is not owner and cls.super is not None and guard < 64:
            st = cls.super_type
            cls = cls.super
            guard += 1
            if st is None:
                env = {}
                continue
            st = subst(st, env)
            env = dict(zip(cls.type_params, st.args)) if len(st.args) == len(cls.type_params) else {}
        return env

    def procedures(self) -> list[MethodInfo]:
        return [m for c in self.sorted_classes() for m in c.procedures()]

    def sorted_classes(self) -> list[ClassFacts]:
        return [self.classes[k] for k in sorted(self.classes)]


def subst(t: TypeRef, env: dict[str, TypeRef]) -> TypeRef:
    if t.var:
        b = env.get(t.name, OBJECT_T)
        return TypeRef(b.name, b.args, b.dims + t.dims, b.var) if t.dims else b
    if not t.args:
        return t
    return TypeRef(t.name, tuple(subst(a, env) for a in t.args), t.dims)


# -- declaration nullness ------------------------------------------------------


def effective_nullability(
    annotations: list[A.Annotation], type_: Optional[TypeRef]
) -> tuple[Optional[Nullness], Optional[str], bool]:
    """Nullness of a field/param/return site under the non-null default.

    Returns ``(nullness, origin, conflicting)``. Primitive and void sites have
    no nullness. Annotations on generic type arguments never reach here.
    """
    if type_ is None or not type_.is_reference:
        return None, None, False
    nullable = nonnull = False
    for a in annotations:
        if a.name == "Nullable":
            nullable = True
        elif a.name == "NonNull":
            nonnull = True
    if nullable and nonnull:
        return Nullness.NULLABLE, "explicit", True
    if nullable:
        return Nullness.NULLABLE, "explicit", False
    if nonnull:
        return Nullness.NONNULL, "explicit", False
    return Nullness.NONNULL, "nnel-default", False


_ANNOT_ARGS = {"Contract": True, "SuppressWarnings": True}


# -- construction --------------------------------------------------------------


def build_program(files: list[A.SourceFile]) -> ProgramTable:
    """Build the class table, resolve hierarchy and names, and assign declared nullness."""
    table = ProgramTable(files)
    _declare_classes(table)
    _link_hierarchy(table)
    for cls in table.sorted_classes():
        _declare_members(table, cls)
    for cls in table.sorted_classes():
        _link_overrides(table, cls)
    Resolver(table).run()
    return table


def _declare_classes(table: ProgramTable) -> None:
    for f in table.files:
        parts = f.package_name.split(".")
        for i in range(1, len(parts) + 1):
            table.packages.add(".".join(parts[:i]))
        for decl in f.declarations:
            qname = f"{f.package_name}.{decl.name}"
            if qname in table.classes:
                table.diagnostics.append(
                    Diagnostic(Code.RESOLUTION, f.path, decl.name_span,
                               f"duplicate class {qname}", scope=(decl,))
                )
                continue
            table.classes[qname] = ClassFacts(qname, decl, f, f.package_name)


def _link_hierarchy(table: ProgramTable) -> None:
    obj = table.classes.get(OBJECT)
    for cls in table.sorted_classes():
        decl = cls.decl
        if decl.super_type is not None:
            sup = table.lookup_class(decl.super_type.name, cls.package)
            if sup is None:
                table.error(cls, decl.super_type.span, f"unknown superclass {decl.super_type.name}")
                cls.super = obj
            else:
                cls.super = sup
                cls.super_type = _type_from_use(table, cls, decl.super_type, report=True)
        elif cls is not obj:
            cls.super = obj
        if decl.kind == "interface" and (decl.fields or decl.constructors or decl.init_blocks
                                         or decl.static_init_blocks):
            table.error(cls, decl.name_span,
                        f"interface {cls.qname} may not declare fields, constructors or init blocks")
        for a in decl.annotations:
            _check_annotation(table, cls, a)
    # cycle detection
    for cls in table.sorted_classes():
        seen: list[ClassFacts] = []
        c: Optional[ClassFacts] = cls
        while c is not None:
            if c in seen:
                table.error(cls, cls.decl.name_span, f"inheritance cycle involving {cls.qname}")
                cls.super = obj if cls is not obj else None
                break
            seen.append(c)
            c = c.super


def _check_annotation(table: ProgramTable, cls: ClassFacts, a: A.Annotation) -> None:
    if a.name not in A.ANNOTATION_NAMES:
        table.error(cls, a.span, f"unknown annotation @{a.name}")
    elif _ANNOT_ARGS.get(a.name):
        if not a.arg and a.name == "Contract":
            table.error(cls, a.span, "@Contract requires a non-empty string argument")
        elif a.arg is None:
            table.error(cls, a.span, f"@{a.name} requires a string argument")
    elif a.arg is not None:
        table.error(cls, a.span, f"@{a.name} takes no argument")


def _type_from_use(table: ProgramTable, cls: Optional[ClassFacts], tu: A.TypeUse,
                   report: bool = True, tvars: Iterable[str] = ()) -> TypeRef:
    if tu.name in PRIMITIVES:
        return TypeRef(tu.name, (), tu.dims)
    for a in tu.args:
        for ann in a.annotations:
            ann.ignored = True
    args = tuple(_type_from_use(table, cls, a, report, tvars) for a in tu.args)
    if cls is not None and (tu.name in cls.type_params or tu.name in tvars):
        return TypeRef(tu.name, (), tu.dims, var=True)
    target = table.lookup_class(tu.name, cls.package if cls else STD_PACKAGE)
    if target is None:
        if report and cls is not None:
            table.error(cls, tu.span, f"unknown type {tu.name}")
        return TypeRef(OBJECT, (), tu.dims)
    return TypeRef(target.qname, args, tu.dims)


def _declare_members(table: ProgramTable, cls: ClassFacts) -> None:
    decl = cls.decl
    is_iface = decl.kind == "interface"
    for fd in decl.fields:
        t = _type_from_use(table, cls, fd.type)
        static = "static" in fd.modifiers
        scope = (decl, fd)
        for a in fd.annotations:
            _check_annotation(table, cls, a)
        n, origin, conflict = effective_nullability(fd.annotations, t)
        if conflict:
            table.error(cls, fd.span, "both @Nullable and @NonNull on one field",
                        Code.CONFLICTING_ANNOT, scope)
        for d in fd.declarators:
            if d.name in cls.fields:
                table.error(cls, d.span, f"duplicate field {d.name}", scope=scope)
                continue
            cls.fields[d.name] = FieldInfo(cls, d.name, fd, d, t, static, n, origin)
    for i, md in enumerate(decl.constructors):
        m = _method_info(table, cls, md, "ctor")
        m.index = i
        cls.ctors.append(m)
    for md in decl.methods:
        m = _method_info(table, cls, md, "method")
        if is_iface and md.body is None:
            m.abstract = True
        if md.body is None and not (m.abstract or m.native):
            table.error(cls, md.name_span, f"method {md.name} needs a body")
        if md.body is not None and (m.abstract or m.native):
            table.error(cls, md.name_span, f"abstract/native method {md.name} may not have a body")
        bucket = cls.methods.setdefault(md.name, [])
        if any(len(x.params) == len(m.params) for x in bucket):
            table.error(cls, md.name_span, f"duplicate method {md.name}/{len(m.params)}")
            continue
        bucket.append(m)
    for i, b in enumerate(decl.init_blocks):
        cls.init_blocks.append(MethodInfo(cls, f"<init#{i}>", "init", [], None, b, index=i))
    for i, b in enumerate(decl.static_init_blocks):
        cls.static_init_blocks.append(
            MethodInfo(cls, f"<clinit#{i}>", "static_init", [], None, b, static=True, index=i)
        )


def _method_info(table: ProgramTable, cls: ClassFacts, md: A.MethodDecl, kind: str) -> MethodInfo:
    scope = (cls.decl, md)
    for a in md.annotations:
        _check_annotation(table, cls, a)
    params: list[ParamInfo] = []
    names: set[str] = set()
    for p in md.params:
        if p.name in names:
            table.error(cls, p.span, f"duplicate parameter {p.name}", scope=scope)
        names.add(p.name)
        for a in p.annotations:
            _check_annotation(table, cls, a)
        t = _type_from_use(table, cls, p.type)
        n, origin, conflict = effective_nullability(p.annotations + p.type.annotations, t)
        if conflict:
            table.error(cls, p.span, f"both @Nullable and @NonNull on parameter {p.name}",
                        Code.CONFLICTING_ANNOT, scope)
        params.append(ParamInfo(p.name, t, p.annotations + p.type.annotations, p.span, n, origin))
    ret = None
    if md.return_type is not None:
        ret = _type_from_use(table, cls, md.return_type)
    m = MethodInfo(
        cls, md.name, kind, params, ret, md.body, md,
        static="static" in md.modifiers,
        private="private" in md.modifiers,
        final="final" in md.modifiers,
        abstract="abstract" in md.modifiers,
        native="native" in md.modifiers,
    )
    ret_annots = md.annotations + (md.return_type.annotations if md.return_type else [])
    n, origin, conflict = effective_nullability(ret_annots, ret)
    if conflict:
        table.error(cls, md.name_span, f"both @Nullable and @NonNull on {md.name}",
                    Code.CONFLICTING_ANNOT, scope)
    m.ret_nullness, m.ret_origin = n, origin
    return m


def _link_overrides(table: ProgramTable, cls: ClassFacts) -> None:
    if cls.super is None:
        return
    for m in cls.all_methods():
        if m.static:
            continue
        sup = table.find_method(cls.super, m.name, len(m.params))
        if sup is not None and not sup.static and not sup.private:
            m.overrides = sup
            cls.overrides[m] = sup


# -- resolution ----------------------------------------------------------------

Ref = Union[LocalVar, FieldInfo, ClassFacts, PackageRef, MethodInfo, LambdaInfo, str, None]


class Resolver:
    """Attach types and declaration references to every expression."""

    def __init__(self, table: ProgramTable):
        self.table = table
        self.cls: Optional[ClassFacts] = None
        self.static = False
        self.scopes: list[dict[str, LocalVar]] = []
        self.returns: list[Optional[TypeRef]] = []
        self.scope_decl: tuple = ()

    def err(self, span: Span, msg: str) -> None:
        self.table.error(self.cls, span, msg, scope=self.scope_decl)

    def run(self) -> None:
        for cls in self.table.sorted_classes():
            self.cls = cls
            for f in cls.fields.values():
                if f.declarator.init is not None:
                    self.static = f.static
                    self.scope_decl = (cls.decl, f.decl)
                    self.scopes = [{}]
                    self.returns = [None]
                    self.expr(f.declarator.init, f.type)
            for m in cls.procedures():
                self.procedure(m)

    def procedure(self, m: MethodInfo) -> None:
        self.static = m.static
        self.scope_decl = (m.owner.decl, m.decl) if m.decl is not None else (m.owner.decl,)
        m.param_vars = [LocalVar(p.name, p.type, True, p.span) for p in m.params]
        self.scopes = [{v.name: v for v in m.param_vars}]
        self.returns = [m.ret]
        self.block(m.body)

    def declare(self, var: LocalVar) -> None:
        self.scopes[-1][var.name] = var

    def lookup_local(self, name: str) -> Optional[LocalVar]:
        for s in reversed(self.scopes):
            v = s.get(name)
            if v is not None:
                return v
        return None

    def type_of(self, tu: A.TypeUse) -> TypeRef:
        return _type_from_use(self.table, self.cls, tu)

    # -- statements ----------------------------------------------------------

    def block(self, b: A.Block) -> None:
        self.scopes.append({})
        for s in b.stmts:
            self.stmt(s)
        self.scopes.pop()

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Block):
            self.block(s)
        elif isinstance(s, A.LocalDecl):
            t = self.type_of(s.type)
            if s.init is not None:
                self.expr(s.init, t)
            var = LocalVar(s.name, t, False, s.name_span)
            s.ref = var
            self.declare(var)
        elif isinstance(s, A.Assign):
            tt = self.expr(s.target, None)
            tgt = s.target
            if isinstance(tgt, (A.Name, A.FieldAccess)) and not isinstance(tgt.ref, (LocalVar, FieldInfo)):
                self.err(tgt.span, "invalid assignment target")
            self.expr(s.value, tt)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr, None)
        elif isinstance(s, A.If):
            self.expr(s.cond, BOOLEAN)
            self.scoped(s.then)
            if s.other is not None:
                self.scoped(s.other)
        elif isinstance(s, A.While):
            self.expr(s.cond, BOOLEAN)
            self.scoped(s.body)
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value, self.returns[-1])
        elif isinstance(s, A.Throw):
            self.expr(s.value, None)

    def scoped(self, s: A.Stmt) -> None:
        self.scopes.append({})
        self.stmt(s)
        self.scopes.pop()

    # -- expressions ---------------------------------------------------------

    def expr(self, e: A.Expr, expected: Optional[TypeRef], allow_static: bool = False) -> Optional[TypeRef]:
        t = self._expr(e, expected, allow_static)
        e.type = t
        return t

    def _expr(self, e: A.Expr, expected: Optional[TypeRef], allow_static: bool) -> Optional[TypeRef]:
        if isinstance(e, A.Name):
            return self.name(e, allow_static)
        if isinstance(e, A.FieldAccess):
            return self.field_access(e, allow_static)
        if isinstance(e, A.MethodCall):
            return self.call(e)
        if isinstance(e, A.NullLit):
            return NULL_TYPE
        if isinstance(e, A.This):
            if self.static:
                self.err(e.span, "'this' in static context")
            return TypeRef(self.cls.qname, tuple(TypeRef(v, var=True) for v in self.cls.type_params))
        if isinstance(e, A.StringLit):
            return STRING_T
        if isinstance(e, A.IntLit):
            return INT
        if isinstance(e, A.BoolLit):
            return BOOLEAN
        if isinstance(e, A.New):
            return self.new(e)
        if isinstance(e, A.NewArray):
            self.expr(e.size, INT)
            t = self.type_of(e.elem)
            return TypeRef(t.name, t.args, t.dims + 1, t.var)
        if isinstance(e, A.ArrayIndex):
            at = self.expr(e.array, None)
            self.expr(e.index, INT)
            if at is None or not at.is_array:
                self.err(e.span, "indexing a non-array value")
                return OBJECT_T
            return at.element()
        if isinstance(e, A.Lambda):
            return self.lambda_(e, expected)
        if isinstance(e, A.Conditional):
            self.expr(e.cond, BOOLEAN)
            a = self.expr(e.then, expected)
            b = self.expr(e.other, expected)
            if a is None or a == NULL_TYPE:
                return b if b is not None else OBJECT_T
            return a
        if isinstance(e, A.Binary):
            self.expr(e.left, None)
            self.expr(e.right, None)
            return INT if e.op in ("+", "-", "*") else BOOLEAN
        if isinstance(e, A.Unary):
            self.expr(e.operand, None)
            return BOOLEAN if e.op == "!" else INT
        raise TypeError(type(e).__name__)

    def name(self, e: A.Name, allow_static: bool) -> Optional[TypeRef]:
        var = self.lookup_local(e.id)
        if var is not None:
            e.ref = var
            return var.type
        f = self.table.find_field(self.cls, e.id)
        if f is not None:
            if not f.static and self.static:
                self.err(e.span, f"instance field {e.id} referenced from static context")
            e.ref = f
            this_t = TypeRef(self.cls.qname, tuple(TypeRef(v, var=True) for v in self.cls.type_params))
            return subst(f.type, self.table.member_env(this_t, f.owner)) if f.owner is not self.cls else f.type
        if allow_static:
            c = self.table.lookup_class(e.id, self.cls.package)
            if c is not None:
                e.ref = c
                return None
            if self.table.is_package(e.id):
                e.ref = PackageRef(e.id)
                return None
        self.err(e.span, f"cannot resolve name {e.id}")
        return OBJECT_T

    def field_access(self, e: A.FieldAccess, allow_static: bool) -> Optional[TypeRef]:
        tt = self.expr(e.target, None, allow_static=True)
        tref = e.target.ref
        if tt is None and isinstance(tref, PackageRef):
            qn = f"{tref.name}.{e.name}"
            c = self.table.classes.get(qn)
            if c is not None and allow_static:
                e.ref = c
                return None
            if self.table.is_package(qn) and allow_static:
                e.ref = PackageRef(qn)
                return None
            self.err(e.name_span, f"cannot resolve {qn}")
            return OBJECT_T
        if tt is None and isinstance(tref, ClassFacts):
            f = self.table.find_field(tref, e.name)
            if f is None or not f.static:
                self.err(e.name_span, f"no static field {e.name} in {tref.qname}")
                return OBJECT_T
            e.ref = f
            return f.type
        if tt is None:
            return OBJECT_T
        if tt.is_array:
            if e.name == ARRAY_LENGTH:
                e.ref = ARRAY_LENGTH
                return INT
            self.err(e.name_span, f"arrays have no field {e.name}")
            return OBJECT_T
        cls = self.table.classes.get(tt.name)
        f = self.table.find_field(cls, e.name) if cls is not None else None
        if f is None:
            self.err(e.name_span, f"no field {e.name} in {tt}")
            return OBJECT_T
        e.ref = f
        return subst(f.type, self.table.member_env(tt, f.owner))

    def call(self, e: A.MethodCall) -> Optional[TypeRef]:
        arity = len(e.args)
        env: dict[str, TypeRef] = {}
        m: Optional[MethodInfo] = None
        if e.target is None:
            m = self.table.find_method(self.cls, e.name, arity)
            if m is not None:
                if not m.static and self.static:
                    self.err(e.name_span, f"instance method {e.name} called from static context")
                this_t = TypeRef(self.cls.qname, tuple(TypeRef(v, var=True) for v in self.cls.type_params))
                env = self.table.member_env(this_t, m.owner)
        else:
            tt = self.expr(e.target, None, allow_static=True)
            tref = e.target.ref
            if tt is None and isinstance(tref, ClassFacts):
                m = self.table.find_method(tref, e.name, arity)
                if m is not None and not m.static:
                    self.err(e.name_span, f"{e.name} is not static")
            elif tt is not None:
                cls = self.table.classes.get(OBJECT if tt.is_array else tt.name)
                if cls is not None:
                    m = self.table.find_method(cls, e.name, arity)
                    env = self.table.member_env(tt, m.owner) if m is not None else {}
        if m is None:
            self.err(e.name_span, f"cannot resolve method {e.name}/{arity}")
            for a in e.args:
                self.expr(a, None)
            return OBJECT_T
        e.ref = m
        for a, p in zip(e.args, m.params):
            self.expr(a, subst(p.type, env))
        if m.ret is None:
            return TypeRef("void")
        return subst(m.ret, env)

    def new(self, e: A.New) -> TypeRef:
        t = self.type_of(e.cls)
        cls = self.table.classes.get(t.name)
        if cls is None or t.var:
            for a in e.args:
                self.expr(a, None)
            return t
        env = dict(zip(cls.type_params, t.args)) if len(t.args) == len(cls.type_params) else {}
        ctor = next((c for c in cls.ctors if len(c.params) == len(e.args)), None)
        if ctor is None and (cls.ctors or e.args):
            self.err(e.span, f"no constructor {cls.name}/{len(e.args)}")
        e.ref = ctor
        params = ctor.params if ctor is not None else []
        for i, a in enumerate(e.args):
            self.expr(a, subst(params[i].type, env) if i < len(params) else None)
        return t

    def lambda_(self, e: A.Lambda, expected: Optional[TypeRef]) -> TypeRef:
        iface = self.table.classes.get(expected.name) if expected is not None else None
        fm = self.table.functional_method(iface) if iface is not None else None
        if fm is None or len(fm.params) != len(e.params):
            what = "no target type" if expected is None else f"{expected} is not a matching functional interface"
            self.err(e.span, f"lambda has {what}")
            params = [LocalVar(p, OBJECT_T, True, e.span) for p in e.params]
            ret: Optional[TypeRef] = OBJECT_T
        else:
            env = self.table.member_env(expected, fm.owner)
            params = [LocalVar(p, subst(fp.type, env), True, e.span) for p, fp in zip(e.params, fm.params)]
            ret = subst(fm.ret, env) if fm.ret is not None else None
        if fm is not None:
            e.ref = LambdaInfo(params, fm, expected, ret)
        saved_static = self.static
        self.scopes.append({p.name: p for p in params})
        self.returns.append(ret)
        if isinstance(e.body, A.Block):
            self.block(e.body)
        else:
            self.expr(e.body, ret)
        self.returns.pop()
        self.scopes.pop()
        self.static = saved_static
        return expected if expected is not None else OBJECT_T
