"""Per-expression checks: no nullable dereference, no nullable flow into a non-null slot."""

from __future__ import annotations

from typing import Iterable, Optional

from .boundary import OVERRIDE_SUPER, Boundary
from .dataflow import cfg as C
from .dataflow.analysis import DataflowEngine, DataflowResult
from .dataflow.paths import NullnessStore
from .diagnostics import Code, Diagnostic
from .frontend import ast as A
from .semantics.nullness import Nullness
from .semantics.override import check_override
from .semantics.program import (
    ARRAY_LENGTH, ClassFacts, DeclaredSignature, FieldInfo, LambdaInfo, MethodInfo, ProgramTable,
)

NONNULL = Nullness.NONNULL

SUPPRESS_KEY = "NullAway"


def _may_be_null(n: Optional[Nullness]) -> bool:
    return n is Nullness.NULL or n is Nullness.NULLABLE


def _describe(e: A.Expr) -> str:
    from .frontend.printer import expr

    try:
        text = expr(e)
    except TypeError:
        return "expression"
    return text if len(text) <= 40 else text[:37] + "..."


def receiver_of(e: A.Expr) -> Optional[A.Expr]:
    """The dereferenced receiver of a member access, if any."""
    if isinstance(e, A.FieldAccess):
        if isinstance(e.ref, FieldInfo) and e.ref.static:
            return None
        if e.target.type is None:  # class or package reference
            return None
        return e.target
    if isinstance(e, A.MethodCall):
        if e.target is None or e.target.type is None:
            return None
        if isinstance(e.ref, MethodInfo) and e.ref.static:
            return None
        return e.target
    if isinstance(e, A.ArrayIndex):
        return e.array
    return None


class BodyChecker:
    """Walks dataflow results and reports nullness violations."""

    def __init__(self, engine: DataflowEngine):
        self.engine = engine
        self.boundary: Boundary = engine.boundary

    def check_result(self, res: DataflowResult, file: str, scope: tuple,
                     skip_receivers: frozenset = frozenset()) -> list[Diagnostic]:
        out: list[Diagnostic] = []
        if res.aborted:
            out.append(Diagnostic(Code.INTERNAL, file, _span_of(res), "dataflow iteration bound exceeded; "
                                  "method treated as unchecked", scope=scope))
            return out
        for n in res.cfg.nodes:
            st = res.before[n.id]
            if st is None:
                continue
            node_scope = scope
            if n.kind == C.ASSIGN and isinstance(n.target, FieldInfo):
                node_scope = (res.cls.decl, n.target.decl)
            self._node(n, st, res, file, node_scope, skip_receivers, out)
        for lam, sub in res.lambdas:
            out += self.check_result(sub, file, scope, skip_receivers)
        return out

    def _node(self, n: C.Node, st: NullnessStore, res: DataflowResult, file: str, scope: tuple,
              skip: frozenset, out: list[Diagnostic]) -> None:
        engine, defaults = self.engine, res.defaults
        for e in _checked_exprs(n):
            recv = receiver_of(e)
            if recv is not None and (recv.span.start, recv.span.end) not in skip:
                if _may_be_null(engine.nullness(recv, st, defaults)):
                    if isinstance(e, A.ArrayIndex):
                        span, what = e.span, "array element access"
                    elif e.ref == ARRAY_LENGTH:
                        span, what = e.name_span, "length"
                    else:
                        span, what = e.name_span, e.name
                    out.append(Diagnostic(
                        Code.DEREF_NULLABLE, file, span,
                        f"dereferencing {_describe(recv)} to access {what}, but it may be null",
                        scope=scope))
            if isinstance(e, (A.MethodCall, A.New)) and isinstance(e.ref, MethodInfo):
                m = e.ref
                for i, arg in enumerate(e.args[: len(m.params)]):
                    slot = self.boundary.param_nullness(m, i)
                    if slot is NONNULL and _may_be_null(engine.nullness(arg, st, defaults)):
                        out.append(Diagnostic(
                            Code.PARAM_NULLABLE, file, arg.span,
                            f"passing possibly-null {_describe(arg)} as @NonNull parameter "
                            f"{m.params[i].name} of {_callee_name(m)}",
                            scope=scope))
        if n.kind == C.ASSIGN:
            f = n.target if isinstance(n.target, FieldInfo) else getattr(n.target, "ref", None)
            if isinstance(f, FieldInfo) and self.boundary.field_write(f).nullness is NONNULL:
                if _may_be_null(engine.nullness(n.expr, st, defaults)):
                    out.append(Diagnostic(
                        Code.ASSIGN_NULLABLE, file, n.expr.span,
                        f"assigning possibly-null {_describe(n.expr)} to @NonNull field {f.name}",
                        scope=scope))
        elif n.kind == C.RETURN and n.expr is not None:
            if res.return_nullness is NONNULL and _may_be_null(engine.nullness(n.expr, st, defaults)):
                where = "lambda" if isinstance(res.owner, LambdaInfo) else f"method {res.owner.name}"
                out.append(Diagnostic(
                    Code.RETURN_NULLABLE, file, n.expr.span,
                    f"returning possibly-null {_describe(n.expr)} from {where} with @NonNull return",
                    scope=scope))


def _checked_exprs(n: C.Node) -> tuple[A.Expr, ...]:
    """Expressions evaluated at ``n`` plus a written field access or array element."""
    t = n.target
    if n.kind == C.ASSIGN and isinstance(t, (A.FieldAccess, A.ArrayIndex)):
        return (t,) + C.node_exprs(n)
    return C.node_exprs(n)


def _callee_name(m: MethodInfo) -> str:
    return f"constructor {m.owner.name}" if m.kind == "ctor" else f"{m.owner.name}.{m.name}"


def _span_of(res: DataflowResult):
    owner = res.owner
    if isinstance(owner, MethodInfo):
        return owner.span
    if isinstance(owner, ClassFacts):
        return owner.decl.name_span
    return res.lambda_node.span if res.lambda_node is not None else res.cls.decl.name_span


def method_scope(m: MethodInfo) -> tuple:
    return (m.owner.decl, m.decl) if m.decl is not None else (m.owner.decl,)


def check_overrides(cls: ClassFacts, boundary: Boundary) -> list[Diagnostic]:
    out = []
    for m in cls.all_methods():
        sup = m.overrides
        if sup is None:
            continue
        sub_sig = m.signature()
        sup_sig = DeclaredSignature(
            sup.owner.qname, sup.name,
            tuple(boundary.param_nullness(sup, i, OVERRIDE_SUPER) for i in range(len(sup.params))),
            boundary.return_nullness(sup, OVERRIDE_SUPER) if sup.ret is not None else None,
            tuple(boundary.param(sup, i, OVERRIDE_SUPER).provenance for i in range(len(sup.params)))
            + (boundary.ret(sup, OVERRIDE_SUPER).provenance,),
        )
        out += check_override(sub_sig, sup_sig, m)
    return out


def check_class_bodies(cls: ClassFacts, engine: DataflowEngine,
                       skip_receivers: frozenset = frozenset()) -> list[Diagnostic]:
    """Body checks for every procedure and field initializer of an annotated class."""
    checker = BodyChecker(engine)
    file = cls.file.path
    out: list[Diagnostic] = []
    for static in (True, False):
        if any(f.static == static and f.declarator.init is not None for f in cls.fields.values()):
            res = engine.field_init_result(cls, static)
            out += checker.check_result(res, file, (cls.decl,), skip_receivers)
    for m in cls.procedures():
        out += checker.check_result(engine.result_for(m), file, method_scope(m), skip_receivers)
    return out


# -- suppression ---------------------------------------------------------------


def _suppression_args(decl: object) -> Iterable[A.Annotation]:
    for a in getattr(decl, "annotations", ()) or ():
        if a.name == "SuppressWarnings":
            yield a


def apply_suppressions(diags: list[Diagnostic], table: Optional[ProgramTable] = None,
                       warnings: Optional[list[str]] = None) -> list[Diagnostic]:
    """Mark diagnostics inside ``@SuppressWarnings("NullAway")`` scopes as suppressed.

    With ``table`` and ``warnings`` given, every suppression with another key
    is reported as a warning; such annotations suppress nothing.
    """
    for d in diags:
        if d.suppressed:
            continue
        if any(a.arg == SUPPRESS_KEY for decl in d.scope for a in _suppression_args(decl)):
            d.suppressed = True
            d.suppression_reason = "annotation"
    if table is not None and warnings is not None:
        for cls in table.sorted_classes():
            decls = [cls.decl, *cls.decl.fields, *cls.decl.constructors, *cls.decl.methods]
            for decl in decls:
                for a in _suppression_args(decl):
                    if a.arg != SUPPRESS_KEY:
                        warnings.append(f"{cls.file.path}:{a.span.line}:{a.span.col}: "
                                        f"unknown suppression key {a.arg!r} ignored")
    return diags
