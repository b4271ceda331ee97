"""Initialization checking for non-null fields.

A non-null field is accepted when it is initialized at its declaration, in an
initializer block, by every constructor, or by some ``@Initializer`` method.
Calls to private or final helpers made as top-level statements count as part
of the caller, one level deep. Two gaps are intentional: an early ``return``
before such a call does not disqualify it, and reads inside helpers are not
checked for use before initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataflow import cfg as C
from .dataflow.analysis import DataflowEngine, DataflowResult
from .dataflow.paths import CLASS_PREFIX, THIS, AccessPath
from .diagnostics import Code, Diagnostic
from .frontend import ast as A
from .semantics.program import ClassFacts, FieldInfo, MethodInfo


@dataclass
class InitFacts:
    cls: ClassFacts
    static: bool
    fields: list[FieldInfo]
    decl_initialized: set[str] = field(default_factory=set)
    directly_assigned: dict[int, frozenset[str]] = field(default_factory=dict)
    always_invoked: dict[int, list[tuple[MethodInfo, int]]] = field(default_factory=dict)

    def effective_initialized(self, m: MethodInfo) -> frozenset[str]:
        out = set(self.directly_assigned.get(id(m), frozenset()))
        for n, _ in self.always_invoked.get(id(m), ()):
            out |= self.directly_assigned.get(id(n), frozenset())
        return frozenset(out)


def compute_always_invoked(m: MethodInfo) -> list[tuple[MethodInfo, int]]:
    """Same-class private-or-final methods called as top-level statements of ``m``.

    Returns ``(callee, top-level statement index)`` pairs in body order.
    """
    out: list[tuple[MethodInfo, int]] = []
    if m.body is None:
        return out
    for i, s in enumerate(m.body.stmts):
        if not isinstance(s, A.ExprStmt) or not isinstance(s.expr, A.MethodCall):
            continue
        call = s.expr
        if call.target is not None and not isinstance(call.target, A.This):
            continue
        n = call.ref
        if not isinstance(n, MethodInfo) or n.owner is not m.owner or n.body is None:
            continue
        if not (n.private or n.final) or n.static != m.static:
            continue
        out.append((n, i))
    return out


def _root(cls: ClassFacts, static: bool) -> str:
    return CLASS_PREFIX + cls.qname if static else THIS


def _assigned_at_exit(res: DataflowResult, root: str, names: set[str]) -> frozenset[str]:
    exit_store = res.exit_store
    if exit_store is None:
        # no normal completion: every field counts as assigned
        return frozenset(names)
    return frozenset(p.links[0] for p in exit_store.definite if p.root == root and p.links[0] in names)


def initializers(cls: ClassFacts, static: bool) -> list[MethodInfo]:
    return [m for m in cls.initializer_methods if m.static == static and m.body is not None]


def compute_init_facts(cls: ClassFacts, engine: DataflowEngine, static: bool) -> InitFacts:
    fields_ = [f for f in cls.nonnull_fields if f.static == static and f.type.is_reference]
    facts = InitFacts(cls, static, fields_)
    if not fields_:
        return facts
    names = {f.name for f in fields_}
    root = _root(cls, static)
    facts.decl_initialized = {f.name for f in fields_ if f.declarator.init is not None}
    blocks = cls.static_init_blocks if static else cls.init_blocks
    for b in blocks:
        facts.decl_initialized |= _assigned_at_exit(engine.result_for(b), root, names)
    entry_points = initializers(cls, static) + ([] if static else cls.ctors)
    for m in entry_points:
        if m.body is None:
            continue
        facts.directly_assigned[id(m)] = _assigned_at_exit(engine.result_for(m), root, names)
        calls = compute_always_invoked(m)
        facts.always_invoked[id(m)] = calls
        for n, _ in calls:
            if id(n) not in facts.directly_assigned:
                facts.directly_assigned[id(n)] = _assigned_at_exit(engine.result_for(n), root, names)
    return facts


def check_field_initialization(cls: ClassFacts, facts: InitFacts) -> list[Diagnostic]:
    out = []
    ctors = [] if facts.static else [c for c in cls.ctors if c.body is not None]
    inits = initializers(cls, facts.static)
    for f in facts.fields:
        if f.name in facts.decl_initialized:
            continue
        if ctors and all(f.name in facts.effective_initialized(c) for c in ctors):
            continue
        if any(f.name in facts.effective_initialized(i) for i in inits):
            continue
        kind = "static field" if facts.static else "field"
        out.append(Diagnostic(
            Code.FIELD_NO_INIT, cls.file.path, f.span,
            f"@NonNull {kind} {f.name} is not initialized"
            + ("" if facts.static else " in every constructor or in an @Initializer method"),
            scope=(cls.decl, f.decl)))
    return out


def _field_reads(n: C.Node, cls: ClassFacts, names: set[str]):
    """Reads of ``this.f`` evaluated at ``n``, excluding assignment targets."""
    for e in C.node_exprs(n):
        if isinstance(e, A.Name) and isinstance(e.ref, FieldInfo):
            f = e.ref
            if not f.static and f.owner is cls and f.name in names:
                yield e, f, e.span
        elif isinstance(e, A.FieldAccess) and isinstance(e.target, A.This) and isinstance(e.ref, FieldInfo):
            f = e.ref
            if not f.static and f.owner is cls and f.name in names:
                yield e, f, e.name_span


def check_use_before_init(cls: ClassFacts, facts: InitFacts, engine: DataflowEngine
                          ) -> tuple[list[Diagnostic], set[tuple[int, int]]]:
    """USE_BEFORE_INIT diagnostics plus the spans of the offending reads."""
    out: list[Diagnostic] = []
    spans: set[tuple[int, int]] = set()
    if facts.static or not facts.fields:
        return out, spans
    names = {f.name for f in facts.fields}
    ctors = [c for c in cls.ctors if c.body is not None]
    inits = initializers(cls, False)
    ctor_guaranteed: frozenset[str] = frozenset()
    if ctors:
        ctor_guaranteed = frozenset.intersection(*(facts.effective_initialized(c) for c in ctors))
    bodies: list[tuple[MethodInfo, frozenset[str]]] = []
    for m in cls.init_blocks:
        bodies.append((m, frozenset()))
    for c in ctors:
        bodies.append((c, frozenset()))
    for i in inits:
        bodies.append((i, ctor_guaranteed))
    for m, at_entry in bodies:
        res = engine.result_for(m)
        if res.aborted:
            continue
        calls = facts.always_invoked.get(id(m)) or compute_always_invoked(m)
        for n in res.cfg.nodes:
            st = res.before[n.id]
            if st is None:
                continue
            done = set(facts.decl_initialized) | at_entry
            done |= {p.links[0] for p in st.definite if p.root == THIS}
            for callee, idx in calls:
                if idx < n.top_index:
                    done |= facts.directly_assigned.get(id(callee), frozenset())
            for e, f, span in _field_reads(n, cls, names):
                if f.name in done:
                    continue
                key = (e.span.start, e.span.end)
                if key in spans:
                    continue
                spans.add(key)
                scope = (cls.decl, m.decl) if m.decl is not None else (cls.decl,)
                out.append(Diagnostic(
                    Code.USE_BEFORE_INIT, cls.file.path, span,
                    f"read of @NonNull field {f.name} before it is initialized", scope=scope))
    return out, spans


def check_class_init(cls: ClassFacts, engine: DataflowEngine) -> tuple[list[Diagnostic], frozenset]:
    """All initialization diagnostics for ``cls`` and receiver spans that must skip DEREF."""
    out: list[Diagnostic] = []
    skip: set[tuple[int, int]] = set()
    for static in (False, True):
        facts = compute_init_facts(cls, engine, static)
        if not facts.fields:
            continue
        out += check_field_initialization(cls, facts)
        diags, spans = check_use_before_init(cls, facts, engine)
        out += diags
        skip |= spans
    return out, frozenset(skip)


def directly_assigned_fields(res: DataflowResult, cls: ClassFacts, static: bool = False) -> frozenset[str]:
    names = {f.name for f in cls.fields.values()}
    return _assigned_at_exit(res, _root(cls, static), names)


def field_path(f: FieldInfo) -> AccessPath:
    return AccessPath(_root(f.owner, f.static), (f.name,))

