"""Flow-sensitive nullness inference over access paths.

Calls are assumed pure: they kill no facts, and a no-argument call forms an
access path whose result can be refined like a field. Results are cached so
each procedure is analyzed at most once per run.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Union

from ..boundary import OVERRIDE_SUPER, Boundary
from ..frontend import ast as A
from ..handlers import HandlerChain
from ..semantics.nullness import JOIN, Nullness
from ..semantics.program import (
    ARRAY_LENGTH, ClassFacts, FieldInfo, LambdaInfo, LocalVar, MethodInfo, ProgramTable,
)
from . import cfg as C
from .cfg import Cfg, Node, build_cfg, build_init_cfg, node_exprs
from .paths import CLASS_PREFIX, THIS, AccessPath, Defaults, NullnessStore, join, join_all

NULL = Nullness.NULL
NONNULL = Nullness.NONNULL
NULLABLE = Nullness.NULLABLE

MAX_VISITS = 10_000

_NO_PATH = object()
_NONNULL_EXPRS = (A.New, A.StringLit, A.This, A.NewArray, A.Lambda, A.IntLit, A.BoolLit,
                  A.Binary, A.Unary, A.ArrayIndex)

Store = Optional[NullnessStore]


@dataclass(eq=False)
class DataflowResult:
    """Fixpoint stores for one procedure, lambda body, or set of field initializers."""

    owner: Any  # MethodInfo, LambdaInfo, or ClassFacts for field initializers
    cls: ClassFacts
    cfg: Cfg
    defaults: Defaults
    before: list[Store]
    out: list[dict[str, Store]]
    return_nullness: Optional[Nullness] = None
    true_store: Store = None
    false_store: Store = None
    nonnull_store: Store = None
    lambdas: list[tuple[A.Lambda, "DataflowResult"]] = field(default_factory=list)
    visits: int = 0
    aborted: bool = False
    lambda_node: Optional[A.Lambda] = None

    @property
    def exit_store(self) -> Store:
        return self.before[self.cfg.exit.id]

    @property
    def exc_store(self) -> Store:
        return self.before[self.cfg.exc_exit.id] if self.cfg.exc_exit is not None else None

    def store_before(self, n: Node) -> Store:
        return self.before[n.id]

    def store_after(self, n: Node) -> Store:
        outs = self.out[n.id]
        if not outs:
            return self.before[n.id]
        return join_all(outs.values(), self.defaults)

    def lambda_result(self, lam: A.Lambda) -> Optional["DataflowResult"]:
        for l, r in self.lambdas:
            if l is lam:
                return r
        return None

    def all_results(self) -> Iterator["DataflowResult"]:
        yield self
        for _, r in self.lambdas:
            yield from r.all_results()

    def dump(self, title: str = "") -> str:
        lines = [title] if title else []
        for n in self.cfg.nodes:
            st = self.before[n.id]
            facts = "<unreachable>" if st is None else st.render()
            lines.append(f"{n.label()} L{n.line}: {facts}")
        for lam, r in self.lambdas:
            lines.append(r.dump(f"lambda@{lam.span.line}:{lam.span.col}").rstrip("\n"))
        return "\n".join(lines) + "\n"


class _Ctx:
    """Per-analysis state handed to handlers."""

    def __init__(self, engine: "DataflowEngine", defaults: Defaults, result_holder: list,
                 cls: Optional[ClassFacts] = None):
        self.engine = engine
        self.cls = cls
        self.boundary = engine.boundary
        self.defaults = defaults
        self._holder = result_holder

    def path_of(self, e: A.Expr) -> Optional[AccessPath]:
        return self.engine.path_of(e, self.defaults)

    def arg_nullness(self, call: A.Expr, store: NullnessStore) -> list[Optional[Nullness]]:
        return [self.engine.nullness(a, store, self.defaults) for a in call.args]

    def lambda_result(self, lam: A.Lambda) -> Optional[DataflowResult]:
        for r in self._holder:
            found = r.lambda_result(lam)
            if found is not None:
                return found
        return None

    def record_assertion(self, call: A.Expr, callee: MethodInfo) -> None:
        self.engine.record_assertion(call, callee, self.cls.file.path if self.cls is not None else "?")


class DataflowEngine:
    """Computes and caches dataflow results for a program."""

    def __init__(self, table: ProgramTable, boundary: Boundary, handlers: Optional[HandlerChain] = None,
                 max_visits: int = MAX_VISITS):
        self.table = table
        self.boundary = boundary
        self.handlers = handlers if handlers is not None else HandlerChain.default(boundary)
        self.max_visits = max_visits
        self.computations = 0
        self._cache: dict[int, DataflowResult] = {}
        self._init_cache: dict[tuple[str, bool], DataflowResult] = {}
        self._lock = threading.RLock()
        self.assertion_sites: dict[int, tuple[A.Expr, MethodInfo, str]] = {}

    # -- front door ----------------------------------------------------------

    def result_for(self, m: MethodInfo) -> DataflowResult:
        """The cached result for ``m``, computing it on first request."""
        hit = self._cache.get(id(m))
        if hit is not None:
            return hit
        with self._lock:
            hit = self._cache.get(id(m))
            if hit is None:
                hit = self.analyze_procedure(m)
                self.computations += 1
                self._cache[id(m)] = hit
            return hit

    def field_init_result(self, cls: ClassFacts, static: bool) -> DataflowResult:
        key = (cls.qname, static)
        with self._lock:
            hit = self._init_cache.get(key)
            if hit is None:
                inits = [(f, f.declarator.init) for f in cls.fields.values()
                         if f.static == static and f.declarator.init is not None]
                defaults = Defaults({AccessPath(THIS): NONNULL})
                hit = self.run(build_init_cfg(inits), defaults, NullnessStore.EMPTY, cls, cls, None)
                self._init_cache[key] = hit
            return hit

    def is_cached(self, m: MethodInfo) -> bool:
        return id(m) in self._cache

    def record_assertion(self, call: A.Expr, callee: MethodInfo, file: str) -> None:
        with self._lock:
            self.assertion_sites.setdefault(id(call), (call, callee, file))

    # -- analysis --------------------------------------------------------------

    def analyze_procedure(self, m: MethodInfo) -> DataflowResult:
        defaults = Defaults({AccessPath(THIS): NONNULL})
        for i, (v, p) in enumerate(zip(m.param_vars, m.params)):
            if p.type.is_reference:
                defaults.table[AccessPath(v.name)] = self.boundary.param_nullness(m, i, OVERRIDE_SUPER)
        bool_ret = m.ret is not None and m.ret.name == "boolean" and not m.ret.dims
        cfg = build_cfg(m.body, bool_return=bool_ret)
        ret = self.boundary.return_nullness(m, OVERRIDE_SUPER) if m.ret is not None else None
        return self.run(cfg, defaults, NullnessStore.EMPTY, m.owner, m, ret)

    def lambda_signature(self, info: Optional[LambdaInfo]) -> tuple[list[Optional[Nullness]], Optional[Nullness]]:
        """Nullness of a lambda's params and return, adopted from its functional method."""
        if info is None:
            return [], None
        fm = info.iface_method
        params = [self.boundary.param_nullness(fm, i, OVERRIDE_SUPER) if v.type.is_reference else None
                  for i, v in enumerate(info.params)]
        ret = self.boundary.return_nullness(fm, OVERRIDE_SUPER) if info.ret is not None else None
        return params, ret

    def analyze_lambda(self, lam: A.Lambda, parent: Optional[A.Expr], enclosing: NullnessStore,
                       outer: Defaults, cls: ClassFacts, holder: list) -> DataflowResult:
        info = lam.ref if isinstance(lam.ref, LambdaInfo) else None
        defaults = outer.copy()
        pnull, ret = self.lambda_signature(info)
        names = set(lam.params)
        for i, name in enumerate(lam.params):
            for k in [k for k in defaults.table if k.root == name]:
                del defaults.table[k]
            n = pnull[i] if i < len(pnull) else NONNULL
            if n is not None:
                defaults.table[AccessPath(name)] = n
        facts = {p: v for p, v in enclosing.items()
                 if p.root != THIS and not p.root.startswith(CLASS_PREFIX) and p.root not in names}
        entry = NullnessStore(facts)
        ctx = _Ctx(self, defaults, holder, cls)
        injected = self.handlers.lambda_entry(lam, info, parent, ctx)
        for path, value, default in injected or ():
            defaults.register(path, default)
            # a contradictory fact from the predicate is dropped rather than making the body unreachable
            entry = entry.strengthen(path, value, defaults) or entry
        if info is None:
            cfg = build_cfg(lam.body if isinstance(lam.body, A.Block) else lam.body, void=True)
        else:
            r = info.ret
            bool_ret = r is not None and r.name == "boolean" and not r.dims
            cfg = build_cfg(lam.body, bool_return=bool_ret, void=r is None)
        res = self.run(cfg, defaults, entry, cls, info, ret, holder=holder)
        res.lambda_node = lam
        return res

    def run(self, cfg: Cfg, defaults: Defaults, entry: NullnessStore, cls: ClassFacts, owner: Any,
            ret: Optional[Nullness], holder: Optional[list] = None) -> DataflowResult:
        n_nodes = len(cfg.nodes)
        res = DataflowResult(owner, cls, cfg, defaults, [None] * n_nodes, [{} for _ in range(n_nodes)], ret)
        holder = holder if holder is not None else []
        holder.append(res)
        ctx = _Ctx(self, defaults, holder, cls)
        self._fixpoint(cfg, res, entry, ctx)
        if not res.aborted:
            self._exit_stores(res, ctx)
            self._lambdas(res, holder)
        return res

    def _fixpoint(self, cfg: Cfg, res: DataflowResult, entry: NullnessStore, ctx: _Ctx) -> None:
        before, out, defaults = res.before, res.out, res.defaults
        heap = [cfg.entry.id]
        queued = {cfg.entry.id}
        seen: set[int] = set()
        nodes = cfg.nodes
        visits = 0
        while heap:
            nid = heapq.heappop(heap)
            queued.discard(nid)
            n = nodes[nid]
            visits += 1
            if visits > self.max_visits:
                res.aborted = True
                break
            if n is cfg.entry:
                inp: Store = entry
            else:
                inp = None
                for p, lab in n.preds:
                    s = out[p.id].get(lab)
                    if s is not None:
                        inp = s if inp is None else join(inp, s, defaults)
            if nid in seen and inp == before[nid]:
                continue
            seen.add(nid)
            before[nid] = inp
            labels = {lab for _, lab in n.succs}
            new_out = {lab: (None if inp is None else self.transfer(n, inp, lab, ctx)) for lab in labels}
            if new_out != out[nid]:
                out[nid] = new_out
                for s, _ in n.succs:
                    if s.id not in queued:
                        queued.add(s.id)
                        heapq.heappush(heap, s.id)
        res.visits = visits

    def _exit_stores(self, res: DataflowResult, ctx: _Ctx) -> None:
        trues, falses, nonnull = [], [], []
        for n in res.cfg.nodes:
            st = res.before[n.id]
            if st is None:
                continue
            if n.kind == C.RETURN_BOOL:
                (trues if n.value else falses).append(st)
            elif n.kind == C.RETURN and n.expr is not None:
                v = self.nullness(n.expr, st, res.defaults)
                if v is NULL:
                    continue
                p = self.path_of(n.expr, res.defaults)
                nonnull.append(st.refine(p, NONNULL, res.defaults) if p is not None else st)
        res.true_store = join_all(trues, res.defaults)
        res.false_store = join_all(falses, res.defaults)
        res.nonnull_store = join_all(nonnull, res.defaults)

    def _lambdas(self, res: DataflowResult, holder: list) -> None:
        for n in res.cfg.nodes:
            st = res.before[n.id]
            if st is None:
                continue
            for lam, parent in _lambdas_in(n):
                r = self.analyze_lambda(lam, parent, st, res.defaults, res.cls, holder)
                res.lambdas.append((lam, r))

    # -- expressions -------------------------------------------------------------

    def path_of(self, e: A.Expr, defaults: Defaults) -> Optional[AccessPath]:
        """Access path denoted by ``e``, registering its declared default."""
        memo = e.memo
        if memo is None:
            memo = _path_shape(e)
            e.memo = memo
        if memo is _NO_PATH:
            return None
        path, decl = memo
        if path not in defaults.table:
            defaults.table[path] = self._declared(decl)
        return path

    def _declared(self, decl: Any) -> Nullness:
        if isinstance(decl, FieldInfo):
            n = self.boundary.field_read(decl).nullness
        elif isinstance(decl, MethodInfo):
            n = self.boundary.return_nullness(decl)
        else:
            n = NULLABLE
        return n if n is not None else NONNULL

    def nullness(self, e: A.Expr, store: NullnessStore, defaults: Defaults) -> Nullness:
        if isinstance(e, A.NullLit):
            return NULL
        if isinstance(e, _NONNULL_EXPRS):
            return NONNULL
        if isinstance(e, A.Name):
            p = self.path_of(e, defaults)
            return store.get(p, defaults) if p is not None else NULLABLE
        if isinstance(e, A.FieldAccess):
            if e.ref == ARRAY_LENGTH:
                return NONNULL
            p = self.path_of(e, defaults)
            if p is not None:
                return store.get(p, defaults)
            if isinstance(e.ref, FieldInfo):
                n = self.boundary.field_read(e.ref).nullness
                return n if n is not None else NONNULL
            return NONNULL
        if isinstance(e, A.MethodCall):
            p = self.path_of(e, defaults)
            if p is not None:
                v = store.facts.get(p)
                if v is not None:
                    return v
            return self.call_result(e, store, defaults)
        if isinstance(e, A.Conditional):
            return JOIN[self.nullness(e.then, store, defaults)][self.nullness(e.other, store, defaults)]
        return NULLABLE

    def call_result(self, e: A.MethodCall, store: NullnessStore, defaults: Defaults) -> Nullness:
        m = e.ref
        if not isinstance(m, MethodInfo):
            return NONNULL
        if m.ret is None or not m.ret.is_reference:
            return NONNULL
        if self.handlers.interested(m):
            r = self.handlers.call_return(e, m, store, _Ctx(self, defaults, []))
            if r is not None:
                return r
        n = self.boundary.return_nullness(m)
        return n if n is not None else NONNULL

    # -- transfer ------------------------------------------------------------------

    def transfer(self, n: Node, store: NullnessStore, label: str, ctx: _Ctx) -> Store:
        defaults = ctx.defaults
        kind = n.kind
        if kind in (C.ENTRY, C.LOOP, C.EXIT, C.EXC_EXIT, C.RETURN_BOOL):
            return store
        pre = store
        store = self._throw_refinements(n, store, ctx)
        if store is None:
            return None
        if kind == C.LOCAL or kind == C.TEMP:
            var: Optional[LocalVar] = n.target
            if var is not None and var.type.is_reference:
                p = AccessPath(var.name)
                if n.expr is None:
                    return store.forget(p)
                return store.set(p, self.nullness(n.expr, pre, defaults), defaults, kill=True)
            return store
        if kind == C.ASSIGN:
            t = n.target
            if isinstance(t, FieldInfo):
                if not t.type.is_reference:
                    return store
                p = AccessPath(CLASS_PREFIX + t.owner.qname if t.static else THIS, (t.name,))
                defaults.register(p, self._declared(t))
            else:
                if t.type is None or not t.type.is_reference:
                    return store
                p = self.path_of(t, defaults)
                if p is None:
                    return store
            return store.set(p, self.nullness(n.expr, pre, defaults), defaults, kill=True)
        if kind == C.COND:
            return self._refine_edge(n.expr, store, pre, label == C.TRUE, ctx)
        return store

    def _throw_refinements(self, n: Node, store: NullnessStore, ctx: _Ctx) -> Store:
        calls = n.calls
        if calls is None:
            calls = [e for e in node_exprs(n) if isinstance(e, A.MethodCall) and isinstance(e.ref, MethodInfo)
                     and self.handlers.interested(e.ref)]
            n.calls = calls
        for call in calls:
            r = self.handlers.throw_refinement(call, call.ref, store, ctx)
            for path, value in (r or {}).items():
                store = store.strengthen(path, value, ctx.defaults) if path is not None else None
                if store is None:
                    return None
        return store

    def _refine_edge(self, e: A.Expr, store: NullnessStore, pre: NullnessStore, branch: bool, ctx: _Ctx) -> Store:
        defaults = ctx.defaults
        if isinstance(e, A.BoolLit):
            return store if e.value == branch else None
        if isinstance(e, A.Binary) and e.op in ("==", "!="):
            if isinstance(e.right, A.NullLit):
                other = e.left
            elif isinstance(e.left, A.NullLit):
                other = e.right
            else:
                return store
            p = self.path_of(other, defaults)
            if p is None:
                return store
            is_null = (e.op == "==") == branch
            return store.refine(p, NULL if is_null else NONNULL, defaults)
        if isinstance(e, A.MethodCall) and isinstance(e.ref, MethodInfo) and self.handlers.interested(e.ref):
            r = self.handlers.condition_edges(e, e.ref, pre, ctx)
            if r is not None:
                for path, value in (r[0] if branch else r[1]).items():
                    store = store.strengthen(path, value, defaults) if path is not None else None
                    if store is None:
                        return None
        return store


def _path_shape(e: A.Expr) -> Union[object, tuple[AccessPath, Any]]:
    """Structural access path of ``e`` plus the declaration supplying its default."""
    if isinstance(e, A.This):
        return AccessPath(THIS), None
    if isinstance(e, A.Name):
        ref = e.ref
        if isinstance(ref, LocalVar):
            return AccessPath(ref.name), None
        if isinstance(ref, FieldInfo):
            root = CLASS_PREFIX + ref.owner.qname if ref.static else THIS
            return AccessPath(root, (ref.name,)), ref
        return _NO_PATH
    if isinstance(e, A.FieldAccess):
        ref = e.ref
        if not isinstance(ref, FieldInfo):
            return _NO_PATH
        if ref.static:
            return AccessPath(CLASS_PREFIX + ref.owner.qname, (ref.name,)), ref
        base = _path_shape(e.target)
        if base is _NO_PATH:
            return _NO_PATH
        p = base[0].extend(ref.name)
        return (p, ref) if p is not None else _NO_PATH
    if isinstance(e, A.MethodCall):
        m = e.ref
        if e.args or not isinstance(m, MethodInfo):
            return _NO_PATH
        link = m.name + "()"
        if m.static:
            return AccessPath(CLASS_PREFIX + m.owner.qname, (link,)), m
        if e.target is None:
            return AccessPath(THIS, (link,)), m
        base = _path_shape(e.target)
        if base is _NO_PATH:
            return _NO_PATH
        p = base[0].extend(link)
        return (p, m) if p is not None else _NO_PATH
    return _NO_PATH


def _lambdas_in(n: Node) -> Iterator[tuple[A.Lambda, Optional[A.Expr]]]:
    """Lambdas evaluated at ``n`` with their enclosing call, in evaluation order."""

    def walk(e: Optional[A.Expr], parent: Optional[A.Expr]) -> Iterator[tuple[A.Lambda, Optional[A.Expr]]]:
        if e is None:
            return
        if isinstance(e, A.Lambda):
            yield e, parent
            return
        for name in C._CHILDREN.get(type(e), ()):
            child = getattr(e, name)
            if isinstance(child, list):
                for c in child:
                    yield from walk(c, e)
            else:
                yield from walk(child, e)

    if n.kind == C.RETURN_BOOL or not any(isinstance(e, A.Lambda) for e in node_exprs(n)):
        return
    if n.kind == C.ASSIGN and isinstance(n.target, A.Expr):
        yield from walk(n.target, None)
    yield from walk(n.expr, None)

