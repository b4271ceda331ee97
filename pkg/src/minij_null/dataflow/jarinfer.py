"""Parameter nullness inference for unannotated code.

A parameter is inferred NonNull when every path from entry to the normal exit
dereferences it before any assignment to it. Derefs inside lambdas do not
count, and a method whose normal exit is unreachable infers nothing.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from ..frontend import ast as A
from ..semantics.nullness import Nullness
from ..semantics.program import ClassFacts, LocalVar, MethodInfo
from .cfg import ASSIGN, LOCAL, Cfg, Node, build_cfg, node_exprs

# per-parameter state, ordered worst to best; the join over paths is ``min``
KILLED, NONE, DEREF = 0, 1, 2

State = tuple[int, ...]


def _receiver(e: A.Expr) -> Optional[A.Expr]:
    if isinstance(e, A.FieldAccess):
        return e.target
    if isinstance(e, A.MethodCall):
        return e.target
    if isinstance(e, A.ArrayIndex):
        return e.array
    return None


def _step(n: Node, state: State, index: dict[int, int]) -> State:
    s = list(state)
    for e in node_exprs(n):
        r = _receiver(e)
        if isinstance(r, A.Name) and isinstance(r.ref, LocalVar):
            i = index.get(id(r.ref))
            if i is not None and s[i] == NONE:
                s[i] = DEREF
    target = None
    if n.kind == ASSIGN and isinstance(n.target, A.Name):
        target = n.target.ref
    elif n.kind == LOCAL:
        target = n.target
    if target is not None:
        i = index.get(id(target))
        if i is not None and s[i] == NONE:
            s[i] = KILLED
    return tuple(s)


def must_dereference(cfg: Cfg, params: list[LocalVar]) -> list[bool]:
    """For each parameter, whether it is dereferenced on every path to normal exit."""
    index = {id(p): i for i, p in enumerate(params)}
    before: dict[int, State] = {cfg.entry.id: (NONE,) * len(params)}
    after: dict[int, State] = {}
    work = deque([cfg.entry])
    queued = {cfg.entry.id}
    while work:
        n = work.popleft()
        queued.discard(n.id)
        ins = [after[p.id] for p, _ in n.preds if p.id in after]
        if n is cfg.entry:
            st = before[n.id]
        elif not ins:
            continue
        else:
            st = tuple(min(col) for col in zip(*ins))
        out = _step(n, st, index)
        if after.get(n.id) == out:
            continue
        after[n.id] = out
        for s, _ in n.succs:
            if s.id not in queued:
                queued.add(s.id)
                work.append(s)
    exit_state = after.get(cfg.exit.id)
    if exit_state is None:
        return [False] * len(params)
    return [v == DEREF for v in exit_state]


def infer_method(m: MethodInfo) -> list[bool]:
    if m.body is None or not m.params:
        return [False] * len(m.params)
    cfg = build_cfg(m.body)
    return must_dereference(cfg, m.param_vars)


def mini_jarinfer(classes: list[ClassFacts]) -> dict[tuple[tuple[str, str, int], int], Nullness]:
    """Map ``(method key, position)`` to NonNull for inferred parameters."""
    out: dict[tuple[tuple[str, str, int], int], Nullness] = {}
    for cls in classes:
        for m in [*cls.ctors, *cls.all_methods()]:
            for i, inferred in enumerate(infer_method(m)):
                if inferred and m.params[i].type.is_reference:
                    out[(m.key, i)] = Nullness.NONNULL
    return out
