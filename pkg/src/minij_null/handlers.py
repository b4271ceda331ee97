"""Plug-in handlers consulted by the dataflow analysis.

Each handler may answer any of four hooks. Handlers are asked in registration
order and the first non-``None`` answer wins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Protocol, Sequence

from .frontend import ast as A
from .semantics.nullness import Nullness
from .semantics.program import LambdaInfo, MethodInfo

if TYPE_CHECKING:
    from .boundary import Boundary
    from .dataflow.paths import AccessPath, NullnessStore

NULL = Nullness.NULL
NONNULL = Nullness.NONNULL
BOTTOM = Nullness.BOTTOM

# maps access paths to the nullness they may be strengthened to; the key None
# (with BOTTOM) marks an edge that cannot be taken
Refinements = dict[Optional["AccessPath"], Nullness]

# -- contracts -----------------------------------------------------------------

ANTECEDENTS = ("null", "!null", "_")
CONSEQUENTS = ("false", "true", "fail", "null", "!null")


class ContractError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    antecedents: tuple[str, ...]
    consequent: str

    def __str__(self) -> str:
        return f"{', '.join(self.antecedents)} -> {self.consequent}"


@dataclass(frozen=True)
class Contract:
    clauses: tuple[Clause, ...]

    def __str__(self) -> str:
        return "; ".join(map(str, self.clauses))


_CLAUSE = re.compile(r"^\s*(.*?)\s*->\s*(\S+)\s*$")


def parse_contract(text: str, arity: int) -> Contract:
    """Parse ``"null -> false"``-style strings; clauses are ``;``-separated."""
    clauses = []
    for raw in text.split(";"):
        m = _CLAUSE.match(raw)
        if m is None:
            raise ContractError(f"malformed clause {raw.strip()!r}")
        ants = tuple(a.strip() for a in m.group(1).split(",")) if m.group(1) else ()
        cons = m.group(2)
        if any(a not in ANTECEDENTS for a in ants):
            raise ContractError(f"unsupported antecedent in {raw.strip()!r}")
        if cons not in CONSEQUENTS:
            raise ContractError(f"unsupported consequent {cons!r}")
        if len(ants) != arity:
            raise ContractError(f"clause {raw.strip()!r} has {len(ants)} antecedents, method has {arity} parameters")
        clauses.append(Clause(ants, cons))
    if not clauses:
        raise ContractError("empty contract")
    return Contract(tuple(clauses))


def _status(ant: str, n: Optional[Nullness]) -> Optional[bool]:
    """True if ``ant`` certainly holds for an argument of nullness ``n``, False if it cannot."""
    if ant == "_" or n is BOTTOM:
        return True
    if n is None:
        return None
    if ant == "null":
        return True if n is NULL else (False if n is NONNULL else None)
    return True if n is NONNULL else (False if n is NULL else None)


def contrapositive(clause: Clause, args: Sequence[Optional[Nullness]]) -> Optional[tuple[Optional[int], Nullness]]:
    """What the clause's premise being false says about the arguments.

    ``(i, nullness)`` when every antecedent but the one at ``i`` is known to
    hold, so argument ``i`` must violate its own; ``(None, BOTTOM)`` when all
    of them hold and the premise cannot be false; ``None`` otherwise.
    """
    open_pos = None
    for i, (ant, n) in enumerate(zip(clause.antecedents, args)):
        if _status(ant, n) is not True:
            if open_pos is not None:
                return None
            open_pos = i
    if open_pos is None:
        return None, BOTTOM
    return open_pos, (NONNULL if clause.antecedents[open_pos] == "null" else NULL)


def premise_holds(clause: Clause, args: Sequence[Optional[Nullness]]) -> bool:
    return all(_status(a, n) is True for a, n in zip(clause.antecedents, args))


# -- hook plumbing ---------------------------------------------------------------


class HookContext(Protocol):
    """What the analysis exposes to handlers."""

    boundary: "Boundary"

    def path_of(self, e: A.Expr) -> Optional["AccessPath"]: ...

    def arg_nullness(self, call: A.Expr, store: "NullnessStore") -> list[Optional[Nullness]]: ...

    def lambda_result(self, lam: A.Lambda): ...

    def record_assertion(self, call: A.Expr, callee: MethodInfo) -> None: ...


class Handler:
    name = "handler"

    def on_call_return_nullness(self, call: A.Expr, callee: MethodInfo, store: "NullnessStore",
                                ctx: HookContext) -> Optional[Nullness]:
        return None

    def on_condition_edges(self, call: A.MethodCall, callee: MethodInfo, store: "NullnessStore",
                           ctx: HookContext) -> Optional[tuple[Refinements, Refinements]]:
        return None

    def on_lambda_entry_store(self, lam: A.Lambda, info: Optional[LambdaInfo], parent: Optional[A.Expr],
                              ctx: HookContext) -> Optional[list[tuple["AccessPath", Nullness, Nullness]]]:
        """Facts to inject at lambda entry as ``(path, value, declared default)``."""
        return None

    def on_call_throw_refinement(self, call: A.Expr, callee: MethodInfo, store: "NullnessStore",
                                 ctx: HookContext) -> Optional[Refinements]:
        return None

    def interested_in(self, callee: MethodInfo) -> bool:
        """Cheap filter: could this handler answer a call hook for ``callee``?"""
        return False


class ContractHandler(Handler):
    """Trusted ``@Contract`` annotations and model behaviors."""

    name = "contracts"

    def __init__(self, boundary: "Boundary"):
        self.boundary = boundary
        self._cache: dict[int, tuple[Optional[Contract], bool]] = {}
        self.warnings: list[str] = []

    def contract_for(self, m: MethodInfo) -> tuple[Optional[Contract], bool]:
        """The callee's contract, and whether it came from an assertion model."""
        hit = self._cache.get(id(m))
        if hit is not None:
            return hit
        result: tuple[Optional[Contract], bool] = (None, False)
        ann = A.annotation(m.annotations, "Contract")
        behavior = self.boundary.behavior(m)
        text = ann.arg if ann is not None and ann.arg else None
        if text is None and behavior is not None and behavior.kind == "contract":
            text = behavior.value
        if text is not None:
            try:
                result = (parse_contract(text, len(m.params)), False)
            except ContractError as exc:
                self.warnings.append(f"{m.qname}: ignoring contract {text!r}: {exc}")
        elif behavior is not None and behavior.kind == "assert-nonnull":
            ants = tuple("null" if i == behavior.arg else "_" for i in range(len(m.params)))
            result = (Contract((Clause(ants, "fail"),)), True)
        self._cache[id(m)] = result
        return result

    def interested_in(self, callee: MethodInfo) -> bool:
        return self.contract_for(callee)[0] is not None

    def on_call_return_nullness(self, call, callee, store, ctx):
        contract, _ = self.contract_for(callee)
        if contract is None:
            return None
        args = ctx.arg_nullness(call, store)
        for c in contract.clauses:
            if c.consequent not in ("null", "!null"):
                continue
            value = NULL if c.consequent == "null" else NONNULL
            if premise_holds(c, args):
                return value
            if not any(_status(a, n) is False for a, n in zip(c.antecedents, args)):
                # the premise may still hold, so the result may still be the consequent
                declared = self.boundary.return_nullness(callee)
                return value.join(declared if declared is not None else NONNULL)
        return None

    def _edge(self, contract: Contract, result: str, call, args, ctx) -> Refinements:
        out: Refinements = {}
        for c in contract.clauses:
            if c.consequent != result:
                continue
            hit = contrapositive(c, args)
            if hit is None:
                continue
            if hit[0] is None:
                return {None: BOTTOM}
            path = ctx.path_of(call.args[hit[0]])
            if path is not None:
                out[path] = hit[1]
        return out

    def on_condition_edges(self, call, callee, store, ctx):
        contract, _ = self.contract_for(callee)
        if contract is None:
            return None
        args = ctx.arg_nullness(call, store)
        # a clause "... -> false" is contradicted on the true edge, and vice versa
        true_edge = self._edge(contract, "false", call, args, ctx)
        false_edge = self._edge(contract, "true", call, args, ctx)
        if not true_edge and not false_edge:
            return None
        return true_edge, false_edge

    def on_call_throw_refinement(self, call, callee, store, ctx):
        contract, from_assertion = self.contract_for(callee)
        if contract is None:
            return None
        args = ctx.arg_nullness(call, store)
        out = self._edge(contract, "fail", call, args, ctx)
        if not out:
            return None
        if from_assertion and any(a == "null" and n is not NONNULL
                                  for a, n in zip(contract.clauses[0].antecedents, args)):
            ctx.record_assertion(call, callee)
        return out


class StreamHandler(Handler):
    """Carries ``filter`` predicate facts into the immediately following ``map``."""

    name = "streams"

    def __init__(self, stream_types: Iterable[str] = ("std.Observable",)):
        self.stream_types = frozenset(stream_types)

    def on_lambda_entry_store(self, lam, info, parent, ctx):
        if not (isinstance(parent, A.MethodCall) and parent.name == "map" and len(parent.args) == 1
                and parent.args[0] is lam and len(lam.params) == 1):
            return None
        filt = parent.target
        if not (isinstance(filt, A.MethodCall) and filt.name == "filter" and len(filt.args) == 1
                and isinstance(filt.args[0], A.Lambda) and len(filt.args[0].params) == 1):
            return None
        recv_type = filt.target.type if filt.target is not None else None
        if recv_type is None or recv_type.name not in self.stream_types or recv_type.dims:
            return None
        pred = ctx.lambda_result(filt.args[0])
        if pred is None or pred.true_store is None:
            return None
        src, dst = filt.args[0].params[0], lam.params[0]
        out = []
        for path, value in pred.true_store.items():
            if path.root == src and path.links:
                out.append((path.rerooted(dst), value, pred.defaults[path]))
        return out or None


class RestrictiveAnnotationsHandler(Handler):
    """Honors restrictive return annotations on unannotated callees."""

    name = "restrictive-annotations"

    def __init__(self, boundary: "Boundary"):
        self.boundary = boundary

    def interested_in(self, callee: MethodInfo) -> bool:
        return self.boundary.config.acknowledge_restrictive and not callee.owner.annotated

    def on_call_return_nullness(self, call, callee, store, ctx):
        if callee.owner.annotated or not self.boundary.config.acknowledge_restrictive:
            return None
        r = self.boundary.resolve_return(callee, "call-site")
        return r.nullness if r.provenance == "restrictive" else None


class HandlerChain:
    """Fixed-order dispatch over registered handlers."""

    def __init__(self, handlers: Sequence[Handler] = ()):
        self.handlers = list(handlers)
        self._interest: dict[int, bool] = {}

    @classmethod
    def default(cls, boundary: "Boundary", stream_types: Iterable[str] = ("std.Observable",)) -> "HandlerChain":
        return cls([ContractHandler(boundary), StreamHandler(stream_types), RestrictiveAnnotationsHandler(boundary)])

    @property
    def warnings(self) -> list[str]:
        out: list[str] = []
        for h in self.handlers:
            out += getattr(h, "warnings", [])
        return out

    def interested(self, callee: MethodInfo) -> bool:
        hit = self._interest.get(id(callee))
        if hit is None:
            hit = any(h.interested_in(callee) for h in self.handlers)
            self._interest[id(callee)] = hit
        return hit

    def call_return(self, call, callee, store, ctx) -> Optional[Nullness]:
        for h in self.handlers:
            r = h.on_call_return_nullness(call, callee, store, ctx)
            if r is not None:
                return r
        return None

    def condition_edges(self, call, callee, store, ctx):
        for h in self.handlers:
            r = h.on_condition_edges(call, callee, store, ctx)
            if r is not None:
                return r
        return None

    def lambda_entry(self, lam, info, parent, ctx):
        for h in self.handlers:
            r = h.on_lambda_entry_store(lam, info, parent, ctx)
            if r is not None:
                return r
        return None

    def throw_refinement(self, call, callee, store, ctx):
        for h in self.handlers:
            r = h.on_call_throw_refinement(call, callee, store, ctx)
            if r is not None:
                return r
        return None
