"""Control-flow graphs with one statement per node.

Short-circuit operators, ``!`` and ``?:`` in condition position become
branches. In value position, ``?:``, ``&&`` and ``||`` are hoisted into
temporaries assigned on each arm, so every node's expression is free of
internal control flow (lambda bodies excepted; they get their own graphs).

Node ids follow a topological order of the forward edges, with the exit
nodes last, so they double as worklist priorities.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Union

from ..frontend import ast as A
from ..semantics.program import BOOLEAN, LocalVar, TypeRef

ENTRY = "ENTRY"
EXIT = "EXIT"
EXC_EXIT = "EXC_EXIT"
LOCAL = "LOCAL"
ASSIGN = "ASSIGN"
EXPR = "EXPR"
COND = "COND"
LOOP = "LOOP"
RETURN = "RETURN"
RETURN_BOOL = "RETURN_BOOL"
THROW = "THROW"
TEMP = "TEMP"

UNCOND = "u"
TRUE = "t"
FALSE = "f"


@dataclass(eq=False)
class Node:
    id: int
    kind: str
    expr: Optional[A.Expr] = None
    # LOCAL/TEMP: LocalVar; ASSIGN: target expression or a FieldInfo (field initializers)
    target: Any = None
    stmt: Optional[A.Stmt] = None
    top_index: int = 0
    value: Optional[bool] = None
    succs: list[tuple["Node", str]] = field(default_factory=list)
    preds: list[tuple["Node", str]] = field(default_factory=list)
    # handler-relevant calls evaluated here, filled lazily by the analysis
    calls: Optional[list] = field(default=None, repr=False)
    exprs: Optional[tuple] = field(default=None, repr=False)

    @property
    def line(self) -> int:
        if self.expr is not None and self.expr.span is not None:
            return self.expr.span.line
        if self.stmt is not None and self.stmt.span is not None:
            return self.stmt.span.line
        return 0

    def label(self) -> str:
        extra = f"({self.value})".lower() if self.kind == RETURN_BOOL else ""
        return f"n{self.id}{extra} {self.kind}"

    def __repr__(self) -> str:
        return f"<{self.label()}>"


Frontier = list[tuple[Node, str]]


@dataclass(eq=False)
class Cfg:
    nodes: list[Node]
    entry: Node
    exit: Node
    exc_exit: Optional[Node]
    temps: list[LocalVar]

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def edges(self) -> Iterator[tuple[Node, Node, str]]:
        for n in self.nodes:
            for s, lab in n.succs:
                yield n, s, lab


class _Builder:
    def __init__(self, bool_return: bool):
        self.nodes: list[Node] = []
        self.bool_return = bool_return
        self.top = 0
        self.temps: list[LocalVar] = []
        self.entry = self.new(ENTRY)
        self.exit = self.new(EXIT)
        self.exc_exit: Optional[Node] = None

    def new(self, kind: str, **kw: Any) -> Node:
        n = Node(len(self.nodes), kind, top_index=self.top, **kw)
        self.nodes.append(n)
        return n

    @staticmethod
    def link(src: Node, dst: Node, label: str) -> None:
        src.succs.append((dst, label))
        dst.preds.append((src, label))

    def add(self, frontier: Frontier, kind: str, **kw: Any) -> Node:
        n = self.new(kind, **kw)
        for p, lab in frontier:
            self.link(p, n, lab)
        return n

    def temp(self, t: Optional[TypeRef]) -> LocalVar:
        v = LocalVar(f"$t{len(self.temps)}", t if t is not None else BOOLEAN)
        self.temps.append(v)
        return v

    # -- statements ----------------------------------------------------------

    def stmts(self, stmts: list[A.Stmt], fr: Frontier) -> Frontier:
        for s in stmts:
            fr = self.stmt(s, fr)
        return fr

    def stmt(self, s: A.Stmt, fr: Frontier) -> Frontier:
        if isinstance(s, A.Block):
            return self.stmts(s.stmts, fr)
        if isinstance(s, A.LocalDecl):
            init = None
            if s.init is not None:
                init, fr = self.hoist(s.init, fr)
            return [(self.add(fr, LOCAL, expr=init, target=s.ref, stmt=s), UNCOND)]
        if isinstance(s, A.Assign):
            target, fr = self.hoist_target(s.target, fr)
            value, fr = self.hoist(s.value, fr)
            return [(self.add(fr, ASSIGN, expr=value, target=target, stmt=s), UNCOND)]
        if isinstance(s, A.ExprStmt):
            e, fr = self.hoist(s.expr, fr)
            return [(self.add(fr, EXPR, expr=e, stmt=s), UNCOND)]
        if isinstance(s, A.If):
            t, f = self.cond(s.cond, fr, s)
            t = self.stmt(s.then, t)
            if s.other is not None:
                f = self.stmt(s.other, f)
            return t + f
        if isinstance(s, A.While):
            head = self.add(fr, LOOP, stmt=s)
            t, f = self.cond(s.cond, [(head, UNCOND)], s)
            for p, lab in self.stmt(s.body, t):
                self.link(p, head, lab)
            return f
        if isinstance(s, A.Return):
            self.ret(s.value, fr, s)
            return []
        if isinstance(s, A.Throw):
            e, fr = self.hoist(s.value, fr)
            n = self.add(fr, THROW, expr=e, stmt=s)
            if self.exc_exit is None:
                self.exc_exit = self.new(EXC_EXIT)
            self.link(n, self.exc_exit, UNCOND)
            return []
        if isinstance(s, A.Empty):
            return fr
        raise TypeError(type(s).__name__)

    def ret(self, value: Optional[A.Expr], fr: Frontier, s: Optional[A.Stmt]) -> None:
        if value is not None and self.bool_return:
            t, f = self.cond(value, fr, s)
            for edges, v in ((t, True), (f, False)):
                n = self.add(edges, RETURN_BOOL, value=v, stmt=s, expr=value)
                self.link(n, self.exit, UNCOND)
            return
        e = None
        if value is not None:
            e, fr = self.hoist(value, fr)
        n = self.add(fr, RETURN, expr=e, stmt=s)
        self.link(n, self.exit, UNCOND)

    # -- conditions ----------------------------------------------------------

    def cond(self, e: A.Expr, fr: Frontier, s: Optional[A.Stmt]) -> tuple[Frontier, Frontier]:
        if isinstance(e, A.Unary) and e.op == "!":
            t, f = self.cond(e.operand, fr, s)
            return f, t
        if isinstance(e, A.Binary) and e.op == "&&":
            t1, f1 = self.cond(e.left, fr, s)
            t2, f2 = self.cond(e.right, t1, s)
            return t2, f1 + f2
        if isinstance(e, A.Binary) and e.op == "||":
            t1, f1 = self.cond(e.left, fr, s)
            t2, f2 = self.cond(e.right, f1, s)
            return t1 + t2, f2
        if isinstance(e, A.Conditional):
            tc, fc = self.cond(e.cond, fr, s)
            ta, fa = self.cond(e.then, tc, s)
            tb, fb = self.cond(e.other, fc, s)
            return ta + tb, fa + fb
        e2, fr = self.hoist(e, fr)
        n = self.add(fr, COND, expr=e2, stmt=s)
        return [(n, TRUE)], [(n, FALSE)]

    # -- hoisting ------------------------------------------------------------

    def hoist_target(self, e: A.Expr, fr: Frontier) -> tuple[A.Expr, Frontier]:
        if isinstance(e, A.FieldAccess):
            t, fr = self.hoist(e.target, fr)
            return (e if t is e.target else dataclasses.replace(e, target=t, memo=None)), fr
        if isinstance(e, A.ArrayIndex):
            return self.hoist(e, fr)
        return e, fr

    def hoist(self, e: A.Expr, fr: Frontier) -> tuple[A.Expr, Frontier]:
        if not _has_branching(e):
            return e, fr
        return self._hoist(e, fr)

    def _hoist(self, e: A.Expr, fr: Frontier) -> tuple[A.Expr, Frontier]:
        if isinstance(e, A.Conditional):
            var = self.temp(e.type)
            tc, fc = self.cond(e.cond, fr, None)
            a, tc = self._hoist(e.then, tc)
            na = self.add(tc, TEMP, expr=a, target=var)
            b, fc = self._hoist(e.other, fc)
            nb = self.add(fc, TEMP, expr=b, target=var)
            return _temp_ref(var, e), [(na, UNCOND), (nb, UNCOND)]
        if isinstance(e, A.Binary) and e.op in ("&&", "||"):
            var = self.temp(BOOLEAN)
            t, f = self.cond(e, fr, None)
            return _temp_ref(var, e), t + f
        changes: dict[str, Any] = {}
        for name in _CHILDREN.get(type(e), ()):
            child = getattr(e, name)
            if isinstance(child, list):
                out = []
                for c in child:
                    c2, fr = self._hoist(c, fr)
                    out.append(c2)
                if any(a is not b for a, b in zip(out, child)):
                    changes[name] = out
            elif child is not None:
                c2, fr = self._hoist(child, fr)
                if c2 is not child:
                    changes[name] = c2
        return (dataclasses.replace(e, memo=None, **changes) if changes else e), fr


def _temp_ref(var: LocalVar, orig: A.Expr) -> A.Name:
    return A.Name(id=var.name, span=orig.span, type=var.type, ref=var)


_CHILDREN: dict[type, tuple[str, ...]] = {
    A.FieldAccess: ("target",),
    A.MethodCall: ("target", "args"),
    A.New: ("args",),
    A.NewArray: ("size",),
    A.ArrayIndex: ("array", "index"),
    A.Binary: ("left", "right"),
    A.Unary: ("operand",),
    A.Conditional: ("cond", "then", "other"),
}


def _has_branching(e: Optional[A.Expr]) -> bool:
    stack = [e]
    while stack:
        x = stack.pop()
        if x is None:
            continue
        if isinstance(x, A.Conditional):
            return True
        if isinstance(x, A.Binary):
            if x.op == "&&" or x.op == "||":
                return True
            stack.append(x.left)
            stack.append(x.right)
            continue
        for name in _CHILDREN.get(type(x), ()):
            child = getattr(x, name)
            if isinstance(child, list):
                stack.extend(child)
            else:
                stack.append(child)
    return False


def _finish(b: _Builder, fr: Frontier) -> Cfg:
    for p, lab in fr:
        b.link(p, b.exit, lab)
    # prune nodes unreachable from entry
    seen = {id(b.entry)}
    stack = [b.entry]
    while stack:
        n = stack.pop()
        for s, _ in n.succs:
            if id(s) not in seen:
                seen.add(id(s))
                stack.append(s)
    exc = b.exc_exit if b.exc_exit is not None and id(b.exc_exit) in seen else None
    nodes = [n for n in b.nodes if id(n) in seen and n is not b.exit and n is not b.exc_exit]
    nodes.append(b.exit)
    if exc is not None:
        nodes.append(exc)
    for n in nodes:
        n.preds = [(p, lab) for p, lab in n.preds if id(p) in seen]
    for i, n in enumerate(nodes):
        n.id = i
    return Cfg(nodes, b.entry, b.exit, exc, b.temps)


def build_cfg(body: Union[A.Block, A.Expr], *, bool_return: bool = False, void: bool = True) -> Cfg:
    """Graph for a procedure or lambda body.

    An expression body is treated as ``return body;`` unless ``void`` is set,
    in which case it is evaluated for effect.
    """
    b = _Builder(bool_return)
    fr: Frontier = [(b.entry, UNCOND)]
    if isinstance(body, A.Block):
        for i, s in enumerate(body.stmts):
            b.top = i
            fr = b.stmt(s, fr)
    elif void:
        e, fr = b.hoist(body, fr)
        fr = [(b.add(fr, EXPR, expr=e), UNCOND)]
    else:
        b.ret(body, fr, None)
        fr = []
    return _finish(b, fr)


def build_init_cfg(inits: list[tuple[Any, A.Expr]]) -> Cfg:
    """Graph assigning field initializer expressions in declaration order."""
    b = _Builder(False)
    fr: Frontier = [(b.entry, UNCOND)]
    for i, (fi, e) in enumerate(inits):
        b.top = i
        e2, fr = b.hoist(e, fr)
        fr = [(b.add(fr, ASSIGN, expr=e2, target=fi), UNCOND)]
    return _finish(b, fr)


def iter_exprs(e: Optional[A.Expr], *, into_lambdas: bool = False) -> list[A.Expr]:
    """Pre-order walk in evaluation order. Lambda bodies are skipped by default."""
    out: list[A.Expr] = []
    stack = [e]
    children = _CHILDREN
    while stack:
        x = stack.pop()
        if x is None:
            continue
        out.append(x)
        names = children.get(type(x))
        if names is None:
            if into_lambdas and isinstance(x, A.Lambda) and not isinstance(x.body, A.Block):
                stack.append(x.body)
            continue
        for name in reversed(names):
            child = getattr(x, name)
            if isinstance(child, list):
                stack.extend(reversed(child))
            else:
                stack.append(child)
    return out


def node_exprs(n: Node) -> tuple[A.Expr, ...]:
    """Expressions evaluated at ``n`` (assignment targets' receivers included)."""
    if n.exprs is None:
        n.exprs = tuple(_node_exprs(n))
    return n.exprs


def _node_exprs(n: Node) -> Iterator[A.Expr]:
    if n.kind == ASSIGN and isinstance(n.target, A.Expr):
        t = n.target
        if isinstance(t, A.FieldAccess):
            yield from iter_exprs(t.target)
        elif isinstance(t, A.ArrayIndex):
            yield from iter_exprs(t.array)
            yield from iter_exprs(t.index)
    if n.kind == RETURN_BOOL:
        return
    yield from iter_exprs(n.expr)
