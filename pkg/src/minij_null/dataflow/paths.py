"""Access paths and the nullness store keyed by them."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional

from ..semantics.nullness import JOIN, MEET, Nullness

MAX_DEPTH = 5
THIS = "this"
CLASS_PREFIX = "C:"

_NULLABLE = Nullness.NULLABLE
_NONNULL = Nullness.NONNULL


class AccessPath(NamedTuple):
    """``root`` is a local name, ``this``, or ``C:<qualified class>`` for statics.

    Links are field names, or method names suffixed with ``()`` for
    no-argument calls.
    """

    root: str
    links: tuple[str, ...] = ()

    def extend(self, link: str) -> Optional["AccessPath"]:
        if len(self.links) >= MAX_DEPTH:
            return None
        return AccessPath(self.root, self.links + (link,))

    def extends(self, prefix: "AccessPath") -> bool:
        """True when ``self`` strictly extends ``prefix``."""
        n = len(prefix.links)
        return self.root == prefix.root and len(self.links) > n and self.links[:n] == prefix.links

    def rerooted(self, root: str) -> "AccessPath":
        return AccessPath(root, self.links)

    @property
    def is_field_of_receiver(self) -> bool:
        """A length-1 path on ``this`` or a class root, i.e. a field of the object under construction."""
        return len(self.links) == 1 and (self.root == THIS or self.root.startswith(CLASS_PREFIX)) \
            and not self.links[0].endswith("()")

    def __str__(self) -> str:
        root = self.root[len(CLASS_PREFIX):] if self.root.startswith(CLASS_PREFIX) else self.root
        return ".".join((root,) + self.links)


class Defaults:
    """Declared nullness of every path the analysis of one procedure mentions.

    A path missing from a store has exactly this value. Unknown paths default to
    Nullable.
    """

    __slots__ = ("table",)

    def __init__(self, table: Optional[dict[AccessPath, Nullness]] = None):
        self.table: dict[AccessPath, Nullness] = dict(table) if table else {}

    def __getitem__(self, path: AccessPath) -> Nullness:
        return self.table.get(path, _NULLABLE)

    def register(self, path: AccessPath, nullness: Nullness) -> None:
        self.table.setdefault(path, nullness)

    def copy(self) -> "Defaults":
        return Defaults(self.table)


class NullnessStore:
    """Immutable map from access path to nullness plus the definitely-assigned set.

    ``facts`` never holds an entry equal to the path's default. ``definite``
    holds receiver fields that were assigned or refined NonNull on every path
    reaching this point; it joins by intersection.
    """

    __slots__ = ("facts", "definite", "_hash")

    def __init__(self, facts: Optional[dict[AccessPath, Nullness]] = None,
                 definite: frozenset = frozenset()):
        self.facts: dict[AccessPath, Nullness] = facts if facts is not None else {}
        self.definite: frozenset[AccessPath] = definite
        self._hash: Optional[int] = None

    EMPTY: "NullnessStore"

    def get(self, path: AccessPath, defaults: Defaults) -> Nullness:
        v = self.facts.get(path)
        return v if v is not None else defaults[path]

    def has(self, path: AccessPath) -> bool:
        return path in self.facts

    def set(self, path: AccessPath, value: Nullness, defaults: Defaults, *, kill: bool = False) -> "NullnessStore":
        """Return a store where ``path`` maps to ``value``.

        With ``kill`` set, facts for strict extensions of ``path`` are dropped
        (the location was overwritten).
        """
        facts = self.facts
        if kill and facts:
            facts = {k: v for k, v in facts.items() if not k.extends(path)}
        else:
            facts = dict(facts)
        if value == defaults[path]:
            facts.pop(path, None)
        else:
            facts[path] = value
        definite = self.definite
        if path.is_field_of_receiver:
            if value is _NONNULL:
                definite = definite | {path}
            elif path in definite:
                definite = definite - {path}
        return NullnessStore(facts, definite)

    def forget(self, path: AccessPath) -> "NullnessStore":
        """Drop ``path`` and its extensions, returning them to their defaults."""
        facts = {k: v for k, v in self.facts.items() if k != path and not k.extends(path)}
        definite = self.definite - {path} if path in self.definite else self.definite
        return NullnessStore(facts, definite)

    def refine(self, path: AccessPath, value: Nullness, defaults: Defaults) -> "NullnessStore":
        """Set ``path`` to ``value`` without killing extensions (a test, not a write)."""
        return self.set(path, value, defaults)

    def strengthen(self, path: AccessPath, value: Nullness, defaults: Defaults) -> Optional["NullnessStore"]:
        """Meet ``path`` with ``value``; ``None`` when the two contradict (unreachable)."""
        cur = self.get(path, defaults)
        m = MEET[cur][value]
        if m is Nullness.BOTTOM:
            return None
        if m == cur and (m is not _NONNULL or path in self.definite or not path.is_field_of_receiver):
            return self
        return self.set(path, m, defaults)

    def items(self) -> Iterable[tuple[AccessPath, Nullness]]:
        return self.facts.items()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NullnessStore) and self.facts == other.facts and self.definite == other.definite

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self.facts.items()), self.definite))
        return self._hash

    def leq(self, other: "NullnessStore", defaults: Defaults) -> bool:
        """Pointwise order on facts; reverse inclusion on the definite set."""
        for k in self.facts.keys() | other.facts.keys():
            a = self.facts.get(k)
            b = other.facts.get(k)
            d = defaults[k]
            if JOIN[a if a is not None else d][b if b is not None else d] != (b if b is not None else d):
                return False
        return other.definite <= self.definite

    def render(self) -> str:
        parts = [f"{p}={v}" for p, v in sorted(self.facts.items(), key=lambda kv: str(kv[0]))]
        parts += [f"{p}!" for p in sorted(map(str, self.definite))]
        return ", ".join(parts)

    def __repr__(self) -> str:
        return f"NullnessStore({self.render()})"


NullnessStore.EMPTY = NullnessStore()


def join(a: Optional[NullnessStore], b: Optional[NullnessStore], defaults: Defaults) -> Optional[NullnessStore]:
    """Join of two stores; ``None`` is the unreachable store."""
    if a is None:
        return b
    if b is None or a is b:
        return a
    fa, fb = a.facts, b.facts
    facts: dict[AccessPath, Nullness] = {}
    if fa or fb:
        for k in fa.keys() | fb.keys():
            d = defaults[k]
            x = fa.get(k, d)
            y = fb.get(k, d)
            v = JOIN[x][y]
            if v != d:
                facts[k] = v
    definite = a.definite & b.definite if a.definite and b.definite else frozenset()
    return NullnessStore(facts, definite)


def join_all(stores: Iterable[Optional[NullnessStore]], defaults: Defaults) -> Optional[NullnessStore]:
    out: Optional[NullnessStore] = None
    first = True
    for s in stores:
        if first:
            out, first = s, False
        else:
            out = join(out, s, defaults)
    return out
