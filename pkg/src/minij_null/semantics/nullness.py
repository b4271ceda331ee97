"""The four-point nullness lattice.

``BOTTOM`` and ``NULL`` never appear on declarations; they are refinements
produced by dataflow. ``NULL`` and ``NONNULL`` are incomparable.
"""

from __future__ import annotations

import enum


class Nullness(enum.IntEnum):
    BOTTOM = 0
    NULL = 1
    NONNULL = 2
    NULLABLE = 3

    def __str__(self) -> str:
        return _NAMES[self]

    def join(self, other: Nullness) -> Nullness:
        return JOIN[self][other]

    def meet(self, other: Nullness) -> Nullness:
        return MEET[self][other]

    def leq(self, other: Nullness) -> bool:
        return JOIN[self][other] is other

    @property
    def may_be_null(self) -> bool:
        return self is Nullness.NULL or self is Nullness.NULLABLE

    @classmethod
    def parse(cls, text: str) -> Nullness:
        key = text.strip().lower()
        for n, name in _NAMES.items():
            if name.lower() == key:
                return n
        raise ValueError(f"unknown nullness {text!r}")


_NAMES = {
    Nullness.BOTTOM: "Bottom",
    Nullness.NULL: "Null",
    Nullness.NONNULL: "NonNull",
    Nullness.NULLABLE: "Nullable",
}

_B, _N, _NN, _NA = Nullness.BOTTOM, Nullness.NULL, Nullness.NONNULL, Nullness.NULLABLE

# indexed [a][b]
JOIN = (
    (_B, _N, _NN, _NA),
    (_N, _N, _NA, _NA),
    (_NN, _NA, _NN, _NA),
    (_NA, _NA, _NA, _NA),
)
MEET = (
    (_B, _B, _B, _B),
    (_B, _N, _B, _N),
    (_B, _B, _NN, _NN),
    (_B, _N, _NN, _NA),
)


def assignable(src: Nullness, dst: Nullness) -> bool:
    """Whether a value of nullness ``src`` may flow into a slot declared ``dst``."""
    return JOIN[src][dst] is dst
