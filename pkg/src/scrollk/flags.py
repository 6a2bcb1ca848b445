"""Flag S-values inside a fiber of the scroll, and the pointwise delta bound.

A fiber of the scroll is a projective plane; refining the fiber by a line
through a point, or by the exceptional curve of a weighted blowup of the
distinguished point, gives the flag S-values below in closed form.  For a
non-torus-invariant terminal point the exact value is replaced by the
maximum over the two torus-fixed endpoints, which is an upper bound by
lower semicontinuity along the terminal curve.

delta_point_bound assembles caller-supplied (A, S) pairs into the
three-term minimum that bounds the local stability threshold from below.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .scroll import ScrollTriple, s_closed_form


class NonPositiveEntry(Exception):
    """delta_point_bound requires strictly positive A and S entries."""


class FlagKind(enum.Enum):
    LINE = "line"
    BLOWUP = "blowup"


class FlagTerminal(enum.Enum):
    TORUS_POINT_ALPHA = "torus-point-alpha"
    TORUS_POINT_BETA = "torus-point-beta"
    GENERAL_POINT = "general-point"


@dataclass(frozen=True)
class FlagSpec:
    """A fiber flag: a coordinate line, or a weighted blowup of a point."""

    kind: FlagKind
    i1: int | None = None
    weights: tuple[int, int] | None = None
    terminal: FlagTerminal = FlagTerminal.GENERAL_POINT

    @classmethod
    def line(cls, i1: int, terminal: FlagTerminal = FlagTerminal.GENERAL_POINT):
        if i1 not in (1, 2, 3):
            raise ValueError("line index must be 1, 2 or 3")
        return cls(FlagKind.LINE, i1=i1, terminal=terminal)

    @classmethod
    def blowup(cls, a1: int, a2: int, terminal: FlagTerminal = FlagTerminal.GENERAL_POINT):
        _check_weights(a1, a2)
        return cls(FlagKind.BLOWUP, weights=(a1, a2), terminal=terminal)


def _check_weights(a1: int, a2: int) -> None:
    if a1 < 1 or a2 < 1:
        raise ValueError("blowup weights must be positive")
    if gcd(a1, a2) != 1:
        raise ValueError(f"blowup weights ({a1},{a2}) must be coprime")


def _others(i1: int) -> tuple[int, int]:
    return tuple(i for i in (1, 2, 3) if i != i1)


def s_line(t: ScrollTriple, i1: int) -> Fraction:
    """S of the coordinate line x_{i1} = 0 inside a fiber.

    Equals the divisor value S(M; D_{i1}) = (1 + d_{i1}/total)/4: refining
    through the line picks up exactly the coordinate-divisor statistics.
    """
    if i1 not in (1, 2, 3):
        raise ValueError("line index must be 1, 2 or 3")
    return s_closed_form(t, f"D{i1}")


def s_line_terminal(t: ScrollTriple, i1: int, j: int) -> Fraction:
    """Exact terminal S at the torus-fixed endpoint of the line on x_j = 0."""
    if j == i1 or j not in (1, 2, 3):
        raise ValueError("endpoint index must differ from the line index")
    return s_closed_form(t, f"D{j}")


def s_line_point_bound(t: ScrollTriple, i1: int) -> Fraction:
    """Upper bound for the terminal S at any point of the line.

    The bound is the larger of the two torus-fixed endpoint values,
    (1 + max(d_{i2}, d_{i3})/total)/4.
    """
    i2, i3 = _others(i1)
    return max(s_line_terminal(t, i1, i2), s_line_terminal(t, i1, i3))


def s_blowup(t: ScrollTriple, a1: int, a2: int) -> Fraction:
    """S of the exceptional curve of the (a1,a2)-weighted blowup.

    The blowup is at the point x1 = x2 = 0 of the fiber with weights on
    (x1, x2); the value is a1*S(M;D1) + a2*S(M;D2), i.e.

        (a1 + a2 + (a1 d1 + a2 d2)/(d1+d2+d3)) / 4.
    """
    _check_weights(a1, a2)
    return a1 * s_closed_form(t, "D1") + a2 * s_closed_form(t, "D2")


def s_blowup_terminal(t: ScrollTriple, a1: int, a2: int, i: int) -> Fraction:
    """Exact terminal S at the torus-fixed point of the exceptional curve.

    q_i is where the exceptional curve meets the strict transform of the
    line x_i = 0; its value is S(M; D_i) divided by the other weight.
    """
    _check_weights(a1, a2)
    if i == 1:
        return s_closed_form(t, "D1") / a2
    if i == 2:
        return s_closed_form(t, "D2") / a1
    raise ValueError("terminal index must be 1 or 2")


def s_blowup_point_bound(t: ScrollTriple, a1: int, a2: int) -> Fraction:
    """Upper bound for the terminal S at any point of the exceptional curve."""
    return max(s_blowup_terminal(t, a1, a2, 1), s_blowup_terminal(t, a1, a2, 2))


@dataclass(frozen=True)
class DeltaEntry:
    label: str
    a_value: Fraction
    s_value: Fraction
    provenance: str = "computed"

    @property
    def ratio(self) -> Fraction:
        return self.a_value / self.s_value


@dataclass(frozen=True)
class DeltaCertificate:
    """Lower bound for the local delta at a point, with its witnesses.

    ``conclusion`` is the minimum of the entry ratios; ``strict`` records
    whether the bound exceeds 1 strictly, which is what the pointwise
    criterion needs.
    """

    entries: tuple[DeltaEntry, ...]
    conclusion: Fraction

    @property
    def strict(self) -> bool:
        return self.conclusion > 1

    @property
    def weakest(self) -> DeltaEntry:
        return min(self.entries, key=lambda e: e.ratio)


def delta_point_bound(entries: Iterable[DeltaEntry | Sequence]) -> DeltaCertificate:
    """Combine (A, S) pairs into the minimum-ratio lower bound for delta_p.

    Entries may be DeltaEntry values or bare (A, S) / (label, A, S) tuples.
    Every A and S must be strictly positive.
    """
    normalized = []
    for i, e in enumerate(entries):
        if not isinstance(e, DeltaEntry):
            if len(e) == 2:
                e = DeltaEntry(f"entry{i}", Fraction(e[0]), Fraction(e[1]))
            else:
                e = DeltaEntry(str(e[0]), Fraction(e[1]), Fraction(e[2]))
        if e.a_value <= 0 or e.s_value <= 0:
            raise NonPositiveEntry(f"{e.label}: A={e.a_value}, S={e.s_value}")
        normalized.append(e)
    if not normalized:
        raise ValueError("at least one entry required")
    conclusion = min(e.ratio for e in normalized)
    return DeltaCertificate(tuple(normalized), conclusion)
