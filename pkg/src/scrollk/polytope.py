"""Exact rational convex-polytope geometry in three coordinates.

Polytopes are stored in half-space form { y : <normal, y> >= -offset } with
integer normals and rational offsets.  All measures (vertex enumeration,
volumes, integrals of affine functionals) are computed in exact rational
arithmetic; there is no floating point anywhere in this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Callable, Iterable, Sequence


class UnboundedPolytope(Exception):
    """The half-space system admits a nonzero recession direction."""


class DegreeMismatch(Exception):
    """A sampled function is not polynomial of the promised degree on a piece."""


Vec3 = tuple[Fraction, Fraction, Fraction]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _dot(a, b) -> Fraction:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _det3(r0, r1, r2) -> Fraction:
    return _dot(r0, _cross(r1, r2))


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-space { y : <normal, y> >= -offset }.

    The normal is reduced to a primitive integer vector on construction
    (offset rescaled accordingly) so that equal half-spaces compare equal.
    """

    normal: tuple[int, int, int]
    offset: Fraction

    def __init__(self, normal: Sequence[int], offset=0):
        n = tuple(int(c) for c in normal)
        if n == (0, 0, 0):
            raise ValueError("half-space normal must be nonzero")
        off = _frac(offset)
        g = gcd(gcd(abs(n[0]), abs(n[1])), abs(n[2]))
        if g > 1:
            n = (n[0] // g, n[1] // g, n[2] // g)
            off = off / g
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", off)

    def contains(self, point: Sequence[Fraction]) -> bool:
        return _dot(self.normal, point) >= -self.offset

    def on_boundary(self, point: Sequence[Fraction]) -> bool:
        return _dot(self.normal, point) == -self.offset

    def complement(self) -> "HalfSpace":
        """The closed complement { y : <normal, y> <= -offset }."""
        n = self.normal
        return HalfSpace((-n[0], -n[1], -n[2]), -self.offset)


@dataclass(frozen=True)
class Polytope:
    """Intersection of finitely many half-spaces, with cached vertices.

    Immutable; ``clip`` returns a new polytope.  Vertex enumeration is by
    exhaustive facet-triple intersection, which is exact and fast for the
    small systems (< 12 facets) this library produces.
    """

    halfspaces: tuple[HalfSpace, ...]

    def __init__(self, halfspaces: Iterable[HalfSpace]):
        seen = []
        for h in halfspaces:
            if h not in seen:
                seen.append(h)
        object.__setattr__(self, "halfspaces", tuple(seen))

    def _check_bounded(self) -> None:
        """Raise UnboundedPolytope if a recession direction exists.

        The recession cone {d : <n_i, d> >= 0 for all i} is nontrivial iff
        either the normals do not span 3-space (kernel direction) or, the
        cone being pointed, one of its extreme rays +-(n_i x n_j) is
        feasible.
        """
        normals = [h.normal for h in self.halfspaces]
        rank = 0
        basis: list[tuple] = []
        for n in normals:
            cand = basis + [n]
            if len(cand) == 1 and n != (0, 0, 0):
                basis = cand
            elif len(cand) == 2 and _cross(cand[0], cand[1]) != (0, 0, 0):
                basis = cand
            elif len(cand) == 3 and _det3(*cand) != 0:
                basis = cand
            if len(basis) == 3:
                rank = 3
                break
        if rank < 3:
            raise UnboundedPolytope("half-space normals do not span 3-space")
        for a, b in itertools.combinations(normals, 2):
            d = _cross(a, b)
            if d == (0, 0, 0):
                continue
            for ray in (d, (-d[0], -d[1], -d[2])):
                if all(_dot(n, ray) >= 0 for n in normals):
                    raise UnboundedPolytope(f"recession direction {ray}")

    @cached_property
    def vertices(self) -> tuple[Vec3, ...]:
        """All extreme points, deduplicated and lexicographically sorted."""
        self._check_bounded()
        hs = self.halfspaces
        found: set[Vec3] = set()
        for hi, hj, hk in itertools.combinations(hs, 3):
            rows = (hi.normal, hj.normal, hk.normal)
            det = _det3(*rows)
            if det == 0:
                continue
            rhs = (-hi.offset, -hj.offset, -hk.offset)
            # Cramer's rule, exact.
            point = tuple(
                _det3(*(rows[r][:c] + (rhs[r],) + rows[r][c + 1:] for r in range(3))) / det
                for c in range(3)
            )
            if all(h.contains(point) for h in hs):
                found.add(point)
        return tuple(sorted(found))

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(h.contains(point) for h in self.halfspaces)

    def is_empty(self) -> bool:
        return not self.vertices

    def clip(self, h: HalfSpace) -> "Polytope":
        """Intersect with one more half-space (fresh vertex cache)."""
        return Polytope(self.halfspaces + (h,))

    @cached_property
    def _facet_triangles(self) -> tuple:
        """Triangles (a, b, c) fanning every facet polygon.

        Facet polygons are walked by exact gift wrapping; facets containing
        the apex used by the volume fan still get emitted (their
        tetrahedra are flat and contribute zero).
        """
        verts = self.vertices
        triangles = []
        for h in self.halfspaces:
            on_facet = [v for v in verts if h.on_boundary(v)]
            if len(on_facet) < 3:
                continue
            ring = _wrap_polygon(on_facet, h.normal)
            if ring is None:
                continue
            for i in range(1, len(ring) - 1):
                triangles.append((ring[0], ring[i], ring[i + 1]))
        return tuple(triangles)

    def volume(self) -> Fraction:
        """Exact Euclidean volume; 0 for empty or lower-dimensional bodies."""
        verts = self.vertices
        if len(verts) < 4:
            return Fraction(0)
        apex = verts[0]
        total = Fraction(0)
        for a, b, c in self._facet_triangles:
            total += abs(_det3(_sub(a, apex), _sub(b, apex), _sub(c, apex)))
        return total / 6

    def integrate_affine(self, c: Sequence, c0=0) -> Fraction:
        """Exact integral of <c, y> + c0 over the polytope.

        Triangulates by fanning from the lexicographically smallest vertex;
        on each tetrahedron an affine functional integrates to the simplex
        volume times the average of its four vertex values.
        """
        verts = self.vertices
        if len(verts) < 4:
            return Fraction(0)
        cv = tuple(_frac(x) for x in c)
        c0 = _frac(c0)
        apex = verts[0]
        f_apex = _dot(cv, apex) + c0
        total = Fraction(0)
        for a, b, d in self._facet_triangles:
            vol6 = abs(_det3(_sub(a, apex), _sub(b, apex), _sub(d, apex)))
            if vol6 == 0:
                continue
            mean = (f_apex + _dot(cv, a) + _dot(cv, b) + _dot(cv, d) + 3 * c0) / 4
            total += vol6 * mean
        return total / 6


def _wrap_polygon(points: list[Vec3], normal) -> list[Vec3] | None:
    """Order coplanar extreme points along their convex-polygon boundary.

    Returns None when the points are collinear (the facet is at most an
    edge).  No three polygon vertices can be collinear because every input
    point is an extreme point of the polytope.
    """
    if len(points) < 3:
        return None
    if all(
        _cross(_sub(p, points[0]), _sub(points[1], points[0])) == (0, 0, 0)
        for p in points[2:]
    ):
        return None
    start = min(points)
    ring = [start]
    current = start
    while True:
        nxt = None
        for q in points:
            if q == current:
                continue
            edge = _sub(q, current)
            if all(
                _dot(normal, _cross(edge, _sub(p, current))) >= 0
                for p in points
                if p != current and p != q
            ):
                nxt = q
                break
        if nxt is None:
            raise RuntimeError("facet walk stuck on non-convex input")
        if nxt == start:
            break
        ring.append(nxt)
        current = nxt
        if len(ring) > len(points):
            raise RuntimeError("facet walk failed to close")
    return ring


def enumerate_vertices(p: Polytope) -> tuple[Vec3, ...]:
    return p.vertices


def volume(p: Polytope) -> Fraction:
    return p.volume()


def integrate_affine(p: Polytope, c: Sequence, c0=0) -> Fraction:
    return p.integrate_affine(c, c0)


def clip(p: Polytope, h: HalfSpace) -> Polytope:
    return p.clip(h)


def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Coefficients (ascending powers) of the unique interpolating polynomial."""
    n = len(xs)
    # Newton divided differences, then expansion into the monomial basis.
    table = list(ys)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - level])
    coeffs = [Fraction(0)] * n
    coeffs[0] = table[n - 1]
    # Horner-style expansion of sum table[k] * prod (x - xs[j], j < k).
    for k in range(n - 2, -1, -1):
        for j in range(n - 1, 0, -1):
            coeffs[j] = coeffs[j - 1] - xs[k] * coeffs[j]
        coeffs[0] = table[k] - xs[k] * coeffs[0]
    return tuple(coeffs)


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on consecutive breakpoint intervals.

    ``pieces[i]`` holds ascending-power coefficients valid on
    [breakpoints[i], breakpoints[i+1]].
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[tuple[Fraction, ...], ...] = field(default=())

    @classmethod
    def from_samples(
        cls,
        f: Callable[[Fraction], Fraction],
        breakpoints: Sequence,
        degree: int = 3,
    ) -> "PiecewisePoly":
        """Interpolate ``f`` piecewise from degree+1 evenly spaced samples.

        A fifth sample per piece (at 1/(2*degree) of the interval) guards
        against callers supplying wrong breakpoints: if it disagrees with
        the interpolant the function is not a degree-``degree`` polynomial
        there and DegreeMismatch is raised.
        """
        bps = tuple(_frac(b) for b in breakpoints)
        if len(bps) < 2 or any(b >= c for b, c in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        pieces = []
        for a, b in zip(bps, bps[1:]):
            step = (b - a) / degree
            xs = [a + i * step for i in range(degree + 1)]
            ys = [_frac(f(x)) for x in xs]
            coeffs = _interpolate(xs, ys)
            probe = a + (b - a) / (2 * degree)
            if _poly_eval(coeffs, probe) != _frac(f(probe)):
                raise DegreeMismatch(
                    f"sample at u={probe} deviates from the degree-{degree} "
                    f"interpolant on [{a}, {b}]"
                )
            pieces.append(coeffs)
        return cls(bps, tuple(pieces))

    def evaluate(self, x) -> Fraction:
        x = _frac(x)
        bps = self.breakpoints
        if not (bps[0] <= x <= bps[-1]):
            raise ValueError(f"{x} outside [{bps[0]}, {bps[-1]}]")
        for i in range(len(self.pieces)):
            if x <= bps[i + 1]:
                return _poly_eval(self.pieces[i], x)
        raise AssertionError("unreachable")

    def integral(self) -> Fraction:
        """Exact integral over the whole breakpoint range."""
        total = Fraction(0)
        for (a, b), coeffs in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            for k, ck in enumerate(coeffs):
                total += ck * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
        return total


def integrate_piecewise(
    f: Callable[[Fraction], Fraction],
    breakpoints: Sequence,
    degree_bound: int = 3,
) -> Fraction:
    """Exact integral of a piecewise-polynomial sampled function.

    ``f`` must be polynomial of degree <= degree_bound between consecutive
    breakpoints; this holds for u |-> vol of a linearly clipped 3-polytope
    with the clip thresholds among the breakpoints.
    """
    return PiecewisePoly.from_samples(f, breakpoints, degree_bound).integral()
