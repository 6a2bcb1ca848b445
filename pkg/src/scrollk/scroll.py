"""Toric model of the rational scroll F(d1,d2,d3) over the projective line.

The scroll is the projectivization of O(d1)+O(d2)+O(d3); its fan has the
five rays

    e1 = (1,0,0)   e2 = (0,1,0)   e3 = (-1,-1,0)
    u1 = (d1-d3, d2-d3, 1)        u2 = (0,0,-1)

carrying the torus-invariant divisors D1, D2, D3 (coordinate surfaces
x_i = 0) and F1, F2 (fibers t_j = 0).  Divisor classes are written a*M + b*L
with M the tautological class and L the fiber class.  Expected vanishing
orders S(H; w) of toric valuations are computed by exact moment-polytope
averaging and cross-checked against closed forms.

Coordinate convention: the reflection y3 |-> -y3 relating the raw
ray-inequality region to the standard display

    y1 >= 0, y2 >= 0, y3 >= 0, y1 + y2 <= 1,
    y3 <= d3 + (d1-d3) y1 + (d2-d3) y2

is applied once, inside moment_polytope; every valuation pairing uses the
same reflected coordinates, which removes the global sign ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .polytope import HalfSpace, Polytope, integrate_piecewise


class NotBig(Exception):
    """S-values are undefined against a class of volume zero."""


RAY_NAMES = ("e1", "e2", "e3", "u1", "u2")

#: Divisor labels attached to the rays: V(e_i) = D_i, V(u_j) = F_j.
RAY_DIVISORS = {"e1": "D1", "e2": "D2", "e3": "D3", "u1": "F1", "u2": "F2"}
DIVISOR_RAYS = {v: k for k, v in RAY_DIVISORS.items()}


@dataclass(frozen=True, order=True)
class ScrollTriple:
    """Twist degrees d1 >= d2 >= d3 >= 0 of the scroll, with d1 >= 1.

    The totally degenerate (0,0,0) case is rejected: it is not a scroll in
    the family list this library serves.
    """

    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        if not (self.d1 >= self.d2 >= self.d3 >= 0):
            raise ValueError(f"degrees must satisfy d1 >= d2 >= d3 >= 0, got {self}")
        if self.d1 == 0:
            raise ValueError("(0,0,0) is rejected; d1 must be positive")

    @property
    def total(self) -> int:
        return self.d1 + self.d2 + self.d3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.d1, self.d2, self.d3)

    def __str__(self) -> str:
        return f"({self.d1},{self.d2},{self.d3})"


@dataclass(frozen=True)
class Ray:
    name: str
    vector: tuple[int, int, int]


@dataclass(frozen=True)
class Fan:
    rays: tuple[Ray, ...]
    maximal_cones: tuple[tuple[str, str, str], ...]

    def ray(self, name: str) -> Ray:
        for r in self.rays:
            if r.name == name:
                return r
        raise KeyError(name)


def fan(t: ScrollTriple) -> Fan:
    """The complete fan of F(d1,d2,d3): five rays, six maximal cones."""
    rays = (
        Ray("e1", (1, 0, 0)),
        Ray("e2", (0, 1, 0)),
        Ray("e3", (-1, -1, 0)),
        Ray("u1", (t.d1 - t.d3, t.d2 - t.d3, 1)),
        Ray("u2", (0, 0, -1)),
    )
    cones = (
        ("u1", "e1", "e2"),
        ("u1", "e1", "e3"),
        ("u1", "e2", "e3"),
        ("u2", "e1", "e2"),
        ("u2", "e1", "e3"),
        ("u2", "e2", "e3"),
    )
    return Fan(rays, cones)


@dataclass(frozen=True)
class DivisorClass:
    """The class m*M + l*L in the two-dimensional class lattice."""

    m: Fraction
    l: Fraction

    def __init__(self, m=0, l=0):
        object.__setattr__(self, "m", Fraction(m))
        object.__setattr__(self, "l", Fraction(l))

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(self.m + other.m, self.l + other.l)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(self.m - other.m, self.l - other.l)

    def __rmul__(self, scalar) -> "DivisorClass":
        return DivisorClass(Fraction(scalar) * self.m, Fraction(scalar) * self.l)

    def __str__(self) -> str:
        return f"{self.m}*M + {self.l}*L"


M = DivisorClass(1, 0)
L = DivisorClass(0, 1)


@dataclass(frozen=True)
class RayDivisor:
    """A torus-invariant divisor, as coefficients over the five rays."""

    coefficients: Mapping[str, Fraction]

    def __init__(self, coefficients: Mapping[str, Fraction]):
        clean = {
            name: Fraction(c)
            for name, c in coefficients.items()
            if Fraction(c) != 0
        }
        unknown = set(clean) - set(RAY_NAMES)
        if unknown:
            raise ValueError(f"unknown rays {sorted(unknown)}")
        object.__setattr__(self, "coefficients", clean)

    def coefficient(self, name: str) -> Fraction:
        return self.coefficients.get(name, Fraction(0))


def class_to_rays(t: ScrollTriple, c: DivisorClass) -> RayDivisor:
    """Canonical torus-invariant representative: M -> D3 + d3*F1, L -> F1.

    Any other choice differs by a principal divisor and merely translates
    the moment polytope; volumes and S-values are unchanged.
    """
    return RayDivisor({"e3": c.m, "u1": c.m * t.d3 + c.l})


def moment_polytope(t: ScrollTriple, rd: RayDivisor) -> Polytope:
    """Moment polytope { y : <y, v_rho> >= -a_rho } in reflected coordinates.

    The third coordinate of every ray is negated here (the y3 |-> -y3
    convention), so the polytope of M is exactly the displayed region with
    0 <= y3 <= d3 + (d1-d3) y1 + (d2-d3) y2 over the unit triangle.
    """
    halfspaces = []
    for ray in fan(t).rays:
        v = ray.vector
        halfspaces.append(HalfSpace((v[0], v[1], -v[2]), rd.coefficient(ray.name)))
    return Polytope(halfspaces)


@lru_cache(maxsize=4096)
def moment_polytope_of(t: ScrollTriple, c: DivisorClass) -> Polytope:
    # Cached: sweeps evaluate many valuations against the same polytope,
    # and Polytope instances are immutable with lazily cached vertices.
    return moment_polytope(t, class_to_rays(t, c))


def vol(t: ScrollTriple, c: DivisorClass) -> Fraction:
    """Anticanonical-degree-normalized volume: 3! times the polytope volume.

    Equals the intersection cube (a*M + b*L)^3 = a^3*(d1+d2+d3) + 3*a^2*b
    whenever the class is nef, and 0 when the class is not big.
    """
    return 6 * moment_polytope_of(t, c).volume()


@dataclass(frozen=True)
class DegreeGenus:
    degree: int
    genus: int


def degree_and_genus(t: ScrollTriple) -> DegreeGenus:
    """Anticanonical degree 2*(d1+d2+d3) of the double cover, and its genus."""
    degree = 2 * t.total
    return DegreeGenus(degree, degree // 2 + 1)


@dataclass(frozen=True)
class ToricValuation:
    """A toric valuation: integer vector w with its ray-cone coordinates.

    ``cone_coefficients`` expresses w as a nonnegative combination of the
    rays of the smallest fan cone containing it; rays outside that cone get
    coefficient zero (and are omitted from the mapping).  The sum of the
    coefficients is the toric log discrepancy of the valuation.
    """

    w: tuple[int, int, int]
    cone_coefficients: Mapping[str, Fraction]

    @classmethod
    def from_vector(cls, t: ScrollTriple, w: Iterable[int]) -> "ToricValuation":
        wv = tuple(int(c) for c in w)
        if wv == (0, 0, 0):
            raise ValueError("valuation vector must be nonzero")
        f = fan(t)
        for cone in f.maximal_cones:
            rays = [f.ray(name).vector for name in cone]
            coeffs = _solve3(rays, wv)
            if coeffs is not None and all(c >= 0 for c in coeffs):
                mapping = {
                    name: c for name, c in zip(cone, coeffs) if c != 0
                }
                return cls(wv, mapping)
        raise ValueError(f"{wv} lies in no maximal cone")  # complete fan: unreachable

    @classmethod
    def from_rays(cls, t: ScrollTriple, coefficients: Mapping[str, Fraction]) -> "ToricValuation":
        f = fan(t)
        w = [0, 0, 0]
        for name, c in coefficients.items():
            v = f.ray(name).vector
            for i in range(3):
                w[i] += c * v[i]
        return cls.from_vector(t, w)

    @property
    def log_discrepancy(self) -> Fraction:
        return sum(self.cone_coefficients.values(), Fraction(0))

    def coefficient(self, name: str) -> Fraction:
        return self.cone_coefficients.get(name, Fraction(0))


def _solve3(columns, rhs):
    """Solve [c0 c1 c2] x = rhs exactly; None when the columns are singular."""
    a, b, c = columns

    def det(p, q, r):
        return (
            p[0] * (q[1] * r[2] - q[2] * r[1])
            - q[0] * (p[1] * r[2] - p[2] * r[1])
            + r[0] * (p[1] * q[2] - p[2] * q[1])
        )

    d = det(a, b, c)
    if d == 0:
        return None
    return (
        Fraction(det(rhs, b, c), d),
        Fraction(det(a, rhs, c), d),
        Fraction(det(a, b, rhs), d),
    )


def _reflect(w) -> tuple:
    return (Fraction(w[0]), Fraction(w[1]), -Fraction(w[2]))


def s_toric_valuation(t: ScrollTriple, h: DivisorClass, v: ToricValuation | Iterable[int]) -> Fraction:
    """Expected vanishing order S(H; w) of a toric valuation against nef big H.

    Computed on the moment polytope P(H) as the mean of the linear form
    <w, y> minus its minimum, both exact; for w a ray vector this reproduces
    the closed forms of s_closed_form.
    """
    if not isinstance(v, ToricValuation):
        v = ToricValuation.from_vector(t, v)
    p = moment_polytope_of(t, h)
    volume = p.volume()
    if volume == 0:
        raise NotBig(f"{h} has volume zero on {t}")
    w = _reflect(v.w)
    mean = p.integrate_affine(w) / volume
    low = min(_dot3(w, vertex) for vertex in p.vertices)
    return mean - low


def _dot3(a, b) -> Fraction:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def s_closed_form(t: ScrollTriple, which: str) -> Fraction:
    """Closed-form S(M; -) of the five torus-invariant divisors.

    S(M; D_i) = (1 + d_i / (d1+d2+d3)) / 4, while both fibers share

        S(M; F_j) = (d1^2 + d2^2 + d3^2 + d1 d2 + d2 d3 + d3 d1)
                    / (4 (d1 + d2 + d3)).

    The fiber value carries the 4 in the denominator: on (3,1,1) it equals
    9/10, the worked constant the certification chain relies on.
    """
    sigma = t.total
    if which in ("D1", "D2", "D3"):
        d = {"D1": t.d1, "D2": t.d2, "D3": t.d3}[which]
        return Fraction(1, 4) * (1 + Fraction(d, sigma))
    if which in ("F1", "F2", "fiber"):
        q = (
            t.d1 ** 2 + t.d2 ** 2 + t.d3 ** 2
            + t.d1 * t.d2 + t.d2 * t.d3 + t.d3 * t.d1
        )
        return Fraction(q, 4 * sigma)
    raise ValueError(f"unknown divisor {which!r}; expected D1..D3, F1, F2")


def fiber_s_lower_bound(t: ScrollTriple, u_max) -> Fraction:
    """Exact lower bound for the expected vanishing order of a fiber.

    Evaluates (1/(d1+d2+d3)) * integral_0^min(u_max, d1) vol(M - u L) du by
    exact piecewise-cubic integration; the volume is piecewise cubic in u
    with breakpoints at d3, d2, d1 (where cap vertex heights cross zero).
    """
    u_max = Fraction(u_max)
    if u_max <= 0:
        raise ValueError("u_max must be positive")
    hi = min(u_max, Fraction(t.d1))
    cuts = {Fraction(0), hi}
    cuts.update(Fraction(d) for d in t.as_tuple() if 0 < d < hi)
    breakpoints = sorted(cuts)

    def volume_at(u: Fraction) -> Fraction:
        return vol(t, M - u * L)

    return integrate_piecewise(volume_at, breakpoints) / t.total
