"""Branch-surface polynomials on the scroll and their valuation data.

Branch surfaces live in the quartic class 4*M + 2*(2 - d1 - d2 - d3)*L and
are written in the homogeneous coordinates (x1:x2:x3; t1:t2).  This module
parses their defining polynomials, computes weighted orders along toric
valuations, the induced log discrepancies of the half-branch pair, and
inverts the monomial degree bookkeeping to recover candidate scrolls.

Grammar (whitespace insignificant, '*' mandatory for products):

    poly    := term (('+'|'-') term)*
    term    := factor ('*' factor)*
    factor  := coeff | var power? | '(' poly ')'
    var     := 'x1'|'x2'|'x3'|'t1'|'t2'
    power   := '^' positive-integer
    coeff   := integer | integer '/' positive-integer
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .scroll import ScrollTriple, ToricValuation


class ParseError(Exception):
    """Syntax error, carrying the 0-based position in the source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NonQuarticError(Exception):
    """A monomial violates the quartic constraint m1 + m2 + m3 = 4."""


class UnknownSingularity(Exception):
    """No stored weighted order for this singularity/weights combination."""


#: Coordinate order used for exponent tuples.
X_VARS = ("x1", "x2", "x3")
T_VARS = ("t1", "t2")

#: Which polynomial coordinate each fan ray carries.
RAY_COORDINATE = {"e1": "x1", "e2": "x2", "e3": "x3", "u1": "t1", "u2": "t2"}


@dataclass(frozen=True)
class Monomial:
    x_exponents: tuple[int, int, int]
    t_exponents: tuple[int, int]
    coefficient: Fraction

    @property
    def x_degree(self) -> int:
        return sum(self.x_exponents)

    @property
    def t_degree(self) -> int:
        return sum(self.t_exponents)

    def exponent_of(self, variable: str) -> int:
        if variable in X_VARS:
            return self.x_exponents[X_VARS.index(variable)]
        return self.t_exponents[T_VARS.index(variable)]

    def __str__(self) -> str:
        parts = []
        if self.coefficient != 1 or (self.x_degree == 0 and self.t_degree == 0):
            parts.append(str(self.coefficient))
        for names, exps in ((X_VARS, self.x_exponents), (T_VARS, self.t_exponents)):
            for name, e in zip(names, exps):
                if e == 1:
                    parts.append(name)
                elif e > 1:
                    parts.append(f"{name}^{e}")
        return "*".join(parts)


@dataclass(frozen=True)
class BranchPoly:
    """Expanded, collected polynomial; printing round-trips through parse."""

    monomials: tuple[Monomial, ...]
    source_text: str = ""

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BranchPoly)
            and set(self.monomials) == set(other.monomials)
        )

    def __str__(self) -> str:
        out = []
        for i, m in enumerate(self.monomials):
            if m.coefficient < 0:
                body = str(
                    Monomial(m.x_exponents, m.t_exponents, -m.coefficient)
                )
                out.append(f"- {body}" if i else f"-{body}")
            else:
                out.append(f"+ {m}" if i else str(m))
        return " ".join(out)

    def divisible_by(self, variable: str) -> bool:
        return all(m.exponent_of(variable) >= 1 for m in self.monomials)

    def observations(self) -> tuple[tuple[tuple[int, int, int], int], ...]:
        """Deduplicated (x-exponents, total t-degree) pairs, one per monomial."""
        seen = sorted({(m.x_exponents, m.t_degree) for m in self.monomials})
        return tuple(seen)


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("NUMBER", int(text[i:j]), i))
            i = j
            continue
        if ch in "xt" and i + 1 < len(text) and text[i + 1] in "123":
            name = text[i:i + 2]
            if name in X_VARS + T_VARS:
                tokens.append(("VAR", name, i))
                i += 2
                continue
        simple = {"+": "PLUS", "-": "MINUS", "*": "TIMES", "^": "CARET",
                  "/": "SLASH", "(": "LPAREN", ")": "RPAREN"}
        if ch in simple:
            tokens.append((simple[ch], ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("END", None, len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token stream; values are monomial dicts."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind: str):
        tok = self.tokens[self.pos]
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def parse(self):
        result = self.poly()
        tok = self.peek()
        if tok[0] != "END":
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return result

    def poly(self):
        sign = 1
        if self.peek()[0] in ("PLUS", "MINUS"):
            sign = -1 if self.take(self.peek()[0])[0] == "MINUS" else 1
        acc = _scale(self.term(), sign)
        while self.peek()[0] in ("PLUS", "MINUS"):
            op = self.take(self.peek()[0])[0]
            rhs = self.term()
            acc = _add(acc, _scale(rhs, -1 if op == "MINUS" else 1))
        return acc

    def term(self):
        acc = self.factor()
        while self.peek()[0] == "TIMES":
            self.take("TIMES")
            acc = _mul(acc, self.factor())
        return acc

    def factor(self):
        tok = self.peek()
        if tok[0] == "NUMBER":
            num = self.take("NUMBER")[1]
            if self.peek()[0] == "SLASH":
                self.take("SLASH")
                dtok = self.take("NUMBER")
                if dtok[1] == 0:
                    raise ParseError("zero denominator", dtok[2])
                return {_ONE_KEY: Fraction(num, dtok[1])}
            return {_ONE_KEY: Fraction(num)}
        if tok[0] == "VAR":
            name = self.take("VAR")[1]
            power = 1
            if self.peek()[0] == "CARET":
                self.take("CARET")
                ptok = self.take("NUMBER")
                if ptok[1] < 1:
                    raise ParseError("exponent must be positive", ptok[2])
                power = ptok[1]
            x = [0, 0, 0]
            t = [0, 0]
            if name in X_VARS:
                x[X_VARS.index(name)] = power
            else:
                t[T_VARS.index(name)] = power
            return {(tuple(x), tuple(t)): Fraction(1)}
        if tok[0] == "LPAREN":
            self.take("LPAREN")
            inner = self.poly()
            self.take("RPAREN")
            return inner
        raise ParseError(f"expected a factor, found {tok[1]!r}", tok[2])


_ONE_KEY = ((0, 0, 0), (0, 0))


def _add(a, b):
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, Fraction(0)) + c
        if out[key] == 0:
            del out[key]
    return out


def _scale(a, s):
    if s == 1:
        return a
    return {key: c * s for key, c in a.items()}


def _mul(a, b):
    out = {}
    for (xa, ta), ca in a.items():
        for (xb, tb), cb in b.items():
            key = (
                tuple(p + q for p, q in zip(xa, xb)),
                tuple(p + q for p, q in zip(ta, tb)),
            )
            out[key] = out.get(key, Fraction(0)) + ca * cb
            if out[key] == 0:
                del out[key]
    return out


def parse(text: str, *, quartic: bool = True) -> BranchPoly:
    """Parse into collected monomial form, distributing all products.

    With ``quartic`` set (branch mode, the default) every monomial must
    have total x-degree 4, the degree of the branch class.

    >>> str(parse("x1*(x2^3+x3^3)"))
    'x1*x2^3 + x1*x3^3'
    """
    terms = _Parser(text).parse()
    if not terms:
        raise ParseError("polynomial is identically zero", len(text))
    monomials = tuple(
        Monomial(x, t, c)
        for (x, t), c in sorted(terms.items(), reverse=True)
    )
    if quartic:
        for m in monomials:
            if m.x_degree != 4:
                raise NonQuarticError(
                    f"monomial {m} has x-degree {m.x_degree}, expected 4"
                )
    return BranchPoly(monomials, text)


def coefficient_t_degree(t: ScrollTriple, m: Monomial | tuple[int, int, int]) -> int:
    """Base degree of the coefficient attached to the x-class of ``m``.

    A quartic-class section with x-exponents (m1,m2,m3) carries a binary
    form of degree m1*d1 + m2*d2 + m3*d3 + 2*(2 - d1 - d2 - d3) in (t1,t2);
    a negative value means the monomial cannot occur on this scroll.
    """
    exps = m.x_exponents if isinstance(m, Monomial) else tuple(m)
    if sum(exps) != 4:
        raise NonQuarticError(f"x-exponents {exps} are not quartic")
    d = t.as_tuple()
    return sum(e * di for e, di in zip(exps, d)) + 2 * (2 - t.total)


def infer_triple(
    observations: Iterable[tuple[Sequence[int], int]],
    *,
    degree: int | None = None,
    d1_max: int = 12,
) -> set[ScrollTriple]:
    """All scrolls consistent with observed coefficient degrees.

    Each observation pins one linear constraint
    m1*d1 + m2*d2 + m3*d3 + 2*(2 - d1 - d2 - d3) = observed degree.  Sparse
    two-class equations can leave several solutions; passing the
    anticanonical ``degree`` of the double cover adds the constraint
    2*(d1 + d2 + d3) = degree and resolves those ties.
    """
    obs = [(tuple(int(e) for e in exps), int(deg)) for exps, deg in observations]
    if not obs:
        raise ValueError("at least one observation required")
    solutions = set()
    for d1 in range(1, d1_max + 1):
        for d2 in range(0, d1 + 1):
            for d3 in range(0, d2 + 1):
                if degree is not None and 2 * (d1 + d2 + d3) != degree:
                    continue
                t = ScrollTriple(d1, d2, d3)
                if all(coefficient_t_degree(t, exps) == deg for exps, deg in obs):
                    solutions.add(t)
    return solutions


def ord_along(v: ToricValuation, p: BranchPoly) -> Fraction:
    """Weighted order of the polynomial along a toric valuation.

    Each ray weights its own coordinate (x_i on e_i, t_j on u_j); the order
    of a monomial is the weighted sum of its exponents over the rays of the
    valuation's cone, and the order of the polynomial is the minimum.
    """
    best = None
    for m in p.monomials:
        total = Fraction(0)
        for ray, coeff in v.cone_coefficients.items():
            total += coeff * m.exponent_of(RAY_COORDINATE[ray])
        if best is None or total < best:
            best = total
    return best


@dataclass(frozen=True)
class PairLogDiscrepancy:
    """Log discrepancy of the pair (scroll, half the branch surface).

    value = ambient_a - branch_ord / 2, where ambient_a is the toric log
    discrepancy of the valuation and branch_ord the weighted order of the
    branch polynomial along it.
    """

    ambient_a: Fraction
    branch_ord: Fraction

    @property
    def value(self) -> Fraction:
        return self.ambient_a - self.branch_ord / 2


def pair_log_discrepancy(
    t: ScrollTriple, v: ToricValuation | Iterable[int], p: BranchPoly
) -> PairLogDiscrepancy:
    if not isinstance(v, ToricValuation):
        v = ToricValuation.from_vector(t, v)
    return PairLogDiscrepancy(v.log_discrepancy, ord_along(v, p))


class BranchLocalType(enum.Enum):
    """Local type of the branch quartic at the distinguished fiber point."""

    SMOOTH = "smooth"
    NODE = "node"
    CUSP = "cusp"


#: Weighted order of the local branch at the blown-up point, per type:
#: transversal smooth point 1, node 2, cusp y^2 = x^3 under weights (3,2) 6.
_LOCAL_ORDERS = {
    (BranchLocalType.SMOOTH, (1, 1)): Fraction(1),
    (BranchLocalType.NODE, (1, 1)): Fraction(2),
    (BranchLocalType.CUSP, (3, 2)): Fraction(6),
}


def fiber_point_a_value(
    sing: BranchLocalType,
    weights: tuple[int, int],
    *,
    explicit_order=None,
) -> Fraction:
    """Pair log discrepancy of the weighted blowup at the special point.

    Returns (a1 + a2) - ord/2 with the branch order looked up by type, or
    taken from ``explicit_order`` for combinations outside the stored table.
    """
    a1, a2 = (int(weights[0]), int(weights[1]))
    if explicit_order is not None:
        order = Fraction(explicit_order)
    else:
        try:
            order = _LOCAL_ORDERS[(sing, (a1, a2))]
        except KeyError:
            raise UnknownSingularity(
                f"no stored order for {sing} with weights ({a1},{a2}); "
                "pass explicit_order"
            ) from None
    return Fraction(a1 + a2) - order / 2


class PointContext(enum.Enum):
    """Where a terminal flag point sits, for the stored a-value bounds."""

    GENERAL = "general"
    CUSP_EXCEPTIONAL = "cusp-exceptional"


#: Lower bounds for the pair log discrepancy at an arbitrary terminal
#: point: 1/2 in general, 1/3 on the exceptional curve of the (3,2) blowup.
_A_POINT_BOUNDS = {
    PointContext.GENERAL: Fraction(1, 2),
    PointContext.CUSP_EXCEPTIONAL: Fraction(1, 3),
}


def a_point_lower_bound(context: PointContext) -> Fraction:
    return _A_POINT_BOUNDS[context]
