"""Decision procedures assembling exact invariants into verdicts.

Four instability tests (fiber S-value, alpha bound, normalized volume,
a divisibility obstruction), a pointwise-delta stability certifier, and a
polystability check list.  Every verdict carries a certificate: a list of
named exact quantities together with the inequalities they witness, all of
which re-evaluate under exact arithmetic.  Group-theoretic hypotheses
(reductivity, fixed-point freeness, finiteness of automorphisms) cannot be
checked here; they are recorded as assertions and surfaced in the output.

Instability tests use strict inequalities throughout: a boundary case such
as 16 = 16 on (4,0,0) never fires.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import branch as branch_mod
from .branch import (
    BranchLocalType,
    BranchPoly,
    PointContext,
    a_point_lower_bound,
    fiber_point_a_value,
    ord_along,
    pair_log_discrepancy,
)
from .flags import (
    DeltaEntry,
    delta_point_bound,
    s_blowup,
    s_blowup_point_bound,
    s_line,
    s_line_point_bound,
)
from .scroll import (
    M,
    ScrollTriple,
    ToricValuation,
    degree_and_genus,
    fiber_s_lower_bound,
    s_closed_form,
    s_toric_valuation,
)


class PreconditionFailed(Exception):
    """A certifier was called on data violating its stated precondition."""


class Hypothesis(enum.Enum):
    """Assertions the engine records but cannot verify."""

    REDUCTIVE_NO_FIXED_POINT = "reductive-no-fixed-point"
    BRANCH_CLASSIFICATION = "branch-classification"
    FINITE_AUTOMORPHISMS = "finite-automorphisms"


@dataclass(frozen=True)
class AssertedHypotheses:
    flags: frozenset[Hypothesis] = frozenset()
    notes: tuple[str, ...] = ()

    @classmethod
    def of(cls, *flags: Hypothesis, notes: Iterable[str] = ()) -> "AssertedHypotheses":
        return cls(frozenset(flags), tuple(notes))

    def __contains__(self, flag: Hypothesis) -> bool:
        return flag in self.flags

    def to_list(self) -> list[str]:
        return sorted(f.value for f in self.flags)


NO_ASSERTIONS = AssertedHypotheses()

STABILITY_HYPOTHESES = (
    Hypothesis.REDUCTIVE_NO_FIXED_POINT,
    Hypothesis.FINITE_AUTOMORPHISMS,
)


@dataclass(frozen=True)
class DuValType:
    """A Du Val surface singularity type: A(n>=1), D(n>=4), E6, E7, E8."""

    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind == "A":
            if self.n < 1:
                raise ValueError("A(n) requires n >= 1")
        elif self.kind == "D":
            if self.n < 4:
                raise ValueError("D(n) requires n >= 4")
        elif self.kind == "E":
            if self.n not in (6, 7, 8):
                raise ValueError("E(n) requires n in {6, 7, 8}")
        else:
            raise ValueError(f"unknown Du Val kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "DuValType":
        m = re.fullmatch(r"([ADE])(\d+)", text.strip())
        if not m:
            raise ValueError(f"cannot parse Du Val type {text!r}")
        return cls(m.group(1), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.kind}{self.n}"


def duval_group_order(d: DuValType) -> int:
    """Order of the finite subgroup of SL2 behind the singularity.

    Cyclic n+1 for A(n), binary dihedral 4(n-2) for D(n), binary
    tetrahedral 24, octahedral 48, icosahedral 120 for E6, E7, E8.
    """
    if d.kind == "A":
        return d.n + 1
    if d.kind == "D":
        return 4 * (d.n - 2)
    return {6: 24, 7: 48, 8: 120}[d.n]


class VerdictStatus(enum.Enum):
    K_UNSTABLE = "k-unstable"
    K_STABLE_CERTIFIED = "k-stable-certified"
    K_POLYSTABLE_CERTIFIED = "k-polystable-certified"
    INCONCLUSIVE = "inconclusive"


_RELATIONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class CertificateItem:
    name: str
    value: Fraction
    relation: str
    bound: Fraction
    provenance: str = "computed"

    def holds(self) -> bool:
        return _RELATIONS[self.relation](self.value, self.bound)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": _fmt(self.value),
            "relation": self.relation,
            "bound": _fmt(self.bound),
            "provenance": self.provenance,
        }


def _fmt(x) -> str:
    return str(Fraction(x))


def _item(name, value, relation, bound, provenance="computed") -> CertificateItem:
    return CertificateItem(name, Fraction(value), relation, Fraction(bound), provenance)


@dataclass(frozen=True)
class Verdict:
    status: VerdictStatus
    reason: str = ""
    certificate: tuple[CertificateItem, ...] = ()
    asserted: AssertedHypotheses = NO_ASSERTIONS

    def revalidate(self) -> bool:
        """Re-evaluate every stored inequality from its exact operands."""
        return all(item.holds() for item in self.certificate)

    @property
    def is_certification(self) -> bool:
        return self.status in (
            VerdictStatus.K_STABLE_CERTIFIED,
            VerdictStatus.K_POLYSTABLE_CERTIFIED,
        )

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "reason": self.reason,
            "certificate": [item.to_dict() for item in self.certificate],
            "asserted": self.asserted.to_list(),
        }


# ---------------------------------------------------------------------------
# Instability tests (each returns a verdict when it fires, else None).

def check_toric_instability(t: ScrollTriple) -> Optional[Verdict]:
    """Fires when the fiber S-value Q/(4 total) exceeds 1, i.e. 4 total < Q."""
    sigma = t.total
    q = (
        t.d1 ** 2 + t.d2 ** 2 + t.d3 ** 2
        + t.d1 * t.d2 + t.d2 * t.d3 + t.d3 * t.d1
    )
    if 4 * sigma >= q:
        return None
    return Verdict(
        VerdictStatus.K_UNSTABLE,
        reason="toric-fiber",
        certificate=(
            _item("S(M;F)", Fraction(q, 4 * sigma), ">", 1, "closed form"),
        ),
    )


def check_alpha_instability(t: ScrollTriple) -> Optional[Verdict]:
    """Fires when d1 >= 5, forcing the alpha invariant below 1/4."""
    if t.d1 < 5:
        return None
    return Verdict(
        VerdictStatus.K_UNSTABLE,
        reason="alpha-bound",
        certificate=(
            _item("alpha-upper-bound", Fraction(1, t.d1), "<", Fraction(1, 4),
                  "alpha <= 1/d1"),
        ),
    )


def check_volume_instability(
    degree: int, singular_locus: Sequence[DuValType]
) -> Optional[Verdict]:
    """Fires when the degree exceeds the normalized-volume cap 64/|G|.

    The cap comes from a curve of Du Val singularities of the given type on
    the double cover; the certificate names the violating type.
    """
    if degree <= 0 or degree % 2 != 0:
        raise ValueError("degree must be a positive even integer")
    for d in singular_locus:
        cap = Fraction(64, duval_group_order(d))
        if degree > cap:
            return Verdict(
                VerdictStatus.K_UNSTABLE,
                reason="normalized-volume",
                certificate=(
                    _item(f"degree-vs-cap[{d}]", degree, ">", cap,
                          f"64/|G| for {d}, |G| = {duval_group_order(d)}"),
                ),
            )
    return None


def check_divisibility_obstruction(
    t: ScrollTriple, fiber_degree: int = 2
) -> Optional[Verdict]:
    """Fires when d1 = 4, d3 != 0 and the fiber degree is not divisible by 4.

    With d1 = 4 a semistable member would force the fiber anticanonical
    square to be 4 times an integer; fiber degree 2 makes that impossible.
    The d3 != 0 hypothesis keeps the contraction to the anticanonical model
    small, which the argument needs.
    """
    if t.d1 != 4 or t.d3 == 0 or fiber_degree % 4 == 0:
        return None
    return Verdict(
        VerdictStatus.K_UNSTABLE,
        reason="divisibility",
        certificate=(
            _item("fiber-degree-mod-4", fiber_degree % 4, "!=", 0,
                  f"(-K_F)^2 = {fiber_degree} not divisible by 4"),
        ),
    )


def check_fiber_beta(t: ScrollTriple) -> Optional[Verdict]:
    """Fires when the exact fiber S lower bound exceeds 1."""
    value = fiber_s_lower_bound(t, 3)
    if value <= 1:
        return None
    return Verdict(
        VerdictStatus.K_UNSTABLE,
        reason="fiber-beta",
        certificate=(
            _item("fiber-s-lower-bound", value, ">", 1, "exact piecewise integral"),
        ),
    )


def _first_instability(
    t: ScrollTriple,
    degree: int | None = None,
    singular_locus: Sequence[DuValType] = (),
) -> Optional[Verdict]:
    """Run the instability tests; first firing test wins.

    Order: alpha, volume, divisibility, fiber-beta, toric.  The alpha test
    leads so a d1 >= 5 sweep reports the alpha bound uniformly, and the
    fiber-beta integral precedes the closed-form toric test so that its
    exact integral value lands in the certificate when both fire.
    """
    v = check_alpha_instability(t)
    if v is not None:
        return v
    if singular_locus:
        v = check_volume_instability(
            degree if degree is not None else degree_and_genus(t).degree,
            singular_locus,
        )
        if v is not None:
            return v
    v = check_divisibility_obstruction(t)
    if v is not None:
        return v
    v = check_fiber_beta(t)
    if v is not None:
        return v
    return check_toric_instability(t)


# ---------------------------------------------------------------------------
# Certifiers.

#: Weighted-blowup weights attached to each local branch type.
_P3_WEIGHTS = {
    BranchLocalType.SMOOTH: (1, 1),
    BranchLocalType.NODE: (1, 1),
    BranchLocalType.CUSP: (3, 2),
}


def _check_branch_on(t: ScrollTriple, branch: BranchPoly) -> None:
    for m in branch.monomials:
        expected = branch_mod.coefficient_t_degree(t, m)
        if m.t_degree != expected:
            raise ValueError(
                f"monomial {m} has t-degree {m.t_degree}, expected {expected} on {t}"
            )


def _inconclusive(reason: str, asserted: AssertedHypotheses, items=()) -> Verdict:
    return Verdict(VerdictStatus.INCONCLUSIVE, reason, tuple(items), asserted)


def certify_stable(
    t: ScrollTriple,
    branch: BranchPoly,
    p3_type: BranchLocalType | None = None,
    line_component: int | None = None,
    asserted: AssertedHypotheses = NO_ASSERTIONS,
    p3_weights: tuple[int, int] | None = None,
    p3_order=None,
) -> Verdict:
    """Pointwise delta certification over a general fiber.

    Every point class of the fiber must produce a strictly-greater-than-1
    delta bound: general points through a general line, the distinguished
    point through a weighted blowup (``p3_type`` selects weights and the
    exceptional log discrepancy), and points of a line component of the
    branch when one is present.  Missing group hypotheses downgrade the
    verdict to inconclusive; a firing instability test makes the certifier
    refuse and return that verdict instead.
    """
    missing = [h for h in STABILITY_HYPOTHESES if h not in asserted]
    if missing:
        return _inconclusive(
            "missing-assertion:" + ",".join(h.value for h in missing), asserted
        )
    _check_branch_on(t, branch)
    fired = _first_instability(t)
    if fired is not None:
        return fired

    s_fiber = s_closed_form(t, "fiber")
    cases: list[tuple[str, list[DeltaEntry]]] = []

    general = [
        DeltaEntry("fiber", Fraction(1), s_fiber, "general fiber, not a branch component"),
        DeltaEntry("line", Fraction(1), s_line(t, 3), "general line, transverse to branch"),
        DeltaEntry(
            "point",
            a_point_lower_bound(PointContext.GENERAL),
            s_line_point_bound(t, 3),
            "stored bound / endpoint maximum",
        ),
    ]
    cases.append(("general", general))

    if p3_type is not None:
        weights = p3_weights if p3_weights is not None else _P3_WEIGHTS[p3_type]
        a_exc = fiber_point_a_value(p3_type, weights, explicit_order=p3_order)
        context = (
            PointContext.CUSP_EXCEPTIONAL
            if p3_type is BranchLocalType.CUSP
            else PointContext.GENERAL
        )
        special = [
            DeltaEntry("fiber", Fraction(1), s_fiber, "general fiber, not a branch component"),
            DeltaEntry(
                "blowup",
                a_exc,
                s_blowup(t, *weights),
                f"{p3_type.value} point, weights {weights}",
            ),
            DeltaEntry(
                "terminal",
                a_point_lower_bound(context),
                s_blowup_point_bound(t, *weights),
                "stored bound / endpoint maximum",
            ),
        ]
        cases.append(("special-point", special))

    if line_component is not None:
        if line_component not in (1, 2, 3):
            raise ValueError("line component index must be 1, 2 or 3")
        mult = ord_along(
            ToricValuation.from_vector(t, _ray_vector(t, line_component)), branch
        )
        if mult < 1:
            raise ValueError(
                f"x{line_component} does not divide the branch polynomial"
            )
        if mult > 1:
            raise ValueError(
                f"branch is non-reduced along x{line_component} (multiplicity {mult})"
            )
        on_line = [
            DeltaEntry("fiber", Fraction(1), s_fiber, "general fiber, not a branch component"),
            DeltaEntry(
                "line",
                1 - Fraction(mult) / 2,
                s_line(t, line_component),
                f"line component x{line_component} with multiplicity {mult}",
            ),
            DeltaEntry(
                "point",
                a_point_lower_bound(PointContext.GENERAL),
                s_line_point_bound(t, line_component),
                "stored bound / endpoint maximum",
            ),
        ]
        cases.append(("on-line", on_line))

    if len(cases) == 1:
        return _inconclusive("missing-branch-classification", asserted)

    items = []
    overall = None
    failing = None
    for case_name, entries in cases:
        cert = delta_point_bound(entries)
        for e in cert.entries:
            # store the inequality that actually holds, so certificates
            # re-validate even when they document a failure
            relation = ">" if e.ratio > 1 else "<="
            items.append(
                _item(f"{case_name}.{e.label}.ratio", e.ratio, relation, 1, e.provenance)
            )
        if overall is None or cert.conclusion < overall:
            overall = cert.conclusion
        if not cert.strict and failing is None:
            failing = f"{case_name}.{cert.weakest.label}"
    if failing is not None:
        return _inconclusive(f"ratio-not-strict:{failing}", asserted, items)
    items.append(_item("delta-point-lower-bound", overall, ">", 1, "minimum ratio"))
    return Verdict(
        VerdictStatus.K_STABLE_CERTIFIED,
        reason="pointwise-delta",
        certificate=tuple(items),
        asserted=asserted,
    )


def _ray_vector(t: ScrollTriple, i: int) -> tuple[int, int, int]:
    return {1: (1, 0, 0), 2: (0, 1, 0), 3: (-1, -1, 0)}[i]


def certify_polystable(
    t: ScrollTriple,
    branch: BranchPoly,
    futaki_valuation: ToricValuation | Iterable[int],
    asserted: AssertedHypotheses = NO_ASSERTIONS,
) -> Verdict:
    """Polystability check list for a reducible branch x1 * (residual).

    Certifies when (a) the component D1 sits exactly on the stability
    boundary, A(D1) = S(M;D1); (b) the supplied valuation witnesses a
    vanishing torus-Futaki character, A(E) = S(M;E) exactly; and (c) the
    vertical-divisor inequalities are strict: S(M;D3) < 1/2 bounds the
    branch residual, and S(M;F1) < 1 bounds quotient fibers, unless
    S(M;F1) = 1 with the witness being F1 itself, in which case the
    quotient is transverse to the fibers.
    """
    if not branch.divisible_by("x1"):
        raise PreconditionFailed("branch polynomial is not divisible by x1")
    _check_branch_on(t, branch)
    fired = _first_instability(t)
    if fired is not None:
        return fired

    if not isinstance(futaki_valuation, ToricValuation):
        futaki_valuation = ToricValuation.from_vector(t, futaki_valuation)

    items = []

    a_d1 = pair_log_discrepancy(t, (1, 0, 0), branch).value
    s_d1 = s_closed_form(t, "D1")
    # failures are stored with the relation that holds, so every
    # certificate re-validates even when it documents a mismatch
    items.append(_item("A(D1)", a_d1, "=" if a_d1 == s_d1 else "!=", s_d1,
                       "boundary component, beta = 0"))
    if a_d1 != s_d1:
        return _inconclusive("boundary-mismatch:D1", asserted, items)

    a_e = pair_log_discrepancy(t, futaki_valuation, branch).value
    s_e = s_toric_valuation(t, M, futaki_valuation)
    items.append(_item("A(E)", a_e, "=" if a_e == s_e else "!=", s_e,
                       f"Futaki witness w = {futaki_valuation.w}"))
    if a_e != s_e:
        return _inconclusive("futaki-mismatch", asserted, items)

    s_d3 = s_closed_form(t, "D3")
    items.append(_item("S(M;D3)", s_d3, "<" if s_d3 < Fraction(1, 2) else ">=",
                       Fraction(1, 2), "bounds S of the branch residual, A = 1/2"))
    if s_d3 >= Fraction(1, 2):
        return _inconclusive("vertical-bound:residual", asserted, items)

    s_f1 = s_closed_form(t, "F1")
    if s_f1 < 1:
        items.append(_item("S(M;F1)", s_f1, "<", 1,
                           "bounds S of quotient fibers, A = 1"))
    elif s_f1 == 1 and set(futaki_valuation.cone_coefficients) == {"u1"}:
        items.append(_item("S(M;F1)", s_f1, "=", 1,
                           "witness is F1; quotient transverse to fibers"))
    else:
        items.append(_item("S(M;F1)", s_f1, ">=", 1,
                           "quotient-fiber bound not strict"))
        return _inconclusive("vertical-bound:fiber", asserted, items)

    return Verdict(
        VerdictStatus.K_POLYSTABLE_CERTIFIED,
        reason="futaki-and-vertical-checks",
        certificate=tuple(items),
        asserted=asserted,
    )


def full_verdict(record) -> Verdict:
    """Instability tests first, then the certifier the record's data selects.

    ``record`` provides triple, degree, singular_locus, branch_poly(),
    p3_type, line_component, futaki and asserted (see the registry module);
    records without scroll data are inconclusive by construction.
    """
    if record.triple is None:
        return _inconclusive("no-scroll-data", record.asserted)
    t = record.triple
    fired = _first_instability(t, record.degree, record.singular_locus)
    if fired is not None:
        return fired
    branch = record.branch_poly()
    if branch is not None and record.futaki is not None:
        return certify_polystable(t, branch, record.futaki, record.asserted)
    if branch is not None and (
        record.p3_type is not None or record.line_component is not None
    ):
        return certify_stable(
            t,
            branch,
            p3_type=record.p3_type,
            line_component=record.line_component,
            asserted=record.asserted,
        )
    return _inconclusive("no-certification-data", record.asserted)
