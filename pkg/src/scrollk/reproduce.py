"""Self-checking reproductions of the worked computations.

Each routine recomputes a worked example or sweep from scratch, compares
against the frozen expected constants, and returns the comparison table;
the CLI exits nonzero when any line disagrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .branch import pair_log_discrepancy
from .flags import s_line, s_line_point_bound
from .polytope import integrate_piecewise
from .registry import Registry, load_default
from .scroll import (
    M,
    RAY_DIVISORS,
    ScrollTriple,
    fan,
    fiber_s_lower_bound,
    s_closed_form,
    s_toric_valuation,
)
from .verdict import (
    VerdictStatus,
    certify_polystable,
    certify_stable,
    check_toric_instability,
    full_verdict,
)


@dataclass(frozen=True)
class ReproLine:
    label: str
    got: str
    expected: str

    @property
    def ok(self) -> bool:
        return self.got == self.expected


@dataclass(frozen=True)
class ReproResult:
    name: str
    lines: tuple[ReproLine, ...]

    @property
    def ok(self) -> bool:
        return all(line.ok for line in self.lines)


def _line(label, got, expected) -> ReproLine:
    return ReproLine(label, str(got), str(expected))


def _triples(dmax: int):
    for d1 in range(1, dmax + 1):
        for d2 in range(0, d1 + 1):
            for d3 in range(0, d2 + 1):
                yield ScrollTriple(d1, d2, d3)


def lemma_toric(dmax: int = 6) -> ReproResult:
    """Polytope-averaged S against the closed forms, for all five rays."""
    lines = []
    for t in _triples(dmax):
        f = fan(t)
        for ray in f.rays:
            got = s_toric_valuation(t, M, ray.vector)
            expected = s_closed_form(t, RAY_DIVISORS[ray.name])
            lines.append(_line(f"S(M;{RAY_DIVISORS[ray.name]}) on {t}", got, expected))
    return ReproResult("lemma-toric", tuple(lines))


def h10(reg: Registry | None = None) -> ReproResult:
    reg = reg or load_default()
    record = reg.get("H10")
    t = record.triple
    branch = record.branch_poly()
    lines = [
        _line("S(M;D1)", s_closed_form(t, "D1"), Fraction(1, 2)),
        _line("S(M;F1)", s_closed_form(t, "F1"), Fraction(3, 4)),
        _line("S(M;D3)", s_closed_form(t, "D3"), Fraction(1, 4)),
        _line("S(M;E)", s_toric_valuation(t, M, record.futaki), Fraction(5, 2)),
        _line("A(E)", pair_log_discrepancy(t, record.futaki, branch).value, Fraction(5, 2)),
    ]
    verdict = certify_polystable(t, branch, record.futaki, record.asserted)
    lines.append(_line("verdict", verdict.status.value, VerdictStatus.K_POLYSTABLE_CERTIFIED.value))
    return ReproResult("h10", tuple(lines))


def h17(reg: Registry | None = None) -> ReproResult:
    reg = reg or load_default()
    record = reg.get("H17")
    t = record.triple
    branch = record.branch_poly()
    lines = [
        _line("S(M;F1)", s_closed_form(t, "F1"), Fraction(1)),
        _line("S(M;D1)", s_closed_form(t, "D1"), Fraction(1, 2)),
        _line("toric test silent at 16 = 16", check_toric_instability(t), None),
    ]
    verdict = certify_polystable(t, branch, record.futaki, record.asserted)
    lines.append(_line("verdict", verdict.status.value, VerdictStatus.K_POLYSTABLE_CERTIFIED.value))
    return ReproResult("h17", tuple(lines))


def h12(reg: Registry | None = None) -> ReproResult:
    reg = reg or load_default()
    record = reg.get("H12")
    t = record.triple
    lines = [
        _line("S(M;F0)", s_closed_form(t, "fiber"), Fraction(9, 10)),
        _line("S(M;F0>l)", s_line(t, 3), Fraction(3, 10)),
        _line("S(M;F0>l1)", s_line(t, 1), Fraction(2, 5)),
        _line("S(M;F0>l1>p) bound", s_line_point_bound(t, 1), Fraction(3, 10)),
    ]
    verdict = certify_stable(
        t,
        record.branch_poly(),
        line_component=record.line_component,
        asserted=record.asserted,
    )
    lines.append(_line("verdict", verdict.status.value, VerdictStatus.K_STABLE_CERTIFIED.value))
    lines.append(_line("min ratio", verdict.certificate[-1].value, Fraction(10, 9)))
    return ReproResult("h12", tuple(lines))


def h14(reg: Registry | None = None) -> ReproResult:
    reg = reg or load_default()
    record = reg.get("H14")
    t = record.triple
    lines = [
        _line("fiber S lower bound", fiber_s_lower_bound(t, 3), Fraction(25, 24)),
    ]
    verdict = full_verdict(record)
    lines.append(_line("verdict", f"{verdict.status.value}/{verdict.reason}",
                       "k-unstable/fiber-beta"))
    return ReproResult("h14", tuple(lines))


def h7_worked() -> ReproResult:
    """The two exact integrals of the blown-up-section computation.

    The first is (1/8) * integral_0^1 (8 - 8u^3) du.  The second is
    (3/8) * integral_0^1 integral_0^{2u} 4u(2u - v) dv du; the inner
    integrand is affine in v, so the inner integral is the endpoint mean
    times the interval length, and the outer integrand is the cubic 8u^3.
    """
    outer1 = integrate_piecewise(lambda u: 8 - 8 * u ** 3, [0, 1]) / 8

    def inner(u: Fraction) -> Fraction:
        lo, hi = Fraction(0), 2 * u
        mean = (4 * u * (2 * u - lo) + 4 * u * (2 * u - hi)) / 2
        return mean * (hi - lo)

    outer2 = Fraction(3, 8) * integrate_piecewise(inner, [0, 1])
    lines = [
        _line("S of the exceptional surface", outer1, Fraction(3, 4)),
        _line("refined flag S bound", outer2, Fraction(3, 4)),
        _line("both below A = 1", outer1 < 1 and outer2 < 1, True),
    ]
    return ReproResult("h7-worked", tuple(lines))


def kill_many(dmax: int = 6, reg: Registry | None = None) -> ReproResult:
    """Strict-inequality sweep of the fiber S-value instability test."""
    reg = reg or load_default()
    lines = []
    for rid in ("H5", "H7", "H8", "H10", "H11", "H12", "H13", "H17"):
        t = reg.get(rid).triple
        lines.append(_line(f"{rid} {t} quiet", check_toric_instability(t) is None, True))
    for tup in ((3, 3, 1), (4, 3, 0), (4, 4, 4)):
        t = ScrollTriple(*tup)
        lines.append(_line(f"{t} fires", check_toric_instability(t) is not None, True))
    fired = sum(
        1 for t in _triples(dmax) if check_toric_instability(t) is not None
    )
    lines.append(_line(f"fired count over d1 <= {dmax}", fired >= 1, True))
    return ReproResult("kill-many", tuple(lines))


ALL = {
    "lemma-toric": lemma_toric,
    "h10": h10,
    "h17": h17,
    "h12": h12,
    "h14": h14,
    "h7-worked": h7_worked,
    "kill-many": kill_many,
}


def run(name: str, dmax: int | None = None, reg: Registry | None = None) -> ReproResult:
    fn = ALL.get(name)
    if fn is None:
        raise ValueError(f"unknown reproduction {name!r}; choose from {sorted(ALL)}")
    kwargs = {}
    if name in ("lemma-toric", "kill-many") and dmax is not None:
        kwargs["dmax"] = dmax
    if name in ("h10", "h17", "h12", "h14", "kill-many") and reg is not None:
        kwargs["reg"] = reg
    return fn(**kwargs)
