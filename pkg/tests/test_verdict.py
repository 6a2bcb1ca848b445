"""Decision procedures: instability checks, certifiers, mutual exclusion."""

import itertools
import random
from fractions import Fraction as F

import pytest

from scrollk.branch import BranchLocalType, BranchPoly, Monomial, coefficient_t_degree, parse
from scrollk.registry import load_default
from scrollk.scroll import ScrollTriple
from scrollk.verdict import (
    AssertedHypotheses,
    DuValType,
    Hypothesis,
    PreconditionFailed,
    VerdictStatus,
    certify_polystable,
    certify_stable,
    check_alpha_instability,
    check_divisibility_obstruction,
    check_fiber_beta,
    check_toric_instability,
    check_volume_instability,
    duval_group_order,
    full_verdict,
)

SEED = 20250810

STAB = AssertedHypotheses.of(
    Hypothesis.REDUCTIVE_NO_FIXED_POINT, Hypothesis.FINITE_AUTOMORPHISMS
)


def triples(dmax):
    for d1 in range(1, dmax + 1):
        for d2 in range(d1 + 1):
            for d3 in range(d2 + 1):
                yield ScrollTriple(d1, d2, d3)


def random_branch(rng, t, force_x1=False):
    """A random branch polynomial valid on t, or None when none exists."""
    classes = [
        exps
        for exps in itertools.product(range(5), repeat=3)
        if sum(exps) == 4
        and (not force_x1 or exps[0] >= 1)
        and coefficient_t_degree(t, exps) >= 0
    ]
    if not classes:
        return None
    chosen = rng.sample(classes, k=min(len(classes), rng.randint(1, 4)))
    monomials = []
    for exps in chosen:
        deg = coefficient_t_degree(t, exps)
        k1 = rng.randint(0, deg)
        monomials.append(Monomial(exps, (k1, deg - k1), F(rng.randint(1, 3))))
    return BranchPoly(tuple(monomials))


class TestToricInstability:
    def test_quiet_cases(self):
        assert check_toric_instability(ScrollTriple(2, 1, 0)) is None
        assert check_toric_instability(ScrollTriple(4, 0, 0)) is None  # 16 = 16

    def test_fires(self):
        v = check_toric_instability(ScrollTriple(3, 3, 1))
        assert v.status is VerdictStatus.K_UNSTABLE
        assert v.reason == "toric-fiber"
        assert v.certificate[0].value == F(34, 28)
        assert v.revalidate()

    def test_fires_whenever_d1_ge_5_and_d2_ge_3(self):
        rng = random.Random(SEED)
        count = 0
        while count < 50:
            d1 = rng.randint(5, 12)
            d2 = rng.randint(3, d1)
            d3 = rng.randint(0, d2)
            assert check_toric_instability(ScrollTriple(d1, d2, d3)) is not None
            count += 1


class TestAlphaInstability:
    def test_examples(self):
        assert check_alpha_instability(ScrollTriple(5, 0, 0)).status is VerdictStatus.K_UNSTABLE
        assert check_alpha_instability(ScrollTriple(4, 0, 0)) is None
        assert check_alpha_instability(ScrollTriple(6, 2, 1)) is not None

    def test_certificate(self):
        v = check_alpha_instability(ScrollTriple(7, 0, 0))
        assert v.certificate[0].value == F(1, 7)
        assert v.certificate[0].bound == F(1, 4)
        assert v.revalidate()


class TestDuVal:
    @pytest.mark.parametrize(
        "duval,order",
        [(("A", 1), 2), (("D", 5), 12), (("E", 8), 120), (("E", 6), 24), (("E", 7), 48)],
    )
    def test_orders(self, duval, order):
        assert duval_group_order(DuValType(*duval)) == order

    def test_e6_normalized_volume(self):
        assert F(27, duval_group_order(DuValType("E", 6))) == F(9, 8)

    def test_threshold_monotone(self):
        chain = [DuValType("A", n) for n in range(1, 6)]
        chain += [DuValType("D", 4), DuValType("D", 5)]
        chain += [DuValType("E", n) for n in (6, 7, 8)]
        caps = [F(64, duval_group_order(d)) for d in chain]
        assert all(a > b for a, b in zip(caps, caps[1:]))

    def test_parse_and_ranges(self):
        assert DuValType.parse("A7") == DuValType("A", 7)
        with pytest.raises(ValueError):
            DuValType("D", 3)
        with pytest.raises(ValueError):
            DuValType("E", 9)
        with pytest.raises(ValueError):
            DuValType.parse("F4")


class TestVolumeInstability:
    def test_boundary_not_strict(self):
        assert check_volume_instability(8, [DuValType("A", 7)]) is None

    def test_fires_above_cap(self):
        assert check_volume_instability(10, [DuValType("A", 7)]).status is VerdictStatus.K_UNSTABLE
        v = check_volume_instability(6, [DuValType("E", 8)])
        assert v is not None and v.revalidate()

    def test_quiet(self):
        assert check_volume_instability(4, [DuValType("A", 1)]) is None

    def test_degree_validation(self):
        with pytest.raises(ValueError):
            check_volume_instability(7, [DuValType("A", 1)])


class TestDivisibility:
    def test_fires(self):
        v = check_divisibility_obstruction(ScrollTriple(4, 2, 1), 2)
        assert v is not None and v.reason == "divisibility" and v.revalidate()

    def test_d3_zero_exempt(self):
        assert check_divisibility_obstruction(ScrollTriple(4, 0, 0), 2) is None

    def test_other_d1_quiet(self):
        assert check_divisibility_obstruction(ScrollTriple(3, 2, 1), 2) is None

    def test_divisible_fiber_quiet(self):
        assert check_divisibility_obstruction(ScrollTriple(4, 2, 1), 4) is None


class TestFiberBeta:
    def test_h14(self):
        v = check_fiber_beta(ScrollTriple(3, 2, 1))
        assert v.status is VerdictStatus.K_UNSTABLE
        assert v.certificate[0].value == F(25, 24)

    def test_quiet(self):
        assert check_fiber_beta(ScrollTriple(2, 1, 0)) is None
        assert check_fiber_beta(ScrollTriple(1, 1, 1)) is None


H5 = "(t1^6+t2^6)*x1^4 + x1*x3^3 + t1*t2*x2^4 + x2^2*x3^2"
H7 = "(t1^4+t2^4)*x1^4 + t1^2*t2^2*x2^4 + x1^2*x3^2 + x2^2*x3^2"
H8 = "(t1^2+t2^2)*x1^4 + t1*t2*x2^4 + x1^2*x3^2 + x2^2*x3^2"
H10 = "x1*(t1*x2^3 + t2*x3^3)"
H11 = "(t1^8+t2^8)*x1^4 + t1*t2*x1^2*x3^2 + x1*x2*x3^2 + x2^4"
H12 = "x1*((t1^6+t2^6)*x1^3 + x2^3 + x3^3)"
H13 = "(t1^6+t2^6)*x1^4 + x1^2*x3^2 + t1*t2*x2^4 + x2^3*x3"
H17 = "x1*(x2^3+x3^3)"


class TestCertifyStable:
    def test_h12_line_route(self):
        v = certify_stable(
            ScrollTriple(3, 1, 1), parse(H12), line_component=1, asserted=STAB
        )
        assert v.status is VerdictStatus.K_STABLE_CERTIFIED
        assert v.certificate[-1].name == "delta-point-lower-bound"
        assert v.certificate[-1].value == F(10, 9)
        assert v.revalidate()

    def test_h5_smooth_route(self):
        v = certify_stable(
            ScrollTriple(2, 1, 0), parse(H5),
            p3_type=BranchLocalType.SMOOTH, asserted=STAB,
        )
        assert v.status is VerdictStatus.K_STABLE_CERTIFIED
        ratios = {i.name: i.value for i in v.certificate}
        assert ratios["general.fiber.ratio"] == F(12, 7)
        assert ratios["special-point.blowup.ratio"] == 2
        assert ratios["special-point.terminal.ratio"] == F(6, 5)
        assert v.certificate[-1].value == F(6, 5)

    def test_h13_cusp_route(self):
        v = certify_stable(
            ScrollTriple(3, 2, 0), parse(H13),
            p3_type=BranchLocalType.CUSP, asserted=STAB,
        )
        assert v.status is VerdictStatus.K_STABLE_CERTIFIED
        ratios = {i.name: i.value for i in v.certificate}
        assert ratios["special-point.blowup.ratio"] == F(20, 19)
        assert ratios["special-point.terminal.ratio"] == F(5, 3)

    @pytest.mark.parametrize(
        "text,triple,p3",
        [
            (H7, (2, 2, 0), BranchLocalType.NODE),
            (H8, (2, 2, 1), BranchLocalType.NODE),
            (H11, (3, 1, 0), BranchLocalType.NODE),
        ],
    )
    def test_node_routes(self, text, triple, p3):
        v = certify_stable(ScrollTriple(*triple), parse(text), p3_type=p3, asserted=STAB)
        assert v.status is VerdictStatus.K_STABLE_CERTIFIED
        assert v.revalidate()

    def test_missing_assertions_downgrade(self):
        v = certify_stable(ScrollTriple(3, 1, 1), parse(H12), line_component=1)
        assert v.status is VerdictStatus.INCONCLUSIVE
        assert v.reason.startswith("missing-assertion")

    def test_missing_classification(self):
        v = certify_stable(ScrollTriple(3, 1, 1), parse(H12), asserted=STAB)
        assert v.status is VerdictStatus.INCONCLUSIVE
        assert v.reason == "missing-branch-classification"

    def test_monotone_in_a(self):
        base = certify_stable(
            ScrollTriple(3, 2, 0), parse(H13),
            p3_type=BranchLocalType.CUSP, asserted=STAB,
        )
        assert base.status is VerdictStatus.K_STABLE_CERTIFIED
        for lower_order in (5, 4, 2, 1):  # lower branch order = higher A
            v = certify_stable(
                ScrollTriple(3, 2, 0), parse(H13),
                p3_type=BranchLocalType.CUSP, asserted=STAB,
                p3_order=lower_order,
            )
            assert v.status is VerdictStatus.K_STABLE_CERTIFIED

    def test_branch_inconsistent_with_triple(self):
        with pytest.raises(ValueError):
            certify_stable(ScrollTriple(2, 1, 0), parse(H12),
                           line_component=1, asserted=STAB)

    def test_refuses_on_unstable_triple(self):
        rng = random.Random(SEED)
        t = ScrollTriple(3, 2, 1)
        branch = random_branch(rng, t)
        v = certify_stable(t, branch, p3_type=BranchLocalType.NODE, asserted=STAB)
        assert v.status is VerdictStatus.K_UNSTABLE


class TestCertifyPolystable:
    def test_h10(self):
        v = certify_polystable(ScrollTriple(3, 0, 0), parse(H10), (0, 1, -3))
        assert v.status is VerdictStatus.K_POLYSTABLE_CERTIFIED
        got = {i.name: (i.value, i.relation, i.bound) for i in v.certificate}
        assert got["A(D1)"] == (F(1, 2), "=", F(1, 2))
        assert got["A(E)"] == (F(5, 2), "=", F(5, 2))
        assert got["S(M;D3)"] == (F(1, 4), "<", F(1, 2))
        assert got["S(M;F1)"] == (F(3, 4), "<", 1)
        assert v.revalidate()

    def test_h17(self):
        v = certify_polystable(ScrollTriple(4, 0, 0), parse(H17), (4, 0, 1))
        assert v.status is VerdictStatus.K_POLYSTABLE_CERTIFIED
        got = {i.name: i.value for i in v.certificate}
        assert got["S(M;F1)"] == 1
        assert got["A(E)"] == 1
        assert v.revalidate()

    def test_wrong_futaki_weights(self):
        # with weights (1,2) the order along the branch is 2, so A = 2
        # while S = S(M;D2) + 2 S(M;F1) = 7/4; the equality check fails
        v = certify_polystable(ScrollTriple(3, 0, 0), parse(H10), (0, 1, -2))
        assert v.status is VerdictStatus.INCONCLUSIVE
        assert v.reason == "futaki-mismatch"
        got = {i.name: (i.value, i.relation, i.bound) for i in v.certificate}
        assert got["A(E)"] == (F(2), "!=", F(7, 4))
        assert v.revalidate()

    def test_requires_x1_factor(self):
        with pytest.raises(PreconditionFailed):
            certify_polystable(ScrollTriple(2, 1, 0), parse(H5), (1, 0, 0))

    def test_refuses_on_unstable_triple(self):
        t = ScrollTriple(6, 0, 0)
        branch = parse("x1^2*(t1^4*x2^2 + t2^4*x3^2)", quartic=True)
        v = certify_polystable(t, branch, (1, 0, 0))
        assert v.status is VerdictStatus.K_UNSTABLE
        assert v.reason == "alpha-bound"


class TestFullVerdict:
    def test_registry_h14_fiber_beta(self):
        record = load_default().get("H14")
        v = full_verdict(record)
        assert v.status is VerdictStatus.K_UNSTABLE
        assert v.reason == "fiber-beta"
        assert v.certificate[0].value == F(25, 24)

    def test_registry_h17_polystable(self):
        v = full_verdict(load_default().get("H17"))
        assert v.status is VerdictStatus.K_POLYSTABLE_CERTIFIED

    def test_registry_h5_stable(self):
        v = full_verdict(load_default().get("H5"))
        assert v.status is VerdictStatus.K_STABLE_CERTIFIED

    def test_stub_records_inconclusive(self):
        v = full_verdict(load_default().get("H1"))
        assert v.status is VerdictStatus.INCONCLUSIVE
        assert v.reason == "no-scroll-data"


class TestMutualExclusion:
    def test_registry_sweep(self):
        reg = load_default()
        for rid in reg.ids():
            record = reg.get(rid)
            if record.triple is None:
                continue
            checks = [
                check_alpha_instability(record.triple),
                check_divisibility_obstruction(record.triple),
                check_fiber_beta(record.triple),
                check_toric_instability(record.triple),
            ]
            fired = any(c is not None for c in checks)
            v = full_verdict(record)
            if fired:
                assert not v.is_certification
            if v.is_certification:
                assert not fired

    def test_random_sweep(self):
        rng = random.Random(SEED)
        seen_fired = 0
        seen_certified = 0
        for _ in range(200):
            d1 = rng.randint(1, 10)
            d2 = rng.randint(0, d1)
            d3 = rng.randint(0, d2)
            t = ScrollTriple(d1, d2, d3)
            fired = any(
                c is not None
                for c in (
                    check_alpha_instability(t),
                    check_divisibility_obstruction(t),
                    check_fiber_beta(t),
                    check_toric_instability(t),
                )
            )
            branch = random_branch(rng, t, force_x1=rng.random() < 0.5)
            if branch is None:
                continue
            outcomes = []
            p3 = rng.choice(list(BranchLocalType))
            try:
                outcomes.append(certify_stable(t, branch, p3_type=p3, asserted=STAB))
            except ValueError:
                pass
            try:
                outcomes.append(certify_polystable(t, branch, (0, 1, -1)))
            except (PreconditionFailed, ValueError):
                pass
            for v in outcomes:
                assert v.revalidate(), (t, str(branch), v.to_dict())
                if fired:
                    assert not v.is_certification, (t, str(branch))
                if v.is_certification:
                    seen_certified += 1
            if fired:
                seen_fired += 1
        assert seen_fired > 20  # the sweep actually exercises both sides
        assert seen_certified > 0
