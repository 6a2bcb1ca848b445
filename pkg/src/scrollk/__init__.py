"""Exact K-stability invariants of hyperelliptic double covers of scrolls.

Everything is computed in exact rational arithmetic: moment-polytope
volumes and integrals on the scroll F(d1,d2,d3), expected vanishing orders
of toric valuations, flag refinements inside fibers, log discrepancies of
the half-branch pair, and the decision procedures that assemble them into
machine-checkable K-stability certificates.
"""

from .branch import (
    BranchLocalType,
    BranchPoly,
    Monomial,
    NonQuarticError,
    ParseError,
    PairLogDiscrepancy,
    UnknownSingularity,
    a_point_lower_bound,
    coefficient_t_degree,
    fiber_point_a_value,
    infer_triple,
    ord_along,
    pair_log_discrepancy,
    parse,
)
from .flags import (
    DeltaCertificate,
    DeltaEntry,
    FlagSpec,
    NonPositiveEntry,
    delta_point_bound,
    s_blowup,
    s_blowup_point_bound,
    s_blowup_terminal,
    s_line,
    s_line_point_bound,
    s_line_terminal,
)
from .polytope import (
    DegreeMismatch,
    HalfSpace,
    PiecewisePoly,
    Polytope,
    UnboundedPolytope,
    clip,
    enumerate_vertices,
    integrate_affine,
    integrate_piecewise,
    volume,
)
from .registry import (
    BatchRow,
    FamilyRecord,
    Provenance,
    Registry,
    SchemaError,
    batch_verdict,
    load,
    load_default,
    save,
)
from .scroll import (
    DivisorClass,
    L,
    M,
    NotBig,
    Ray,
    RayDivisor,
    ScrollTriple,
    ToricValuation,
    class_to_rays,
    degree_and_genus,
    fan,
    fiber_s_lower_bound,
    moment_polytope,
    moment_polytope_of,
    s_closed_form,
    s_toric_valuation,
    vol,
)
from .verdict import (
    AssertedHypotheses,
    CertificateItem,
    DuValType,
    Hypothesis,
    PreconditionFailed,
    Verdict,
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

__version__ = "0.1.0"
