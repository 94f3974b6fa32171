"""Small dense convex solvers used by the safety layers."""

from .lmi import (
    AffineLmi,
    AffineMatrixMap,
    InequalitySdp,
    SecondOrderCone,
    StandardSdp,
    lift_norm_epigraph,
    solve_inequality_sdp,
    to_standard_sdp,
)
from .qp import Infeasible, QpProblem, solve_qp
from .trust_region import (
    SdpSolution,
    TrustRegionSdp,
    schur_block,
    schur_residuals,
    solve_trust_region_batch,
    solve_trust_region_sdp,
    trust_region_cost,
    trust_region_lmis,
)

__all__ = [
    "AffineLmi",
    "AffineMatrixMap",
    "InequalitySdp",
    "Infeasible",
    "QpProblem",
    "SdpSolution",
    "SecondOrderCone",
    "StandardSdp",
    "TrustRegionSdp",
    "lift_norm_epigraph",
    "schur_block",
    "schur_residuals",
    "solve_inequality_sdp",
    "solve_qp",
    "solve_trust_region_batch",
    "solve_trust_region_sdp",
    "to_standard_sdp",
    "trust_region_cost",
    "trust_region_lmis",
]
