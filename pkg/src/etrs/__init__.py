"""Solver toolkit for the extended trust-region subproblem: minimize an
indefinite quadratic over the unit ball intersected with one linear
inequality, with exact SOCP/SDP relaxations, rank-one recovery, KKT
enumeration, and global-optimality certificates."""

from .certify import (
    Certificate,
    DimensionReport,
    DualityReport,
    check_certificate,
    check_dimension_conditions,
    diagnose_duality,
)
from .formulate import (
    CLASSICAL_SDP,
    DUAL_LMI,
    PRIMAL_SOCPSDP,
    LiftedSolution,
    build_classical_sdp,
    build_dual_lmi,
    build_primal_socpsdp,
    extract_lifted,
    solve_relaxation,
)
from .model import (
    EtrsProblem,
    FeasiblePoint,
    find_slater,
    normalize,
    problem_from_json,
    problem_to_json,
    validate,
)
from .oracle import OracleResult, sample_minimize
from .recover import RankOneTerms, recover_optimal, sturm_zhang_decompose
from .solve import SolveReport, solve_enumeration, solve_full
from .trs import KktPoint, enumerate_boundary_kkt, solve_trs_global

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "DimensionReport",
    "DualityReport",
    "check_certificate",
    "check_dimension_conditions",
    "diagnose_duality",
    "CLASSICAL_SDP",
    "DUAL_LMI",
    "PRIMAL_SOCPSDP",
    "LiftedSolution",
    "build_classical_sdp",
    "build_dual_lmi",
    "build_primal_socpsdp",
    "extract_lifted",
    "solve_relaxation",
    "EtrsProblem",
    "FeasiblePoint",
    "find_slater",
    "normalize",
    "problem_from_json",
    "problem_to_json",
    "validate",
    "OracleResult",
    "sample_minimize",
    "RankOneTerms",
    "recover_optimal",
    "sturm_zhang_decompose",
    "SolveReport",
    "solve_enumeration",
    "solve_full",
    "KktPoint",
    "enumerate_boundary_kkt",
    "solve_trs_global",
]
