"""Two independent solution paths for the ball-plus-halfspace QP, cross-checked.

The enumeration path walks the finitely many candidate faces exactly:
interior stationary point, ball-boundary KKT points, the stationary point of
the linear face, and the global minimizer on the sphere-slice where both
constraints bind.  The conic path solves the exact SOCP/SDP relaxation and
recovers a rank-one point.  solve_full runs both, certifies the winner, and
flags (never hides) disagreements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import formulate, trs
from .certify import (
    Certificate,
    DualityReport,
    check_certificate,
    check_dimension_conditions,
    diagnose_duality,
)
from .conic import MAXITER, OPTIMAL, SolverOptions
from .linalg import min_eig, solve_shifted, sym_eigen
from .model import EtrsProblem, normalize, validate
from .recover import recover_optimal

__all__ = [
    "INTERIOR",
    "BALL_ONLY",
    "LINEAR_ONLY",
    "BOTH",
    "Candidate",
    "SolveReport",
    "InfeasibleProblem",
    "NoCandidates",
    "SolveFailed",
    "solve_enumeration",
    "solve_full",
]

INTERIOR = "Interior"
BALL_ONLY = "BallOnly"
LINEAR_ONLY = "LinearOnly"
BOTH = "Both"

PATH_CONIC = "Conic"
PATH_ENUMERATION = "Enumeration"
PATH_AGREEMENT = "Agreement"


class InfeasibleProblem(Exception):
    """Ball and half-space do not intersect."""


class NoCandidates(Exception):
    """Enumeration produced nothing feasible (should be impossible)."""


class SolveFailed(Exception):
    """Both solution paths failed."""


@dataclass(frozen=True)
class Candidate:
    x: np.ndarray
    objective: float
    activity: str
    source: str
    multiplier: float | None = None  # ball multiplier when known


@dataclass
class SolveReport:
    optimal_x: np.ndarray | None = None
    optimal_value: float | None = None
    path: str = PATH_ENUMERATION
    candidates: list = field(default_factory=list)
    relaxations: dict = field(default_factory=dict)
    certificate: Certificate | None = None
    duality: DualityReport | None = None
    discrepancies: list = field(default_factory=list)
    enumeration_value: float | None = None
    conic_value: float | None = None
    lifted: formulate.LiftedSolution | None = None
    dimension: object | None = None
    reduces_to_trs: bool = False


def _activity(problem: EtrsProblem, x, tol: float) -> str:
    ball = abs(problem.ball_residual(x)) <= tol
    lin = abs(problem.linear_residual(x)) <= tol and np.any(problem.b != 0.0)
    if ball and lin:
        return BOTH
    if ball:
        return BALL_ONLY
    if lin:
        return LINEAR_ONLY
    return INTERIOR


def _nullspace_basis(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {w : b'w = 0} via the Householder trick."""
    n = len(b)
    u = b / np.linalg.norm(b)
    e = np.zeros(n)
    e[0] = 1.0
    v = u - e
    if np.linalg.norm(v) < 1e-14:
        H = np.eye(n)
    else:
        v /= np.linalg.norm(v)
        H = np.eye(n) - 2.0 * np.outer(v, v)
    return H[:, 1:]  # columns 2..n are orthogonal to u


def _feasibility_tol(problem: EtrsProblem) -> float:
    return 1e-8 * (1.0 + abs(problem.beta) + np.linalg.norm(problem.b))


def solve_enumeration(problem: EtrsProblem) -> SolveReport:
    """Exact solve by finite candidate enumeration over activity patterns.

    Works on the unit-ball form (delta is normalized away and the point is
    scaled back).  Every candidate is feasibility-filtered, so spurious
    stationary points can only add candidates, never corrupt the minimum.
    """
    scaled, back = normalize(problem)
    b = scaled.b
    bnorm = float(np.linalg.norm(b))
    b_zero = bnorm == 0.0
    if b_zero and scaled.beta < 0.0:
        raise InfeasibleProblem("b = 0 with beta < 0 excludes every point")
    if not b_zero and -bnorm > scaled.beta:
        raise InfeasibleProblem("min of b'x over the ball exceeds beta")

    tol = _feasibility_tol(scaled)
    act_tol = 1e-6 * (1.0 + abs(scaled.beta) + bnorm)
    candidates: list[Candidate] = []

    def push(x, source, multiplier=None):
        x = np.asarray(x, dtype=float)
        if scaled.ball_residual(x) > tol or scaled.linear_residual(x) > tol:
            return
        candidates.append(
            Candidate(
                x=x,
                objective=scaled.objective(x),
                activity=_activity(scaled, x, act_tol),
                source=source,
                multiplier=multiplier,
            )
        )

    # (a) unconstrained stationary point, kept when strictly interior
    if min_eig(scaled.A) > 1e-10 * (1.0 + np.linalg.norm(scaled.A, "fro")):
        x0 = solve_shifted(scaled.A, 0.0, -scaled.a)
        if np.linalg.norm(x0) < 1.0 - 1e-9 and scaled.linear_residual(x0) < -tol:
            push(x0, "interior", multiplier=0.0)

    # (b) every KKT point of the ball-only problem (global, LNGM, saddles)
    for p in trs.enumerate_boundary_kkt(scaled.A, scaled.a):
        push(p.x, f"trs:{p.kind}", multiplier=p.lam)
    g = trs.solve_trs_global(scaled.A, scaled.a)
    push(g.x, f"trs:{g.kind}", multiplier=g.lam)

    if not b_zero:
        xc = scaled.beta / (bnorm * bnorm) * b  # closest point of the hyperplane
        Z = _nullspace_basis(b)
        Ar = Z.T @ scaled.A @ Z
        ar = Z.T @ (scaled.A @ xc + scaled.a)

        # (c) stationary point on the linear face, kept when the reduced
        # Hessian is PSD and the point is strictly inside the ball
        red_scale = 1.0 + np.linalg.norm(Ar, "fro")
        if min_eig(Ar) >= -1e-9 * red_scale:
            w, *_ = np.linalg.lstsq(Ar, -ar, rcond=None)
            if np.linalg.norm(Ar @ w + ar) <= 1e-8 * red_scale * (1.0 + np.linalg.norm(ar)):
                x = xc + Z @ w
                if np.linalg.norm(x) < 1.0 - 1e-9:
                    push(x, "linear-face")

        # (d) sphere slice where both constraints are active
        rad_sq = 1.0 - float(xc @ xc)
        if rad_sq > 1e-14:
            eq = trs.solve_equality_trs(Ar, ar, rad_sq)
            push(xc + Z @ eq.x, "both-active")
        elif abs(rad_sq) <= 1e-14:
            push(xc, "both-active")

    if not candidates:
        raise NoCandidates("feasible compact problem produced no candidate")

    best = min(candidates, key=lambda c: c.objective)
    return SolveReport(
        optimal_x=back.point(best.x),
        optimal_value=back.value(best.objective),
        path=PATH_ENUMERATION,
        candidates=candidates,
        enumeration_value=back.value(best.objective),
        reduces_to_trs=b_zero,
    )


def solve_full(problem: EtrsProblem, options: SolverOptions | None = None) -> SolveReport:
    """Run enumeration and the conic pipeline, cross-check, certify, diagnose.

    Disagreement beyond 1e-4 relative between the two paths is recorded as a
    discrepancy flag; the smaller (feasible) value still wins the report.
    """
    validate(problem)
    scaled, back = normalize(problem)
    if options is None:
        options = SolverOptions(tol=1e-12, accept_tol=1e-9, max_iter=200)

    report = SolveReport(path=PATH_AGREEMENT)
    enum_report = None
    enum_error = None
    try:
        enum_report = solve_enumeration(problem)
        report.candidates = enum_report.candidates
        report.enumeration_value = enum_report.enumeration_value
        report.reduces_to_trs = enum_report.reduces_to_trs
    except (InfeasibleProblem, NoCandidates) as exc:
        enum_error = exc

    conic_error = None
    recovered = None
    lifted = None
    statuses = {}
    for kind, tag in (
        (formulate.CLASSICAL_SDP, "sdp"),
        (formulate.DUAL_LMI, "lmi"),
        (formulate.PRIMAL_SOCPSDP, "socpsdp"),
    ):
        try:
            value, sol, prog = formulate.solve_relaxation(scaled, kind, options)
            statuses[tag] = sol.status
            if sol.status in (OPTIMAL, MAXITER):
                report.relaxations[tag] = value
            if kind == formulate.PRIMAL_SOCPSDP and sol.status == OPTIMAL:
                lifted = formulate.extract_lifted(sol, scaled, prog)
        except Exception as exc:
            statuses[tag] = f"error: {exc}"
            conic_error = exc
    if lifted is not None:
        report.lifted = lifted
        try:
            recovered = recover_optimal(lifted, scaled)
            report.conic_value = back.value(recovered.objective)
        except Exception as exc:
            conic_error = exc
            report.discrepancies.append(f"recovery failed: {exc}")
    else:
        report.discrepancies.append(
            f"socpsdp relaxation did not reach Optimal (statuses: {statuses})"
        )

    if enum_report is None and recovered is None:
        if isinstance(enum_error, InfeasibleProblem):
            raise enum_error
        raise SolveFailed(f"enumeration: {enum_error}; conic: {conic_error}")

    # pick the winner; both paths produce feasible points by construction
    values = []
    if enum_report is not None:
        values.append((enum_report.optimal_value, enum_report.optimal_x, PATH_ENUMERATION))
    if recovered is not None:
        values.append((report.conic_value, back.point(recovered.x), PATH_CONIC))
    best_value, best_x, best_path = min(values, key=lambda v: v[0])
    report.optimal_value = best_value
    report.optimal_x = best_x
    report.path = PATH_AGREEMENT if len(values) == 2 else best_path

    if len(values) == 2:
        gap = abs(values[0][0] - values[1][0]) / (1.0 + abs(best_value))
        if gap > 1e-4:
            report.discrepancies.append(
                f"paths disagree: enumeration {values[0][0]:.8g} vs conic "
                f"{values[1][0]:.8g} (relative gap {gap:.2e})"
            )

    # bound chain sanity: classical <= socpsdp <= exact (up to solver noise)
    slack = 1e-6 * (1.0 + abs(best_value))
    sdp = report.relaxations.get("sdp")
    socpsdp = report.relaxations.get("socpsdp")
    if sdp is not None and socpsdp is not None and sdp > socpsdp + slack:
        report.discrepancies.append(
            f"bound chain violated: classical {sdp:.8g} > socpsdp {socpsdp:.8g}"
        )
    if socpsdp is not None and socpsdp > best_value + slack:
        report.discrepancies.append(
            f"bound chain violated: socpsdp {socpsdp:.8g} > exact {best_value:.8g}"
        )

    if lifted is not None:
        # certify the winner with the verified relaxation multipliers
        x_unit = np.asarray(report.optimal_x, dtype=float) / problem.delta
        cert = check_certificate(
            scaled,
            x_unit,
            Certificate(lambda0=lifted.lambda0, u0=lifted.u0, u=lifted.u),
        )
        report.certificate = cert
        if not cert.verdict:
            report.discrepancies.append(
                f"certificate failed conditions: {cert.failed_conditions()}"
            )

    if socpsdp is not None and sdp is not None:
        report.duality = diagnose_duality(
            report.optimal_value, sdp, socpsdp, report.certificate
        )
    report.dimension = check_dimension_conditions(problem)
    return report
