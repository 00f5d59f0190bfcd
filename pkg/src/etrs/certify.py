"""Global-optimality certificates and exactness diagnostics.

A point x is globally optimal for the ball-plus-halfspace QP iff multipliers
lambda0 >= 0 and (-u0; u) in the Lorentz cone exist with

  (i)   (2A + 2*lambda0*I + b u' + u b') x = -(2a - beta*u - b*u0),
  (ii)  lambda0 (||x||^2 - 1) = 0  and  (u'x - u0)(b'x - beta) = 0,
  (iii) 2A + 2*lambda0*I + b u' + u b'  PSD.

check_certificate re-evaluates all of this from scratch; multipliers coming
out of the conic solver are verified, never trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import matrix_rank, sym_eigen
from .model import EtrsProblem

__all__ = [
    "Certificate",
    "DimensionReport",
    "DualityReport",
    "check_certificate",
    "check_dimension_conditions",
    "diagnose_duality",
]


@dataclass(frozen=True)
class Certificate:
    """Multipliers plus recomputed residuals and a per-condition verdict."""

    lambda0: float
    u0: float
    u: np.ndarray
    residuals: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    verdict: bool | None = None

    @property
    def soc_margin(self) -> float:
        return float(-self.u0 - np.linalg.norm(self.u))

    def failed_conditions(self) -> list[str]:
        return [name for name, ok in self.flags.items() if not ok]


def shifted_hessian(problem: EtrsProblem, cert: Certificate) -> np.ndarray:
    """2A + 2*lambda0*I + b u' + u b', the matrix of conditions (i)/(iii)."""
    n = problem.n
    return (
        2.0 * problem.A
        + 2.0 * cert.lambda0 * np.eye(n)
        + np.outer(problem.b, cert.u)
        + np.outer(cert.u, problem.b)
    )


def check_certificate(problem: EtrsProblem, x, cert: Certificate) -> Certificate:
    """Evaluate the optimality conditions at x and attach a verdict.

    Tolerances are scale-relative: stationarity 1e-6*(1+||a||), the two
    complementarity products 1e-6, PSD minimum eigenvalue down to
    -1e-7*(1+||M||_F), cone membership and sign at 1e-8.  x itself must be
    feasible (model tolerances) or the verdict fails on the precheck.
    """
    x = np.asarray(x, dtype=float)
    M = shifted_hessian(problem, cert)
    rhs = 2.0 * problem.a - problem.beta * cert.u - problem.b * cert.u0
    stationarity = float(np.linalg.norm(M @ x + rhs))
    comp_ball = abs(cert.lambda0 * (float(x @ x) - 1.0))
    comp_linear = abs(
        (float(cert.u @ x) - cert.u0) * problem.linear_residual(x)
    )
    psd_min = float(sym_eigen(M).eigenvalues[0])
    soc_margin = float(-cert.u0 - np.linalg.norm(cert.u))

    residuals = {
        "stationarity": stationarity,
        "psd_min_eig": psd_min,
        "comp_ball": comp_ball,
        "comp_linear": comp_linear,
        "soc_margin": soc_margin,
    }
    flags = {
        "feasible": problem.is_feasible(x),
        "stationarity": stationarity <= 1e-6 * (1.0 + np.linalg.norm(problem.a)),
        "comp_ball": comp_ball <= 1e-6,
        "comp_linear": comp_linear <= 1e-6,
        "psd": psd_min >= -1e-7 * (1.0 + np.linalg.norm(M, "fro")),
        "soc": soc_margin >= -1e-8,
        "lambda0_sign": cert.lambda0 >= -1e-8,
    }
    return Certificate(
        lambda0=cert.lambda0,
        u0=cert.u0,
        u=np.asarray(cert.u, dtype=float),
        residuals=residuals,
        flags=flags,
        verdict=all(flags.values()),
    )


@dataclass(frozen=True)
class DimensionReport:
    """The two known dimension conditions under which simpler theory applies."""

    lambda1: float
    lambda2: float
    ker_dim: int
    rank_cond: int
    beck_eldar_holds: bool  # lambda1 == lambda2
    hsia_holds: bool  # rank([A - lambda1*I, b]) <= n - 1


def check_dimension_conditions(problem: EtrsProblem) -> DimensionReport:
    eig = sym_eigen(problem.A)
    w = eig.eigenvalues
    lam1 = float(w[0])
    lam2 = float(w[1]) if problem.n > 1 else lam1
    tol = 1e-8 * (1.0 + abs(lam1))
    ker_dim = int(np.sum(w - lam1 <= tol))
    stacked = np.hstack([problem.A - lam1 * np.eye(problem.n), problem.b[:, None]])
    rank_cond = matrix_rank(stacked)
    return DimensionReport(
        lambda1=lam1,
        lambda2=lam2,
        ker_dim=ker_dim,
        rank_cond=rank_cond,
        beck_eldar_holds=abs(lam2 - lam1) <= tol,
        hsia_holds=rank_cond <= problem.n - 1,
    )


@dataclass(frozen=True)
class DualityReport:
    """Relaxation gaps against the exact value and the u=0 exactness flag."""

    exact_value: float
    classical_value: float
    socpsdp_value: float
    gap_classical: float
    gap_socpsdp: float
    classical_exact: bool
    socpsdp_exact: bool
    corollary_u_zero: bool  # dual has u ~ 0, u0 != 0: classical SDP is exact


def diagnose_duality(
    exact_value: float,
    classical_value: float,
    socpsdp_value: float,
    certificate: Certificate | None = None,
) -> DualityReport:
    """Gap report.  Gaps are (exact - relaxation), nonnegative up to solver noise.

    The u~0 flag mirrors the sufficient condition for classical-SDP
    exactness: when the optimal multiplier has u = 0 (with u0 free below
    zero), the linear constraint enters only linearly and strong duality
    carries over from the plain trust-region subproblem.
    """
    gap_c = exact_value - classical_value
    gap_s = exact_value - socpsdp_value
    tol = 1e-5 * (1.0 + abs(exact_value))
    u_zero = False
    if certificate is not None:
        u_zero = (
            float(np.linalg.norm(certificate.u)) <= 1e-7
            and abs(certificate.u0) > 1e-7
        )
    return DualityReport(
        exact_value=exact_value,
        classical_value=classical_value,
        socpsdp_value=socpsdp_value,
        gap_classical=gap_c,
        gap_socpsdp=gap_s,
        classical_exact=abs(gap_c) <= tol,
        socpsdp_exact=abs(gap_s) <= tol,
        corollary_u_zero=u_zero,
    )
