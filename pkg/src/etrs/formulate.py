"""Builders for the three conic relaxations of the ball-plus-halfspace QP.

All three work on the lifted moment matrix Y = [[1, x'],[x, X]] >= 0:

* classical SDP: trace(X) <= 1 and b'x <= beta, rank dropped;
* primal SOCP/SDP: the classical constraints strengthened to Y g in L_{n+1}
  with g = (beta; -b), i.e. ||beta*x - X b|| <= beta - b'x (exact for the
  original problem after rank-one recovery);
* dual LMI: max z over a linear matrix inequality in (lambda0, u0, u, z),
  the conic dual of the primal SOCP/SDP.

Problems must be in unit-ball form (delta = 1); use model.normalize first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import (
    OPTIMAL,
    ConeSpec,
    ConicProgram,
    ConicSolution,
    NonnegBlock,
    NotOptimal,
    PsdBlock,
    SocBlock,
    SolverOptions,
    smat,
    solve,
    svec,
    svec_dim,
)
from .model import EtrsProblem

__all__ = [
    "CLASSICAL_SDP",
    "DUAL_LMI",
    "PRIMAL_SOCPSDP",
    "LiftedSolution",
    "AlphaDrift",
    "build_classical_sdp",
    "build_dual_lmi",
    "build_primal_socpsdp",
    "build",
    "relaxation_value",
    "solve_relaxation",
    "extract_lifted",
]

CLASSICAL_SDP = "ClassicalSdp"
DUAL_LMI = "DualLmi"
PRIMAL_SOCPSDP = "PrimalSocpSdp"


class AlphaDrift(Exception):
    """The pinned corner of the moment matrix drifted away from 1."""


@dataclass(frozen=True)
class LiftedSolution:
    """Optimal moment matrix with the multipliers of the dual LMI."""

    Y: np.ndarray  # (n+1)x(n+1), Y[0,0] ~ 1
    value: float
    lambda0: float
    u0: float
    u: np.ndarray
    z: float

    @property
    def x(self) -> np.ndarray:
        return self.Y[1:, 0] / self.Y[0, 0]

    @property
    def X(self) -> np.ndarray:
        return self.Y[1:, 1:]


def _require_unit_ball(problem: EtrsProblem):
    if problem.delta != 1.0:
        raise ValueError("formulations require the unit-ball form; call normalize() first")


def _objective_matrix(problem: EtrsProblem) -> np.ndarray:
    n = problem.n
    C = np.zeros((n + 1, n + 1))
    C[1:, 1:] = problem.A
    C[0, 1:] = problem.a
    C[1:, 0] = problem.a
    return C


def _e_sym(n1: int, i: int, j: int) -> np.ndarray:
    M = np.zeros((n1, n1))
    M[i, j] += 0.5
    M[j, i] += 0.5
    return M


def _g_vector(problem: EtrsProblem) -> np.ndarray:
    return np.concatenate(([problem.beta], -problem.b))


def build_classical_sdp(problem: EtrsProblem) -> ConicProgram:
    """min A.X + 2a'x s.t. trace(X) <= 1, b'x <= beta, Y >= 0, Y00 = 1."""
    _require_unit_ball(problem)
    n = problem.n
    n1 = n + 1
    dY = svec_dim(n1)
    cone = ConeSpec((PsdBlock(n1), NonnegBlock(2)))
    c = np.concatenate([svec(_objective_matrix(problem)), np.zeros(2)])

    D = np.zeros((n1, n1))
    D[1:, 1:] = np.eye(n)
    Mb = np.zeros((n1, n1))
    Mb[0, 1:] = problem.b / 2.0
    Mb[1:, 0] = problem.b / 2.0

    rows = np.zeros((3, cone.dim))
    rows[0, :dY] = svec(_e_sym(n1, 0, 0))
    rows[1, :dY] = svec(D)
    rows[1, dY] = 1.0  # trace slack
    rows[2, :dY] = svec(Mb)
    rows[2, dY + 1] = 1.0  # linear slack
    r = np.array([1.0, 1.0, problem.beta])
    return ConicProgram(
        c=c, A=rows, r=r, cone=cone, groups={"corner": [0], "trace": [1], "linear": [2]}
    )


def build_primal_socpsdp(problem: EtrsProblem) -> ConicProgram:
    """The classical relaxation plus the second-order-cone rows v = Y g."""
    _require_unit_ball(problem)
    n = problem.n
    n1 = n + 1
    dY = svec_dim(n1)
    cone = ConeSpec((PsdBlock(n1), SocBlock(n1), NonnegBlock(1)))
    c = np.concatenate([svec(_objective_matrix(problem)), np.zeros(n1 + 1)])

    D = np.zeros((n1, n1))
    D[1:, 1:] = np.eye(n)
    g = _g_vector(problem)

    m = 2 + n1
    rows = np.zeros((m, cone.dim))
    rows[0, :dY] = svec(_e_sym(n1, 0, 0))
    rows[1, :dY] = svec(D)
    rows[1, dY + n1] = 1.0  # trace slack
    for k in range(n1):
        ek = np.zeros(n1)
        ek[k] = 1.0
        Gk = 0.5 * (np.outer(ek, g) + np.outer(g, ek))
        rows[2 + k, :dY] = -svec(Gk)
        rows[2 + k, dY + k] = 1.0
    r = np.concatenate([[1.0, 1.0], np.zeros(n1)])
    return ConicProgram(
        c=c,
        A=rows,
        r=r,
        cone=cone,
        groups={"corner": [0], "trace": [1], "soc": list(range(2, 2 + n1))},
    )


def build_dual_lmi(problem: EtrsProblem) -> ConicProgram:
    """max z s.t. the LMI in (lambda0, u0, u, z) holds and ||u|| <= -u0.

    z is eliminated analytically (it only shifts the LMI corner), so the
    program below minimizes lambda0 - beta*u0 + P00 over the PSD matrix P
    whose off-corner entries are pinned to the LMI expression; the value of
    the original maximization is the negative of this program's optimum.
    The SOC block stores v = (-u0; u).
    """
    _require_unit_ball(problem)
    n = problem.n
    n1 = n + 1
    dY = svec_dim(n1)
    cone = ConeSpec((NonnegBlock(1), SocBlock(n1), PsdBlock(n1)))
    off = 1 + n1  # offset of svec(P)

    c = np.zeros(cone.dim)
    c[0] = 1.0  # lambda0
    c[1] = problem.beta  # beta*v0 = -beta*u0
    c[off:] = svec(_e_sym(n1, 0, 0))  # P00

    rows = []
    rhs = []
    groups: dict[str, list[int]] = {"corner_row": [], "lmi_row": []}
    # P[0,i] + (beta/2) u_i - (b_i/2) v0 = a_i   (u_i = v_i)
    for i in range(1, n1):
        row = np.zeros(cone.dim)
        row[off:] = svec(_e_sym(n1, 0, i))
        row[1 + i] = problem.beta / 2.0
        row[1] = -problem.b[i - 1] / 2.0
        groups["corner_row"].append(len(rows))
        rows.append(row)
        rhs.append(problem.a[i - 1])
    # P[i,j] - lambda0*delta_ij - (b_i u_j + b_j u_i)/2 = A_ij
    for i in range(1, n1):
        for j in range(i, n1):
            row = np.zeros(cone.dim)
            row[off:] = svec(_e_sym(n1, i, j))
            if i == j:
                row[0] = -1.0
                row[1 + i] = -problem.b[i - 1]
            else:
                row[1 + j] = -problem.b[i - 1] / 2.0
                row[1 + i] = -problem.b[j - 1] / 2.0
            groups["lmi_row"].append(len(rows))
            rows.append(row)
            rhs.append(problem.A[i - 1, j - 1])
    return ConicProgram(
        c=c, A=np.array(rows), r=np.array(rhs), cone=cone, groups=groups
    )


_BUILDERS = {
    CLASSICAL_SDP: build_classical_sdp,
    DUAL_LMI: build_dual_lmi,
    PRIMAL_SOCPSDP: build_primal_socpsdp,
}


def build(problem: EtrsProblem, kind: str) -> ConicProgram:
    try:
        return _BUILDERS[kind](problem)
    except KeyError:
        raise ValueError(f"unknown relaxation kind {kind!r}") from None


def relaxation_value(kind: str, solution: ConicSolution) -> float:
    """Optimal value of the relaxation in the problem's own orientation."""
    if kind == DUAL_LMI:
        return -solution.primal_obj
    return solution.primal_obj


def solve_relaxation(
    problem: EtrsProblem, kind: str, options: SolverOptions | None = None
) -> tuple[float, ConicSolution, ConicProgram]:
    program = build(problem, kind)
    solution = solve(program, options)
    return relaxation_value(kind, solution), solution, program


def extract_lifted(
    solution: ConicSolution, problem: EtrsProblem, program: ConicProgram
) -> LiftedSolution:
    """Reassemble the moment matrix and the LMI multipliers from a solve.

    Works on the classical-SDP and primal-SOCP/SDP programs (the moment
    matrix is their leading PSD block); full (lambda0, u0, u) duals are
    only available from the primal SOCP/SDP, whose SOC rows carry them.
    """
    if solution.status != OPTIMAL:
        raise NotOptimal(f"solution status is {solution.status}")
    n = problem.n
    n1 = n + 1
    Y = smat(solution.s[: svec_dim(n1)], n1)
    alpha = Y[0, 0]
    if abs(alpha - 1.0) > 1e-6:
        raise AlphaDrift(f"moment-matrix corner is {alpha}, expected 1")

    lambda0 = -float(solution.y[program.groups["trace"][0]])
    z = float(solution.y[program.groups["corner"][0]]) - lambda0
    if "soc" in program.groups:
        y_soc = solution.y[np.asarray(program.groups["soc"], dtype=int)]
        u0 = float(y_soc[0])
        u = -y_soc[1:]
    else:
        # classical SDP carries only the scalar multiplier of b'x <= beta
        mu = -float(solution.y[program.groups["linear"][0]])
        u0 = -mu
        u = np.zeros(n)
    return LiftedSolution(
        Y=Y, value=float(solution.primal_obj), lambda0=lambda0, u0=u0, u=u, z=z
    )
