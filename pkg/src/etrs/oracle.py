"""Brute-force sampling oracle.

Independent of the conic and enumeration machinery on purpose: it knows
nothing about KKT systems or relaxations, it just samples the feasible set,
seeds a few structurally interesting points, and polishes everything with
projected gradient descent.  Used to arbitrate disagreements and to back
derived test values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import sym_eigen
from .model import EtrsProblem, NoSlater, find_slater
from .trs import enumerate_boundary_kkt, solve_trs_global

__all__ = ["OracleResult", "EmptyFeasibleSet", "sample_minimize"]

_POLISH_STEPS = 500


class EmptyFeasibleSet(Exception):
    """Ball and half-space do not intersect."""


@dataclass(frozen=True)
class OracleResult:
    best_x: np.ndarray
    best_value: float
    samples_used: int
    polish_iterations: int


def _project(points: np.ndarray, problem: EtrsProblem) -> np.ndarray:
    """Exact Euclidean projection onto {||x|| <= delta, b'x <= beta}.

    Case analysis: the half-space clip alone, the ball clip alone, or —
    when each single clip lands outside the other set — the projection onto
    their intersection circle ||x|| = delta, b'x = beta (center beta*b/||b||^2,
    radius from Pythagoras, direction = the b-orthogonal component).
    """
    d = problem.delta
    b = problem.b
    bb = float(b @ b)
    y = np.asarray(points, dtype=float)

    if bb == 0.0:
        norms = np.linalg.norm(y, axis=1)
        out = y.copy()
        over = norms > d
        if np.any(over):
            out[over] = y[over] * (d / norms[over])[:, None]
        return out

    # candidate 1: half-space clip, valid when it lands inside the ball
    p1 = y - np.outer(np.maximum(y @ b - problem.beta, 0.0) / bb, b)
    out = p1.copy()
    unresolved = np.linalg.norm(p1, axis=1) > d
    if not np.any(unresolved):
        return out
    # candidate 2: radial ball clip of the ORIGINAL point, valid when it
    # satisfies the half-space
    yu = y[unresolved]
    # the origin only lands here when the feasible set is empty; keep the
    # arithmetic finite regardless
    yu_norm = np.maximum(np.linalg.norm(yu, axis=1), 1e-300)
    p2 = yu * (d / yu_norm)[:, None]
    both = p2 @ b > problem.beta
    if np.any(both):
        # both constraints active: project onto the circle ||x|| = d,
        # b'x = beta (center beta*b/||b||^2, radius by Pythagoras, direction
        # = b-orthogonal component of the original point)
        center = problem.beta / bb * b
        r = np.sqrt(max(d * d - float(center @ center), 0.0))
        z = yu[both] - center
        z -= np.outer(z @ b / bb, b)
        zn = np.linalg.norm(z, axis=1)
        # a vanishing b-orthogonal component leaves the circle direction
        # free; pick one deterministically
        degenerate = zn < 1e-300
        if np.any(degenerate):
            q = np.eye(problem.n)[np.argmin(np.abs(b))].astype(float)
            q -= (q @ b) / bb * b
            z[degenerate] = q / np.linalg.norm(q)
            zn[degenerate] = 1.0
        p2[both] = center + r * z / zn[:, None]
    out[unresolved] = p2
    return out


def _deterministic_seeds(problem: EtrsProblem) -> list[np.ndarray]:
    d = problem.delta
    seeds = [np.zeros(problem.n)]
    eig = sym_eigen(problem.A)
    for i in range(problem.n):
        q = eig.eigenvectors[:, i]
        seeds += [d * q, -d * q]
    try:
        # TRS helpers work on the unit ball; rescale through x = d * x_tilde
        At, at = d * d * problem.A, d * problem.a
        seeds.append(d * solve_trs_global(At, at).x)
        seeds += [d * p.x for p in enumerate_boundary_kkt(At, at)]
    except Exception:
        pass  # TRS machinery failing must not take the oracle down
    bb = float(problem.b @ problem.b)
    if bb > 0.0:
        seeds.append(problem.beta / bb * problem.b)  # sphere-slice center
    witness = find_slater(problem)
    if not isinstance(witness, NoSlater):
        seeds.append(witness.x_hat)
    return seeds


def sample_minimize(problem: EtrsProblem, budget: int = 200_000, seed: int = 0) -> OracleResult:
    """Minimize by uniform ball sampling + projected gradient polishing.

    Deterministic given (budget, seed); samples are drawn as a single
    ordered stream so a smaller budget sees a prefix of a larger one (the
    best value is monotone in the budget).  Sampled points violating the
    linear constraint are rejected; the deterministic seeds (eigenvector
    poles, TRS candidates, slice center, Slater witness) are projected into
    the feasible set instead.
    """
    n = problem.n
    d = problem.delta
    rng = np.random.default_rng(seed)

    # uniform in the ball: normal direction, radius ~ delta * U^(1/n)
    dirs = rng.normal(size=(budget, n))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
    radii = d * rng.uniform(size=budget) ** (1.0 / n)
    samples = dirs * radii[:, None]
    feasible = samples @ problem.b <= problem.beta
    survivors = samples[feasible]

    seeds = _project(np.array(_deterministic_seeds(problem)), problem)
    seed_ok = seeds @ problem.b - problem.beta <= problem.tol_feas
    pool = np.vstack([survivors, seeds[seed_ok]])
    if pool.shape[0] == 0:
        raise EmptyFeasibleSet("no feasible sample or seed; ball misses the half-space")

    # projected gradient descent, vectorized across the whole pool
    step = 1.0 / (2.0 * np.abs(sym_eigen(problem.A).eigenvalues).max() + 1.0)
    x = pool
    for _ in range(_POLISH_STEPS):
        grad = 2.0 * (x @ problem.A) + 2.0 * problem.a
        x = _project(x - step * grad, problem)

    values = np.einsum("ij,jk,ik->i", x, problem.A, x) + 2.0 * (x @ problem.a)
    # points that drifted infeasible (projection is approximate) are excluded
    ok = (x @ problem.b - problem.beta <= 1e-9) & (
        np.linalg.norm(x, axis=1) <= d + 1e-9
    )
    if not np.any(ok):
        raise EmptyFeasibleSet("polishing produced no feasible point")
    values = np.where(ok, values, np.inf)
    best = int(np.argmin(values))
    return OracleResult(
        best_x=x[best].copy(),
        best_value=float(values[best]),
        samples_used=budget,
        polish_iterations=_POLISH_STEPS,
    )
