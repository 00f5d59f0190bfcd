"""Rank-one extraction of an optimal point from a lifted moment matrix.

The SOCP/SDP relaxation returns Y = [[1, x'],[x, X]] that need not be rank
one (Example 4 of the fixtures is the canonical case).  The machinery here
is a matrix rank-one decomposition that can keep all terms on one side of a
quadratic form, followed by a three-way case analysis on

    J = diag(1, -I),   g = (beta; -b),   y_g = Y g,

which always produces a unit-ball-feasible x attaining the relaxation value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .formulate import LiftedSolution
from .linalg import sym_eigen
from .model import EtrsProblem, FeasiblePoint

__all__ = [
    "DecompKit",
    "RankOneTerms",
    "PreconditionViolated",
    "CaseDispatchAmbiguous",
    "RecoveryFailed",
    "sturm_zhang_decompose",
    "recover_optimal",
]


class PreconditionViolated(ValueError):
    """Decomposition requires Y PSD and G.Y >= 0."""


class CaseDispatchAmbiguous(Exception):
    """Case classification quantities are ill-defined (non-finite)."""


class RecoveryFailed(Exception):
    """Recovered point misses the relaxation value; upstream solve is bad."""


@dataclass(frozen=True)
class DecompKit:
    """The recurring objects of the case analysis, bundled for inspection."""

    J: np.ndarray
    g: np.ndarray
    Y: np.ndarray
    y_g: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "y_g", self.Y @ self.g)

    @property
    def t_g(self) -> float:
        return float(self.y_g[0])

    @property
    def j_dot_y(self) -> float:
        """J.Y = Y00 - trace(X); nonnegative iff trace(X) <= Y00."""
        return float(np.sum(np.diag(self.J) * np.diag(self.Y)))

    @classmethod
    def for_problem(cls, Y: np.ndarray, problem: EtrsProblem) -> "DecompKit":
        n1 = Y.shape[0]
        J = np.diag(np.concatenate(([1.0], -np.ones(n1 - 1))))
        g = np.concatenate(([problem.beta], -problem.b))
        return cls(J=J, g=g, Y=np.asarray(Y, dtype=float))


@dataclass(frozen=True)
class RankOneTerms:
    """Vectors y_i with Y = sum y_i y_i'."""

    terms: tuple[np.ndarray, ...]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def reconstruct(self) -> np.ndarray:
        n = self.terms[0].shape[0] if self.terms else 0
        out = np.zeros((n, n))
        for y in self.terms:
            out += np.outer(y, y)
        return out


def _form(y, G):
    return float(y @ G @ y)


def sturm_zhang_decompose(Y, G, tol: float | None = None) -> RankOneTerms:
    """Decompose PSD Y into rank-one terms with all y_i' G y_i >= 0.

    Requires G.Y >= 0.  Starts from the scaled eigenvectors of Y; whenever a
    term with a positive form and one with a negative form coexist, the pair
    is rotated so one form becomes exactly zero (the quadratic in gamma
    (y_i + gamma y_j)' G (y_i + gamma y_j) = 0 has real roots because the
    forms have opposite signs).  Each rotation preserves the sum of outer
    products, so at most r - 1 rotations are needed.  When G.Y = 0 every
    final form vanishes (up to tolerance).
    """
    Y = np.asarray(Y, dtype=float)
    G = np.asarray(G, dtype=float)
    scale = 1.0 + float(np.linalg.norm(Y, "fro"))
    if tol is None:
        tol = 1e-9 * scale * (1.0 + np.linalg.norm(G, "fro"))
    eig = sym_eigen(Y)
    if eig.eigenvalues[0] < -1e-8 * scale:
        raise PreconditionViolated(f"Y has eigenvalue {eig.eigenvalues[0]}, not PSD")
    gy = float(np.sum(G * Y))
    if gy < -1e-6 * scale * (1.0 + np.linalg.norm(G, "fro")):
        raise PreconditionViolated(f"G.Y = {gy} < 0")

    rank_tol = 1e-9 * (1.0 + eig.eigenvalues[-1])
    terms = [
        np.sqrt(w) * eig.eigenvectors[:, i]
        for i, w in enumerate(eig.eigenvalues)
        if w > rank_tol
    ]
    if not terms:
        return RankOneTerms(terms=())

    for _ in range(len(terms)):  # at most r-1 rotations ever fire
        forms = [_form(y, G) for y in terms]
        pos = [k for k, f in enumerate(forms) if f > tol]
        neg = [k for k, f in enumerate(forms) if f < -tol]
        if not pos or not neg:
            break
        i, j = pos[0], neg[0]
        yi, yj = terms[i], terms[j]
        fi, fj, fij = forms[i], forms[j], float(yi @ G @ yj)
        # fj*gamma^2 + 2*fij*gamma + fi = 0; discriminant > 0 since fi*fj < 0
        disc = np.sqrt(fij * fij - fj * fi)
        gamma = (-fij + disc) / fj if fij <= 0 else (-fij - disc) / fj
        norm = np.sqrt(1.0 + gamma * gamma)
        terms[i] = (yi + gamma * yj) / norm
        terms[j] = (yj - gamma * yi) / norm
    return RankOneTerms(terms=tuple(terms))


def _classification_tol(Y) -> float:
    return 1e-7 * (1.0 + float(np.linalg.norm(Y, "fro")))


def _point_from_lifted_vector(y, problem: EtrsProblem) -> FeasiblePoint:
    if abs(y[0]) < 1e-12 * (1.0 + np.linalg.norm(y)):
        raise RecoveryFailed("lifted vector has (numerically) zero head")
    return problem.feasible_point(y[1:] / y[0])


def recover_optimal(lifted: LiftedSolution, problem: EtrsProblem) -> FeasiblePoint:
    """Extract an optimal feasible point from the lifted SOCP/SDP solution.

    Dispatch (priority order; '= 0' means below a scale-relative 1e-7):
      rank-one Y     -> x = Y[1:,0] directly;
      Case 1, Yg = 0 -> decompose Y against J, all terms land in the Lorentz
                        cone after a sign flip, any term gives x;
      Case 2, J.Y > 0 -> x from y_g = Yg itself;
      Case 3, J.Y = 0 -> deflate Y by the y_g direction; if y_g is on the
                        cone boundary (3.1) it gives x, otherwise (3.2) mix
                        y_g with a deflated term whose J-form is negative
                        until the boundary is hit.
    The result must attain the relaxation value; a miss beyond 1e-4 raises
    RecoveryFailed (it signals an inaccurate conic solve, not a bad case).
    """
    Y = np.asarray(lifted.Y, dtype=float)
    if not np.all(np.isfinite(Y)):
        raise CaseDispatchAmbiguous("lifted matrix has non-finite entries")
    kit = DecompKit.for_problem(Y, problem)
    tol = _classification_tol(Y)

    eig = sym_eigen(Y)
    if eig.eigenvalues[-2] <= tol:
        # rank-one shortcut: Y ~ yy' and the corner is pinned to 1
        point = problem.feasible_point(Y[1:, 0] / Y[0, 0])
    elif np.linalg.norm(kit.y_g) <= tol * (1.0 + np.linalg.norm(kit.g)):
        point = _case1(kit, problem)
    elif kit.j_dot_y > tol:
        point = _case2(kit, problem)
    else:
        point = _case3(kit, problem, tol)

    gap = abs(point.objective - lifted.value) / (1.0 + abs(lifted.value))
    if gap > 1e-4:
        raise RecoveryFailed(
            f"recovered objective {point.objective} misses relaxation value "
            f"{lifted.value} (relative gap {gap:.2e})"
        )
    return point


def _case1(kit: DecompKit, problem: EtrsProblem) -> FeasiblePoint:
    # Yg = 0: every decomposition term against J has a nonnegative J-form,
    # i.e. lies in the Lorentz cone up to a sign we are free to flip.
    terms = sturm_zhang_decompose(kit.Y, kit.J)
    flipped = [y if y[0] >= 0.0 else -y for y in terms]
    best = max(flipped, key=lambda y: y[0])
    return _point_from_lifted_vector(best, problem)


def _case2(kit: DecompKit, problem: EtrsProblem) -> FeasiblePoint:
    return _point_from_lifted_vector(kit.y_g, problem)


def _case3(kit: DecompKit, problem: EtrsProblem, tol: float) -> FeasiblePoint:
    y_g = kit.y_g
    jform_g = _form(y_g, kit.J)
    if abs(jform_g) <= tol * (1.0 + float(y_g @ y_g)):
        # 3.1: y_g sits on the cone boundary already
        return _point_from_lifted_vector(y_g, problem)
    # 3.2: deflate the y_g direction; J.Ytilde < 0 so some eigen-term of the
    # deflation has a strictly negative J-form
    gyg = float(kit.g @ y_g)
    Yt = kit.Y - np.outer(y_g, y_g) / gyg
    eig = sym_eigen(Yt)
    candidate = None
    for i, w in enumerate(eig.eigenvalues):
        if w <= tol:
            continue
        y = np.sqrt(w) * eig.eigenvectors[:, i]
        if _form(y, kit.J) < -tol:
            candidate = y
            break
    if candidate is None:
        raise CaseDispatchAmbiguous("no deflated term with negative J-form found")
    # (y_g + alpha*y)' J (y_g + alpha*y) = 0: leading coefficient < 0 and
    # constant > 0 force two real roots of opposite signs
    aa = _form(candidate, kit.J)
    bb = float(y_g @ kit.J @ candidate)
    cc = jform_g
    disc = np.sqrt(bb * bb - aa * cc)
    roots = [(-bb + disc) / aa, (-bb - disc) / aa]
    heads = [y_g[0] + alpha * candidate[0] for alpha in roots]
    positive = [(alpha, h) for alpha, h in zip(roots, heads) if h > tol]
    if positive:
        alpha = max(positive, key=lambda p: p[1])[0]
    else:
        warnings.warn(
            "both mixing roots leave a near-zero head; taking the larger root",
            RuntimeWarning,
            stacklevel=2,
        )
        alpha = max(roots, key=abs)
    return _point_from_lifted_vector(y_g + alpha * candidate, problem)
