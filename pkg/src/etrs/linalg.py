"""Dense symmetric linear algebra: Jacobi eigendecomposition, PSD tests,
shifted solves and numerical rank.

Everything here works on small dense matrices (n up to a few dozen), which
is the scale the rest of the toolkit operates at.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymEigen",
    "NoConvergence",
    "Singular",
    "sym_eigen",
    "min_eig",
    "is_psd",
    "solve_shifted",
    "matrix_rank",
]

_MAX_SWEEPS = 100


class NoConvergence(Exception):
    """Jacobi sweeps did not reduce the off-diagonal below tolerance."""


class Singular(Exception):
    """Shifted system (A + lambda I) x = rhs has no solution at this shift."""


@dataclass(frozen=True)
class SymEigen:
    """Full spectral decomposition M = Q diag(w) Q^T with w ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def _as_sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * (1.0 + np.abs(M).max(initial=0.0)):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def sym_eigen(M) -> SymEigen:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come out ascending; ties are broken by the original
    diagonal index so the ordering is deterministic.
    """
    A = _as_sym(M)
    n = A.shape[0]
    Q = np.eye(n)
    if n == 1:
        return SymEigen(A[0].copy(), Q)

    scale = np.linalg.norm(A, "fro")
    tol = 1e-14 * (1.0 + scale)
    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 0.25 * tol / n:
                    continue
                # classical 2x2 symmetric Schur rotation; guard against
                # theta**2 overflow for nearly-converged elements
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                A[[p, q], :] = rot.T @ A[[p, q], :]
                A[:, [p, q]] = A[:, [p, q]] @ rot
                A[p, q] = A[q, p] = 0.0
                Q[:, [p, q]] = Q[:, [p, q]] @ rot
    else:
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off > tol:
            raise NoConvergence(f"Jacobi did not converge in {_MAX_SWEEPS} sweeps")

    w = np.diag(A).copy()
    order = np.lexsort((np.arange(n), w))
    return SymEigen(w[order], Q[:, order])


def min_eig(M) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(sym_eigen(M).eigenvalues[0])


def is_psd(M, tol: float = 1e-9) -> bool:
    """True iff min_eig(M) >= -tol * (1 + ||M||_F)."""
    M = np.asarray(M, dtype=float)
    return min_eig(M) >= -tol * (1.0 + np.linalg.norm(M, "fro"))


def solve_shifted(A, lam: float, rhs) -> np.ndarray:
    """Solve (A + lam*I) x = rhs through the eigendecomposition of A.

    Raises Singular when the shift hits an eigenvalue whose eigenspace
    carries a non-negligible component of rhs (hard-case territory).
    When the rhs is orthogonal to the null eigenspace the minimum-norm
    solution is returned.
    """
    rhs = np.asarray(rhs, dtype=float)
    eig = sym_eigen(A)
    scale = 1.0 + np.abs(eig.eigenvalues).max(initial=0.0)
    shifted = eig.eigenvalues + lam
    c = eig.eigenvectors.T @ rhs
    small = np.abs(shifted) <= 1e-12 * scale
    if np.any(small & (np.abs(c) > 1e-12 * (1.0 + np.linalg.norm(rhs)))):
        raise Singular(f"shift {lam} is an eigenvalue pole for this rhs")
    coef = np.where(small, 0.0, c / np.where(small, 1.0, shifted))
    return eig.eigenvectors @ coef


def matrix_rank(M, tol: float = 1e-9) -> int:
    """Numerical rank: number of singular values above tol*max(dims)*sigma_max.

    Singular values are obtained from the eigenvalues of the smaller Gram
    matrix M^T M or M M^T.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[None, :]
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if min(M.shape) == 0:
        return 0
    gram = M @ M.T if M.shape[0] <= M.shape[1] else M.T @ M
    w = np.clip(sym_eigen(gram).eigenvalues, 0.0, None)
    wmax = w.max(initial=0.0)
    if wmax == 0.0:
        return 0
    # threshold squared singular values: sqrt would amplify the eigensolver's
    # rounding noise in the zero eigenvalues above the cutoff
    return int(np.sum(w > tol * max(M.shape) * wmax))
