"""Classical trust-region subproblem machinery on the unit ball.

Everything is driven by the spectral decomposition of A: with A = Q diag(w) Q'
and c = Q'a, the boundary stationarity condition (A + lam*I)x = -a, ||x|| = 1
becomes the secular equation psi(lam) = sum c_i^2/(w_i+lam)^2 = 1. The global
minimizer, the complete set of boundary KKT points and the local-nonglobal
minimizer (when it exists) all fall out of the roots of psi and the hard-case
eigenvector completions at the poles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SymEigen, sym_eigen

__all__ = [
    "KktPoint",
    "GLOBAL_TRS",
    "LNGM",
    "BOUNDARY_SADDLE",
    "INTERIOR_STATIONARY",
    "NoConvergence",
    "solve_trs_global",
    "enumerate_boundary_kkt",
    "solve_equality_trs",
]

GLOBAL_TRS = "GlobalTrs"
LNGM = "Lngm"
BOUNDARY_SADDLE = "BoundarySaddle"
INTERIOR_STATIONARY = "InteriorStationary"

_MAX_ROOT_ITER = 200


class NoConvergence(Exception):
    """Safeguarded root find on the secular equation failed."""


@dataclass(frozen=True)
class KktPoint:
    """A stationary point of the ball-constrained quadratic with multiplier."""

    x: np.ndarray
    lam: float
    kind: str
    objective: float


def _objective(A, a, x) -> float:
    return float(x @ A @ x + 2.0 * np.asarray(a) @ x)


def _group_eigenvalues(w: np.ndarray, tol: float):
    """Indices of (numerically) equal eigenvalues, ascending."""
    groups = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[start] > tol:
            groups.append(list(range(start, i)))
            start = i
    return groups


def _psi_terms(w, c2, lam):
    d = w + lam
    return c2 / d**2


def _psi(w, c2, lam) -> float:
    return float(np.sum(_psi_terms(w, c2, lam)))


def _psi_prime(w, c2, lam) -> float:
    d = w + lam
    return float(np.sum(-2.0 * c2 / d**3))


def _bisect_newton(w, c2, target, lo, hi, increasing: bool) -> float:
    """Root of psi(lam) = target on (lo, hi), psi monotone on the bracket."""
    f_lo = _psi(w, c2, lo) - target
    f_hi = _psi(w, c2, hi) - target
    if f_lo * f_hi > 0.0:
        raise NoConvergence("secular root bracket is invalid")
    lam = 0.5 * (lo + hi)
    for _ in range(_MAX_ROOT_ITER):
        f = _psi(w, c2, lam) - target
        if abs(f) <= 1e-14 * (1.0 + target):
            return lam
        if (f > 0.0) == increasing:
            hi = lam
        else:
            lo = lam
        fp = _psi_prime(w, c2, lam)
        step = lam - f / fp if fp != 0.0 else lam
        lam = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * (1.0 + abs(lam)):
            return lam
    return lam


def _point_at(eig: SymEigen, c, lam) -> np.ndarray:
    """x(lam) = -(A + lam I)^{-1} a in eigencoordinates."""
    return eig.eigenvectors @ (-c / (eig.eigenvalues + lam))


def solve_trs_global(A, a) -> KktPoint:
    """Global minimizer of x'Ax + 2a'x over the unit ball.

    Returns the KKT point with lam >= max(0, -lambda_min(A)); the hard case
    (a orthogonal to the bottom eigenspace with interior shifted solution)
    is closed by adding a bottom-eigenvector component that reaches the
    boundary.
    """
    A = np.asarray(A, dtype=float)
    a = np.asarray(a, dtype=float)
    eig = sym_eigen(A)
    w = eig.eigenvalues
    c = eig.eigenvectors.T @ a
    scale = 1.0 + np.abs(w).max(initial=0.0)
    c2 = c**2

    # interior candidate: A positive definite and the Newton point inside
    if w[0] > 1e-12 * scale:
        x0 = _point_at(eig, c, 0.0)
        if x0 @ x0 <= 1.0:
            return KktPoint(x=x0, lam=0.0, kind=GLOBAL_TRS, objective=_objective(A, a, x0))

    lam_lo = max(0.0, -w[0])
    bottom = np.abs(w - w[0]) <= 1e-10 * scale
    mass_bottom = float(np.sum(c2[bottom]))

    # hard case: shifted solution already inside the ball at lam = -w[0]
    if lam_lo == -w[0] and mass_bottom <= (1e-11 * scale * (1.0 + np.linalg.norm(a))) ** 2:
        keep = ~bottom
        y = np.zeros_like(c)
        y[keep] = -c[keep] / (w[keep] + lam_lo)
        if y @ y <= 1.0:
            t = np.sqrt(max(0.0, 1.0 - y @ y))
            y[np.argmax(bottom)] = t
            x = eig.eigenvectors @ y
            return KktPoint(x=x, lam=lam_lo, kind=GLOBAL_TRS, objective=_objective(A, a, x))

    # easy case: psi decreasing on (lam_lo, inf) from above 1 to 0
    eps = 1e-13 * scale
    lo = lam_lo + eps
    while _psi(w, c2, lo) <= 1.0:
        # start just right of the pole; widen if the pole mass is tiny
        eps *= 0.5
        lo = lam_lo + eps
        if eps < 1e-300:
            break
    hi = lam_lo + np.sqrt(np.sum(c2)) + 1.0
    while _psi(w, c2, hi) >= 1.0:
        hi = lam_lo + 2.0 * (hi - lam_lo)
    lam = _bisect_newton(w, c2, 1.0, lo, hi, increasing=False)
    x = _point_at(eig, c, lam)
    return KktPoint(x=x, lam=float(lam), kind=GLOBAL_TRS, objective=_objective(A, a, x))


def _tangent_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to unit vector x."""
    n = len(x)
    # Householder reflector mapping e1 to x; remaining columns span x-perp
    v = x.copy()
    v[0] += np.sign(x[0]) if x[0] != 0.0 else 1.0
    v /= np.linalg.norm(v)
    H = np.eye(n) - 2.0 * np.outer(v, v)
    return H[:, 1:]


def _classify(A, a, x, lam, w, scale) -> str:
    """Label a boundary KKT point via the tangent-space Hessian and lam."""
    tol_cls = 1e-7 * (1.0 + np.linalg.norm(A, "fro"))
    Z = _tangent_basis(x)
    if Z.shape[1] == 0:
        tangent_psd = True
    else:
        H = Z.T @ (A + lam * np.eye(len(x))) @ Z
        tangent_psd = float(sym_eigen(H).eigenvalues[0]) >= -tol_cls
    if not tangent_psd or lam < -1e-9 * scale:
        return BOUNDARY_SADDLE
    if lam >= -w[0] - 1e-9 * scale:
        return GLOBAL_TRS
    lam2 = w[1] if len(w) > 1 else w[0]
    if -lam2 < lam < -w[0]:
        return LNGM
    return BOUNDARY_SADDLE


def enumerate_boundary_kkt(A, a) -> list[KktPoint]:
    """All KKT points of the quadratic on the unit sphere, classified.

    Scans the secular function between consecutive poles and on the outer
    intervals, and adds hard-case eigenvector completions at poles whose
    eigenspace carries no component of a.
    """
    A = np.asarray(A, dtype=float)
    a = np.asarray(a, dtype=float)
    eig = sym_eigen(A)
    w = eig.eigenvalues
    c = eig.eigenvectors.T @ a
    c2 = c**2
    n = len(w)
    scale = 1.0 + np.abs(w).max(initial=0.0)
    mass_tol = (1e-11 * scale * (1.0 + np.linalg.norm(a))) ** 2

    groups = _group_eigenvalues(w, 1e-10 * scale)
    poles = []  # (lam_pole, group) with nonzero mass
    hard = []  # (lam_pole, group) with zero mass
    for g in groups:
        lam_p = -float(np.mean(w[g]))
        if float(np.sum(c2[g])) > mass_tol:
            poles.append((lam_p, g))
        else:
            hard.append((lam_p, g))
    poles.sort(key=lambda t: t[0])

    roots: list[float] = []
    if poles:
        pole_lams = [p for p, _ in poles]
        span = np.sqrt(np.sum(c2)) + 1.0

        def off(lam_pole, side):
            e = 1e-13 * scale
            lam = lam_pole + side * e
            while _psi(w, c2, lam) <= 1.0 and e > 1e-300:
                e *= 0.5
                lam = lam_pole + side * e
            return lam

        # outer intervals: one root each
        hi = pole_lams[-1] + span
        while _psi(w, c2, hi) >= 1.0:
            hi = pole_lams[-1] + 2.0 * (hi - pole_lams[-1])
        roots.append(_bisect_newton(w, c2, 1.0, off(pole_lams[-1], +1), hi, increasing=False))
        lo = pole_lams[0] - span
        while _psi(w, c2, lo) >= 1.0:
            lo = pole_lams[0] - 2.0 * (pole_lams[0] - lo)
        roots.append(_bisect_newton(w, c2, 1.0, lo, off(pole_lams[0], -1), increasing=True))

        # interior intervals: psi is convex, up to two roots around its minimum
        for (pl, _), (pr, _) in zip(poles[:-1], poles[1:]):
            lo, hi = off(pl, +1), off(pr, -1)
            if lo >= hi:
                continue
            # minimize psi on (lo, hi) by golden-section
            gl, gh = lo, hi
            invphi = (np.sqrt(5.0) - 1.0) / 2.0
            m1 = gh - invphi * (gh - gl)
            m2 = gl + invphi * (gh - gl)
            f1, f2 = _psi(w, c2, m1), _psi(w, c2, m2)
            for _ in range(200):
                if f1 < f2:
                    gh, m2, f2 = m2, m1, f1
                    m1 = gh - invphi * (gh - gl)
                    f1 = _psi(w, c2, m1)
                else:
                    gl, m1, f1 = m1, m2, f2
                    m2 = gl + invphi * (gh - gl)
                    f2 = _psi(w, c2, m2)
                if gh - gl <= 1e-13 * (1.0 + abs(gl) + abs(gh)):
                    break
            lam_min = 0.5 * (gl + gh)
            psi_min = _psi(w, c2, lam_min)
            if psi_min < 1.0 - 1e-12:
                roots.append(_bisect_newton(w, c2, 1.0, lo, lam_min, increasing=False))
                roots.append(_bisect_newton(w, c2, 1.0, lam_min, hi, increasing=True))
            elif psi_min <= 1.0 + 1e-12:
                roots.append(lam_min)

    points: list[KktPoint] = []
    for lam in roots:
        x = _point_at(eig, c, lam)
        nx = np.linalg.norm(x)
        if nx > 0:
            x = x / nx  # clean up to exact unit norm
        points.append(
            KktPoint(
                x=x,
                lam=float(lam),
                kind=_classify(A, a, x, lam, w, scale),
                objective=_objective(A, a, x),
            )
        )

    # hard-case completions: boundary points in the pole's eigenspace
    for lam_p, g in hard:
        keep = np.ones(n, dtype=bool)
        keep[g] = False
        y = np.zeros(n)
        d = w[keep] + lam_p
        if np.any(np.abs(d) <= 1e-13 * scale):
            continue
        y[keep] = -c[keep] / d
        rem = 1.0 - float(y @ y)
        if rem < -1e-12:
            continue
        t = np.sqrt(max(0.0, rem))
        for i in g:
            for sign in (+1.0, -1.0):
                yy = y.copy()
                yy[i] = sign * t
                x = eig.eigenvectors @ yy
                nx = np.linalg.norm(x)
                if nx > 0:
                    x = x / nx
                points.append(
                    KktPoint(
                        x=x,
                        lam=float(lam_p),
                        kind=_classify(A, a, x, lam_p, w, scale),
                        objective=_objective(A, a, x),
                    )
                )
                if t == 0.0:
                    break  # +/- coincide

    # de-duplicate (tangency roots and symmetric completions can repeat)
    unique: list[KktPoint] = []
    for p in points:
        if not any(
            np.linalg.norm(p.x - q.x) <= 1e-8 and abs(p.lam - q.lam) <= 1e-8 * scale
            for q in unique
        ):
            unique.append(p)
    return unique


def solve_equality_trs(A, a, radius_sq: float) -> KktPoint:
    """Global minimizer of x'Ax + 2a'x over the sphere ||x||^2 = radius_sq."""
    A = np.asarray(A, dtype=float)
    a = np.asarray(a, dtype=float)
    if radius_sq < 0.0:
        raise ValueError("radius_sq must be nonnegative")
    n = A.shape[0]
    if radius_sq == 0.0:
        x = np.zeros(n)
        return KktPoint(x=x, lam=0.0, kind=GLOBAL_TRS, objective=0.0)
    eig = sym_eigen(A)
    w = eig.eigenvalues
    c = eig.eigenvectors.T @ a
    c2 = c**2
    scale = 1.0 + np.abs(w).max(initial=0.0)
    lam_lo = -w[0]
    bottom = np.abs(w - w[0]) <= 1e-10 * scale
    mass_bottom = float(np.sum(c2[bottom]))

    if mass_bottom <= (1e-11 * scale * (1.0 + np.linalg.norm(a))) ** 2:
        keep = ~bottom
        y = np.zeros_like(c)
        y[keep] = -c[keep] / (w[keep] + lam_lo)
        if y @ y <= radius_sq:
            t = np.sqrt(max(0.0, radius_sq - y @ y))
            i0 = int(np.argmax(bottom))
            y[i0] = t
            x = eig.eigenvectors @ y
            # deterministic sign for the pure-eigenvector tie
            j = int(np.argmax(np.abs(x) > 1e-12)) if np.any(np.abs(x) > 1e-12) else 0
            if x[j] < 0.0 and abs(np.linalg.norm(y) - t) <= 1e-12:
                x = -x
            return KktPoint(x=x, lam=float(lam_lo), kind=GLOBAL_TRS, objective=_objective(A, a, x))

    eps = 1e-13 * scale
    lo = lam_lo + eps
    while _psi(w, c2, lo) <= radius_sq and eps > 1e-300:
        eps *= 0.5
        lo = lam_lo + eps
    hi = lam_lo + np.sqrt(np.sum(c2) / radius_sq) + 1.0
    while _psi(w, c2, hi) >= radius_sq:
        hi = lam_lo + 2.0 * (hi - lam_lo)
    lam = _bisect_newton(w, c2, radius_sq, lo, hi, increasing=False)
    x = _point_at(eig, c, lam)
    nx = np.linalg.norm(x)
    if nx > 0:
        x = x * (np.sqrt(radius_sq) / nx)
    return KktPoint(x=x, lam=float(lam), kind=GLOBAL_TRS, objective=_objective(A, a, x))
