"""Problem data types for the ball-plus-linear-inequality quadratic program.

The canonical form minimizes x'Ax + 2a'x over ||x|| <= delta and b'x <= beta.
All downstream machinery assumes the unit ball, so `normalize` rescales a
general radius to delta = 1 and hands back the inverse map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import sym_eigen

__all__ = [
    "EtrsProblem",
    "FeasiblePoint",
    "SlaterWitness",
    "NoSlater",
    "ScaleBack",
    "ValidationReport",
    "NonFiniteEntry",
    "DimensionMismatch",
    "NonPositiveRadius",
    "validate",
    "normalize",
    "find_slater",
    "problem_from_json",
    "problem_to_json",
]


class NonFiniteEntry(ValueError):
    """Some problem field contains NaN or Inf."""


class DimensionMismatch(ValueError):
    """Vector/matrix shapes disagree with the declared dimension."""


class NonPositiveRadius(ValueError):
    """Ball radius must be strictly positive."""


@dataclass(frozen=True)
class EtrsProblem:
    """Minimize x'Ax + 2a'x subject to ||x||^2 <= delta^2 and b'x <= beta.

    A is symmetrized on construction; the original asymmetry is available
    through validate(). b = 0 is allowed and degenerates to the plain
    trust-region subproblem.
    """

    A: np.ndarray
    a: np.ndarray
    b: np.ndarray
    beta: float
    delta: float = 1.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        if a.shape != (n,):
            raise DimensionMismatch(f"a has shape {a.shape}, expected ({n},)")
        if b.shape != (n,):
            raise DimensionMismatch(f"b has shape {b.shape}, expected ({n},)")
        beta = float(self.beta)
        delta = float(self.delta)
        for name, val in (("A", A), ("a", a), ("b", b)):
            if not np.all(np.isfinite(val)):
                raise NonFiniteEntry(f"{name} contains non-finite entries")
        if not (np.isfinite(beta) and np.isfinite(delta)):
            raise NonFiniteEntry("beta/delta must be finite")
        if delta <= 0.0:
            raise NonPositiveRadius(f"delta must be > 0, got {delta}")
        A_sym = 0.5 * (A + A.T)
        A_sym.flags.writeable = False
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "A", A_sym)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "_A_raw_defect", float(np.max(np.abs(A - A.T), initial=0.0)))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def tol_feas(self) -> float:
        return 1e-8 * (1.0 + self.delta**2 + abs(self.beta))

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.A @ x + 2.0 * self.a @ x)

    def ball_residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ x - self.delta**2)

    def linear_residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.b @ x - self.beta)

    def feasible_point(self, x) -> "FeasiblePoint":
        x = np.asarray(x, dtype=float)
        return FeasiblePoint(
            x=x,
            ball_residual=self.ball_residual(x),
            linear_residual=self.linear_residual(x),
            objective=self.objective(x),
        )

    def is_feasible(self, x, tol: float | None = None) -> bool:
        tol = self.tol_feas if tol is None else tol
        return self.ball_residual(x) <= tol and self.linear_residual(x) <= tol


@dataclass(frozen=True)
class FeasiblePoint:
    x: np.ndarray
    ball_residual: float
    linear_residual: float
    objective: float

    def is_feasible(self, tol: float) -> bool:
        return self.ball_residual <= tol and self.linear_residual <= tol


@dataclass(frozen=True)
class SlaterWitness:
    """A point strictly inside both constraints, with its (negative) margins."""

    x_hat: np.ndarray
    margins: tuple[float, float]


class NoSlater:
    """Sentinel: no strictly feasible point exists."""

    def __repr__(self):
        return "NoSlater"

    def __eq__(self, other):
        return isinstance(other, NoSlater)

    def __hash__(self):
        return hash("NoSlater")


@dataclass(frozen=True)
class ValidationReport:
    n: int
    symmetry_defect: float
    indefinite: bool
    b_is_zero: bool
    slater: SlaterWitness | NoSlater
    min_eig: float
    max_eig: float

    @property
    def slater_holds(self) -> bool:
        return isinstance(self.slater, SlaterWitness)


@dataclass(frozen=True)
class ScaleBack:
    """Maps solutions of the unit-ball problem back to the original radius."""

    delta: float

    def point(self, x_tilde) -> np.ndarray:
        return self.delta * np.asarray(x_tilde, dtype=float)

    def value(self, v: float) -> float:
        # the normalization preserves objective values
        return float(v)


def validate(problem: EtrsProblem) -> ValidationReport:
    """Sanity report: symmetry defect, indefiniteness of A, degeneracies."""
    eig = sym_eigen(problem.A)
    lo, hi = float(eig.eigenvalues[0]), float(eig.eigenvalues[-1])
    tol = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
    return ValidationReport(
        n=problem.n,
        symmetry_defect=getattr(problem, "_A_raw_defect", 0.0),
        indefinite=(lo < -tol and hi > tol),
        b_is_zero=bool(np.all(problem.b == 0.0)),
        slater=find_slater(problem),
        min_eig=lo,
        max_eig=hi,
    )


def normalize(problem: EtrsProblem) -> tuple[EtrsProblem, ScaleBack]:
    """Rescale to the unit ball via x = delta * x_tilde.

    The substitution sends A -> delta^2 A, a -> delta a, b -> delta b and
    leaves beta and all objective values unchanged.
    """
    d = problem.delta
    if d == 1.0:
        return problem, ScaleBack(1.0)
    scaled = EtrsProblem(
        A=d * d * problem.A,
        a=d * problem.a,
        b=d * problem.b,
        beta=problem.beta,
        delta=1.0,
    )
    return scaled, ScaleBack(d)


def find_slater(problem: EtrsProblem) -> SlaterWitness | NoSlater:
    """Find a strictly feasible point, or decide none exists.

    The infimum of b'x over the open ball is -delta*||b||, so a witness
    exists iff beta > -delta*||b|| (with b != 0), or beta > 0 when b = 0.
    Tries the origin and a few steps along -b first, then a closed-form
    point between the critical depth and the boundary.
    """
    d = problem.delta
    bnorm = float(np.linalg.norm(problem.b))
    beta = problem.beta

    def margins(x):
        return problem.ball_residual(x), problem.linear_residual(x)

    candidates = [np.zeros(problem.n)]
    if bnorm > 0.0:
        unit = problem.b / bnorm
        candidates += [-t * unit for t in (d / 2, d / 4, d / 8)]
        # depth at which the linear margin turns strictly negative
        t0 = max(0.0, -beta / bnorm)
        if t0 < d:
            candidates.append(-0.5 * (t0 + d) * unit)
    for x in candidates:
        m = margins(x)
        if m[0] < 0.0 and m[1] < 0.0:
            return SlaterWitness(x_hat=x, margins=m)
    return NoSlater()


def problem_from_json(text_or_obj) -> EtrsProblem:
    """Parse the problem JSON schema (n, A row-major, a, b, beta, delta)."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, (str, bytes)) else text_or_obj
    try:
        n = int(obj["n"])
        A = np.asarray(obj["A"], dtype=float)
        a = np.asarray(obj["a"], dtype=float)
        b = np.asarray(obj["b"], dtype=float)
        beta = float(obj["beta"])
        delta = float(obj.get("delta", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed problem JSON: {exc}") from exc
    if A.shape != (n, n):
        raise DimensionMismatch(f"A has shape {A.shape}, expected ({n}, {n})")
    return EtrsProblem(A=A, a=a, b=b, beta=beta, delta=delta)


def problem_to_json(problem: EtrsProblem) -> str:
    return json.dumps(
        {
            "n": problem.n,
            "A": problem.A.tolist(),
            "a": problem.a.tolist(),
            "b": problem.b.tolist(),
            "beta": problem.beta,
            "delta": problem.delta,
        }
    )
