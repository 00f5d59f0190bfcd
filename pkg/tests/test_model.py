import json

import numpy as np
import pytest

from etrs.model import (
    DimensionMismatch,
    EtrsProblem,
    NonFiniteEntry,
    NonPositiveRadius,
    NoSlater,
    SlaterWitness,
    find_slater,
    normalize,
    problem_from_json,
    problem_to_json,
    validate,
)


def make(A=None, a=None, b=None, beta=0.5, delta=1.0):
    if A is None:
        A = np.diag([1.0, -1.0])
    if a is None:
        a = np.zeros(2)
    if b is None:
        b = np.array([1.0, 0.0])
    return EtrsProblem(A=A, a=a, b=b, beta=beta, delta=delta)


def test_symmetrization():
    p = EtrsProblem(
        A=np.array([[1.0, 2.0], [0.0, 1.0]]),
        a=np.zeros(2),
        b=np.zeros(2),
        beta=1.0,
    )
    assert np.allclose(p.A, [[1.0, 1.0], [1.0, 1.0]])
    assert validate(p).symmetry_defect == pytest.approx(2.0)


def test_shape_and_finite_validation():
    with pytest.raises(DimensionMismatch):
        EtrsProblem(A=np.eye(2), a=np.zeros(3), b=np.zeros(2), beta=0.0)
    with pytest.raises(NonFiniteEntry):
        EtrsProblem(A=np.eye(2) * np.nan, a=np.zeros(2), b=np.zeros(2), beta=0.0)
    with pytest.raises(NonPositiveRadius):
        EtrsProblem(A=np.eye(2), a=np.zeros(2), b=np.zeros(2), beta=0.0, delta=0.0)


def test_objective_and_residuals():
    p = make()
    x = np.array([0.5, 0.5])
    assert p.objective(x) == pytest.approx(0.0)
    assert p.ball_residual(x) == pytest.approx(-0.5)
    assert p.linear_residual(x) == pytest.approx(0.0)
    assert p.is_feasible(x)


def test_normalize_preserves_objective():
    rng = np.random.default_rng(5)
    B = rng.normal(size=(3, 3))
    p = EtrsProblem(
        A=0.5 * (B + B.T),
        a=rng.normal(size=3),
        b=rng.normal(size=3),
        beta=0.7,
        delta=2.5,
    )
    scaled, back = normalize(p)
    assert scaled.delta == 1.0
    for _ in range(10):
        xt = rng.normal(size=3)
        xt /= max(1.0, np.linalg.norm(xt))  # unit-ball point
        x = back.point(xt)
        assert scaled.objective(xt) == pytest.approx(p.objective(x), rel=1e-12, abs=1e-12)
        # constraints map over too
        assert (scaled.ball_residual(xt) <= 1e-12) == (p.ball_residual(x) <= 1e-12)


def test_find_slater_origin():
    w = find_slater(make(beta=0.5))
    assert isinstance(w, SlaterWitness)
    assert w.margins[0] < 0 and w.margins[1] < 0


def test_find_slater_needs_depth():
    # origin violates the half-space; a point along -b works
    p = make(b=np.array([1.0, 0.0]), beta=-0.5)
    w = find_slater(p)
    assert isinstance(w, SlaterWitness)
    assert p.ball_residual(w.x_hat) < 0 and p.linear_residual(w.x_hat) < 0


def test_find_slater_empty():
    # the infimum of b'x over the ball is -1, so beta < -1 has no point at
    # all and beta = -1 has only the single boundary point
    assert isinstance(find_slater(make(beta=-2.0)), NoSlater)
    assert isinstance(find_slater(make(beta=-1.0)), NoSlater)


def test_validate_flags():
    r = validate(make())
    assert r.indefinite and not r.b_is_zero and r.slater_holds
    r0 = validate(make(A=np.eye(2), b=np.zeros(2), beta=1.0))
    assert not r0.indefinite and r0.b_is_zero


def test_json_round_trip():
    p = make(beta=0.25, delta=1.5)
    q = problem_from_json(problem_to_json(p))
    assert np.allclose(q.A, p.A) and np.allclose(q.a, p.a) and np.allclose(q.b, p.b)
    assert q.beta == p.beta and q.delta == p.delta


def test_json_defaults_and_errors():
    obj = {"n": 2, "A": [[1, 0], [0, 1]], "a": [0, 0], "b": [0, 0], "beta": 1.0}
    assert problem_from_json(json.dumps(obj)).delta == 1.0
    obj["A"] = [[1, 0]]
    with pytest.raises(DimensionMismatch):
        problem_from_json(json.dumps(obj))
