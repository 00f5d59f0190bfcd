import numpy as np
import pytest

from etrs.model import EtrsProblem
from etrs.oracle import EmptyFeasibleSet, _project, sample_minimize

from conftest import example_problem

EXPECTED = {1: -4.1329, 2: -2.8572, 3: -9.7551, 4: -3.6121}


def test_projection_is_nearest_feasible_point():
    # brute-force check of the exact projection against dense feasible samples
    rng = np.random.default_rng(0)
    p = EtrsProblem(
        A=np.eye(3),
        a=np.zeros(3),
        b=rng.normal(size=3),
        beta=0.2,
        delta=1.0,
    )
    F = rng.uniform(-1.2, 1.2, size=(400_000, 3))
    F = F[np.linalg.norm(F, axis=1) <= 1.0]
    F = F[F @ p.b <= p.beta]
    pts = rng.uniform(-2.0, 2.0, size=(30, 3))
    proj = _project(pts, p)
    for x, px in zip(pts, proj):
        assert p.is_feasible(px, tol=1e-9)
        nearest = np.linalg.norm(F - x, axis=1).min()
        assert np.linalg.norm(px - x) <= nearest + 2e-2  # sample-grid slack


def test_projection_fixed_points():
    p = EtrsProblem(A=np.eye(2), a=np.zeros(2), b=np.array([1.0, 0.0]), beta=0.5)
    inside = np.array([[0.1, 0.2], [0.0, 0.0], [0.5, -0.5]])
    assert np.allclose(_project(inside, p), inside, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_examples_match_published(k):
    res = sample_minimize(example_problem(k), budget=50_000, seed=42)
    assert res.best_value == pytest.approx(EXPECTED[k], abs=1e-3)
    assert example_problem(k).is_feasible(res.best_x, tol=1e-8)


def test_monotone_in_budget():
    p = example_problem(3)
    v_small = sample_minimize(p, budget=2_000, seed=5).best_value
    v_large = sample_minimize(p, budget=20_000, seed=5).best_value
    assert v_large <= v_small + 1e-12


def test_deterministic_given_seed():
    p = example_problem(4)
    r1 = sample_minimize(p, budget=5_000, seed=9)
    r2 = sample_minimize(p, budget=5_000, seed=9)
    assert r1.best_value == r2.best_value
    assert np.array_equal(r1.best_x, r2.best_x)


def test_trivial_minimum_at_origin():
    p = EtrsProblem(A=np.eye(2), a=np.zeros(2), b=np.array([0.0, 1.0]), beta=1.0)
    res = sample_minimize(p, budget=2_000, seed=0)
    assert res.best_value == pytest.approx(0.0, abs=1e-10)


def test_empty_feasible_set():
    p = EtrsProblem(A=np.eye(2), a=np.zeros(2), b=np.array([1.0, 0.0]), beta=-3.0)
    with pytest.raises(EmptyFeasibleSet):
        sample_minimize(p, budget=1_000, seed=0)


def test_general_radius_oracle():
    # radius-2 ball, minimize ||x||^2 - 4 e1'x: unconstrained min at (2,0),
    # on the boundary, feasible for the half-space
    p = EtrsProblem(
        A=np.eye(2), a=np.array([-2.0, 0.0]), b=np.array([0.0, 1.0]), beta=1.0, delta=2.0
    )
    res = sample_minimize(p, budget=5_000, seed=1)
    assert res.best_value == pytest.approx(-4.0, abs=1e-6)
    assert np.allclose(res.best_x, [2.0, 0.0], atol=1e-3)
