import numpy as np
import pytest

from etrs.conic import SolverOptions
from etrs.formulate import PRIMAL_SOCPSDP, extract_lifted, solve_relaxation
from etrs.recover import (
    DecompKit,
    PreconditionViolated,
    recover_optimal,
    sturm_zhang_decompose,
)

from conftest import example_problem

TIGHT = SolverOptions(tol=1e-12, accept_tol=1e-9, max_iter=200)


def random_psd(rng, n, rank=None):
    rank = rank or n
    B = rng.normal(size=(n, rank))
    return B @ B.T


def random_sym(rng, n):
    B = rng.normal(size=(n, n))
    return 0.5 * (B + B.T)


def test_decompose_identity_against_indefinite_form():
    # Y = I_2, G = diag(1, -1): G.Y = 0, so both terms must have zero form
    terms = sturm_zhang_decompose(np.eye(2), np.diag([1.0, -1.0]))
    assert len(terms) == 2
    assert np.allclose(terms.reconstruct(), np.eye(2), atol=1e-10)
    for y in terms:
        assert abs(y @ np.diag([1.0, -1.0]) @ y) <= 1e-9


def test_decompose_positive_trace_case():
    rng = np.random.default_rng(2)
    Y = random_psd(rng, 4)
    G = random_sym(rng, 4)
    if np.sum(G * Y) < 0:
        G = -G
    terms = sturm_zhang_decompose(Y, G)
    assert np.abs(terms.reconstruct() - Y).max() <= 1e-8 * (1.0 + np.abs(Y).max())
    for y in terms:
        assert y @ G @ y >= -1e-8


def test_decompose_requires_psd():
    with pytest.raises(PreconditionViolated):
        sturm_zhang_decompose(np.diag([1.0, -1.0]), np.eye(2))


def test_decompose_requires_nonnegative_pairing():
    with pytest.raises(PreconditionViolated):
        sturm_zhang_decompose(np.eye(2), -np.eye(2))


def test_decompose_many_random():
    rng = np.random.default_rng(33)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        Y = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
        G = random_sym(rng, n)
        if np.sum(G * Y) < 0:
            G = -G
        terms = sturm_zhang_decompose(Y, G)
        scale = 1.0 + np.abs(Y).max()
        assert np.abs(terms.reconstruct() - Y).max() <= 1e-7 * scale
        for y in terms:
            assert y @ G @ y >= -1e-7 * scale * (1.0 + np.abs(G).max())


def test_decomp_kit_quantities(ex1):
    _, sol, prog = solve_relaxation(ex1, PRIMAL_SOCPSDP, TIGHT)
    lifted = extract_lifted(sol, ex1, prog)
    kit = DecompKit.for_problem(lifted.Y, ex1)
    assert np.allclose(kit.g, np.concatenate(([ex1.beta], -ex1.b)))
    assert kit.J.shape == lifted.Y.shape
    assert kit.t_g == pytest.approx(float((lifted.Y @ kit.g)[0]))
    assert kit.j_dot_y == pytest.approx(lifted.Y[0, 0] - np.trace(lifted.Y[1:, 1:]))


def recover_example(k):
    p = example_problem(k)
    value, sol, prog = solve_relaxation(p, PRIMAL_SOCPSDP, TIGHT)
    lifted = extract_lifted(sol, p, prog)
    return p, value, lifted, recover_optimal(lifted, p)


def test_recover_example1_rank_one():
    p, value, lifted, pt = recover_example(1)
    # Y is (numerically) rank one here and x matches the published point
    assert np.linalg.eigvalsh(lifted.Y)[-2] <= 1e-5
    assert np.allclose(pt.x, [0.6266, -0.2169, 0.4140], atol=2e-3)
    assert pt.objective == pytest.approx(value, abs=1e-5)
    assert p.is_feasible(pt.x, tol=1e-6)


def test_recover_example3():
    p, value, lifted, pt = recover_example(3)
    assert abs(pt.objective - value) <= 1e-5
    assert p.is_feasible(pt.x, tol=1e-6)
    assert np.allclose(np.abs(pt.x), np.abs([-0.2885, -0.8567, -0.4276]), atol=2e-3)


def test_recover_example4_higher_rank():
    p, value, lifted, pt = recover_example(4)
    # the moment matrix is genuinely rank two; recovery still lands a
    # feasible point attaining the relaxation value
    assert np.linalg.eigvalsh(lifted.Y)[-2] > 1e-3
    assert abs(pt.objective - value) <= 1e-5
    assert p.is_feasible(pt.x, tol=1e-6)


def test_recover_example2():
    p, value, lifted, pt = recover_example(2)
    assert abs(pt.objective - value) <= 1e-5
    assert np.allclose(pt.x, [1.0, 0.0, 0.0], atol=1e-3)


def test_recover_random_instances():
    from conftest import random_indefinite_problem

    rng = np.random.default_rng(44)
    for _ in range(15):
        p = random_indefinite_problem(rng)
        value, sol, prog = solve_relaxation(p, PRIMAL_SOCPSDP, TIGHT)
        lifted = extract_lifted(sol, p, prog)
        pt = recover_optimal(lifted, p)
        assert p.is_feasible(pt.x, tol=1e-6 * (1.0 + abs(p.beta)))
        assert abs(pt.objective - value) <= 1e-4 * (1.0 + abs(value))
