import numpy as np
import pytest

from etrs.model import EtrsProblem

# The four published worked examples (all on the unit ball).  Values quoted
# in tests as "published" come from the same source as the data; where a
# published number is inconsistent with its own data the test says so.
EXAMPLE_DATA = {
    1: dict(
        A=np.diag([-4.0, 12.0, 11.0]),
        a=np.array([-4.0, 0.0, 0.0]),
        b=np.array([20.0, 8.0, -14.0]),
        beta=5.0,
    ),
    2: dict(
        A=np.diag([-4.0, 5.0, 3.0]),
        a=np.array([0.5714, 0.0, 0.0]),
        b=np.array([-17.0, 14.0, -2.0]),
        beta=4.4,
    ),
    3: dict(
        A=np.diag([-4.0, -8.0, 2.0]),
        a=np.array([0.0, 2.2857, 0.0]),
        b=np.array([4.0, -15.0, 18.0]),
        beta=4.0,
    ),
    4: dict(
        A=np.diag([-4.0, 1.0, -3.0]),
        a=np.array([0.5714, 0.0, 0.0]),
        b=np.array([-6.0, -3.0, 0.0]),
        beta=2.2,
    ),
}


def example_problem(k: int) -> EtrsProblem:
    return EtrsProblem(**EXAMPLE_DATA[k])


@pytest.fixture
def ex1():
    return example_problem(1)


@pytest.fixture
def ex2():
    return example_problem(2)


@pytest.fixture
def ex3():
    return example_problem(3)


@pytest.fixture
def ex4():
    return example_problem(4)


def random_indefinite_problem(rng, n_range=(2, 9), scale=10.0):
    """Slater-feasible instance with indefinite A, entries U[-scale, scale]."""
    from etrs.model import NoSlater, find_slater

    while True:
        n = int(rng.integers(*n_range))
        B = rng.uniform(-scale, scale, size=(n, n))
        A = 0.5 * (B + B.T)
        w = np.linalg.eigvalsh(A)
        if w[0] >= -1e-6 or w[-1] <= 1e-6:
            continue
        a = rng.uniform(-scale, scale, size=n)
        b = rng.uniform(-scale, scale, size=n)
        beta = float(rng.uniform(-0.5 * np.linalg.norm(b), np.linalg.norm(b)))
        problem = EtrsProblem(A=A, a=a, b=b, beta=beta)
        if isinstance(find_slater(problem), NoSlater):
            continue
        return problem
