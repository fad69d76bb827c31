import numpy as np
import pytest

from hopr import HoprProblem, SliceSet, gen_synthetic, power_method


def random_tensor(n, rng, density=0.5, substochastic=True):
    """Dense ``T[i, j, k] = Q_j(i, k)`` with random zero columns and deficits."""
    T = rng.random((n, n, n)) * (rng.random((n, n, n)) < density)
    mass = T.sum(axis=0, keepdims=True)
    T = np.divide(T, mass, out=np.zeros_like(T), where=mass > 0)
    if substochastic:
        T *= rng.uniform(0.3, 1.0, size=(1, n, n))
    return T


def random_slices(n, rng, density=0.5, substochastic=True):
    return SliceSet.from_dense_tensor(random_tensor(n, rng, density, substochastic))


def dense_operator(problem, X):
    """The exact operator assembled from explicit dangling-corrected slices."""
    P = problem.slices.dense_stochastic_slices()
    alpha = problem.alpha
    return alpha * np.einsum("jik,jk->ij", P, X) + (1 - alpha) * np.outer(problem.v, X.sum(axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def synthetic_1000():
    """The desk-scale instance n=1000, sparsity 1e-6, with its exact solution."""
    slices = gen_synthetic(1000, 1e-6, seed=0)
    problem = HoprProblem(slices, alpha=0.85)
    X, report = power_method(problem, tol=1e-12, max_iter=500)
    return problem, X, report


@pytest.fixture(scope="session")
def synthetic_500():
    slices = gen_synthetic(500, 1e-5, seed=1)
    problem = HoprProblem(slices, alpha=0.85)
    X, _ = power_method(problem, tol=1e-12, max_iter=500)
    return problem, X


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
