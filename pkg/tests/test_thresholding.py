import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hopr import (
    InvalidInputError,
    UnsupportedSizeError,
    objective,
    threshold,
    threshold_columns,
    threshold_matrix,
    threshold_oracle,
)

nonneg = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)
betas = st.floats(1e-4, 1.0)


def vectors(min_size=1, max_size=12):
    return st.integers(min_size, max_size).flatmap(
        lambda n: arrays(np.float64, n, elements=nonneg))


def assert_kkt(b, beta, s, mu, tol=1e-12):
    """Optimality certificate of the split."""
    on = s > 0
    assert np.all(s >= 0) and mu >= 0
    np.testing.assert_allclose(s[on], b[on] - beta - mu, atol=tol)
    # off the support the gradient pushes s no further up
    assert np.all(b[~on] - mu <= beta + tol)
    r = (s + mu - b).sum()
    if mu > 0:
        assert abs(r) <= tol * max(1, b.size)
    else:
        assert r >= -tol * max(1, b.size)


def test_zero_input():
    res = threshold(np.zeros(5), 0.1)
    assert res.mu == 0.0 and not res.s.any() and res.d == 0


def test_constant_vector():
    res = threshold(np.full(4, 0.25), 0.05)
    assert res.d == 0 and res.mu == pytest.approx(0.25)
    assert not res.s.any()


def test_worked_example():
    # g(1) = 2*0.6 - 0.4 = 0.8 > 0.15, g(2) = 0.3 - 0.1 = 0.2 > 0.15 -> d = 2
    # mu = (0.1 + 2*0.05) / 1 = 0.2 ; s = [0.6-0.25, 0.3-0.25, 0]
    res = threshold([0.6, 0.3, 0.1], 0.05)
    assert res.d == 2
    assert res.mu == pytest.approx(0.2, abs=1e-15)
    np.testing.assert_allclose(res.s, [0.35, 0.05, 0.0], atol=1e-15)
    ora = threshold_oracle([0.6, 0.3, 0.1], 0.05)
    np.testing.assert_allclose(ora.s, res.s, atol=1e-10)
    assert ora.mu == pytest.approx(res.mu, abs=1e-10)


def test_oracle_zero_input():
    res = threshold_oracle(np.zeros(3), 0.2)
    assert res.mu == 0.0 and not res.s.any()


def test_oracle_size_cap():
    with pytest.raises(UnsupportedSizeError):
        threshold_oracle(np.ones(13), 0.1)


@pytest.mark.parametrize("beta", [0.0, -1.0, np.nan])
def test_bad_beta(beta):
    with pytest.raises(InvalidInputError):
        threshold([0.1, 0.2], beta)


@pytest.mark.parametrize("b", [[-0.1, 0.2], [np.nan, 0.1], [np.inf, 0.0]])
def test_bad_vector(b):
    with pytest.raises(InvalidInputError):
        threshold(b, 0.1)


def test_equal_entries_split_equally():
    res = threshold([0.5, 0.5, 0.0, 0.0], 0.01)
    assert res.s[0] == res.s[1]


def test_oracle_sweep(rng):
    for _ in range(200):
        b = rng.random(6)
        beta = rng.choice([0.01, 0.1, 0.5])
        res, ora = threshold(b, beta), threshold_oracle(b, beta)
        assert objective(b, beta, res.s, res.mu) <= objective(b, beta, ora.s, ora.mu) + 1e-10
        np.testing.assert_allclose(res.s, ora.s, atol=1e-8)
        assert abs(res.mu - ora.mu) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(b=vectors(), beta=betas)
def test_kkt_certificate(b, beta):
    res = threshold(b, beta)
    assert_kkt(b, beta, res.s, res.mu)


@settings(max_examples=200, deadline=None)
@given(b=vectors(), beta=betas)
def test_invariants(b, beta):
    res = threshold(b, beta)
    n = b.size
    assert 0 <= res.d < n
    assert res.d == np.count_nonzero(res.s)
    assert set(res.support) <= set(np.flatnonzero(b > beta + res.mu - 1e-15))
    # total mass is preserved
    assert res.reconstruct().sum() == pytest.approx(b.sum(), abs=1e-12)
    if b.any():
        assert res.mu > 0


@settings(max_examples=100, deadline=None)
@given(b=vectors(max_size=8), beta=betas)
def test_matches_oracle(b, beta):
    res, ora = threshold(b, beta), threshold_oracle(b, beta)
    assert objective(b, beta, res.s, res.mu) <= objective(b, beta, ora.s, ora.mu) + 1e-10
    np.testing.assert_allclose(res.s, ora.s, atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 30), beta=betas, seed=st.integers(0, 2**32 - 1))
def test_non_expansive(n, beta, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random(n), rng.random(n)
    ta, tb = threshold(a, beta).reconstruct(), threshold(b, beta).reconstruct()
    assert np.abs(ta - tb).sum() <= np.abs(a - b).sum() * (1 + 1e-12) + 1e-15


def test_threshold_matrix_zero():
    S, u = threshold_matrix(np.zeros((3, 3)), 0.1)
    assert S.nnz == 0 and not u.any()


def test_threshold_matrix_identical_columns(rng):
    col = rng.random(5)
    S, u = threshold_matrix(np.tile(col[:, None], (1, 4)), 0.05)
    assert np.all(u == u[0])
    dense = S.toarray()
    assert np.all(dense == dense[:, :1])


def test_threshold_matrix_matches_oracle(rng):
    A = rng.random((6, 6))
    S, u = threshold_matrix(A, 0.1)
    for j in range(6):
        ora = threshold_oracle(A[:, j], 0.1)
        np.testing.assert_allclose(S.toarray()[:, j], ora.s, atol=1e-10)
        assert abs(u[j] - ora.mu) <= 1e-10


def test_threshold_columns_shape_and_d(rng):
    A = rng.random((7, 3))
    S, mu, d = threshold_columns(A, 0.02)
    assert S.shape == (7, 3) and mu.shape == (3,) and d.shape == (3,)
    np.testing.assert_array_equal(d, np.count_nonzero(S, axis=0))
