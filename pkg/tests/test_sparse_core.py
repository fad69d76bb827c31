import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hopr import (
    DimensionError,
    InvalidInputError,
    SliceSet,
    SparseColMatrix,
    column_l1_sums,
    dangling_deficit,
    spmv,
)
from conftest import random_slices, random_tensor


def random_sparse(n, rng, density=0.4):
    A = rng.random((n, n)) * (rng.random((n, n)) < density)
    return A


# --- SparseColMatrix -------------------------------------------------------


def test_construction_normalises_storage():
    coo = sp.coo_array(([0.2, 0.3, 0.0, 0.1], ([1, 1, 0, 0], [0, 0, 1, 0])), shape=(2, 2))
    Q = SparseColMatrix(coo)
    assert Q.nnz == 2  # duplicates merged, explicit zero dropped
    np.testing.assert_allclose(Q.toarray(), [[0.1, 0.0], [0.5, 0.0]])
    for j in range(2):
        col = Q.csc.indices[Q.csc.indptr[j]:Q.csc.indptr[j + 1]]
        assert np.all(np.diff(col) > 0)


@pytest.mark.parametrize("bad", [-0.1, np.nan, np.inf])
def test_rejects_bad_values(bad):
    with pytest.raises(InvalidInputError):
        SparseColMatrix(np.array([[bad, 0.0], [0.0, 1.0]]))


def test_storage_is_read_only():
    Q = SparseColMatrix(np.eye(3))
    with pytest.raises(ValueError):
        Q.csc.data[0] = 5.0


def test_from_triplets_range_check():
    with pytest.raises(InvalidInputError):
        SparseColMatrix.from_triplets([3], [0], [1.0], (3, 3))


# --- kernels ---------------------------------------------------------------


def test_spmv_identity():
    np.testing.assert_array_equal(spmv(SparseColMatrix(np.eye(2)), [0.3, 0.7]), [0.3, 0.7])


def test_spmv_single_entry():
    Q = SparseColMatrix.from_triplets([0], [1], [0.5], (2, 2))
    np.testing.assert_array_equal(spmv(Q, [1.0, 1.0]), [0.5, 0.0])


def test_spmv_matches_dense(rng):
    A = random_sparse(6, rng)
    x = rng.random(6)
    np.testing.assert_allclose(spmv(SparseColMatrix(A), x), A @ x, rtol=0, atol=1e-14)


def test_spmv_errors():
    Q = SparseColMatrix(np.eye(3))
    with pytest.raises(DimensionError):
        spmv(Q, np.ones(2))
    with pytest.raises(InvalidInputError):
        spmv(Q, [1.0, -1.0, 0.0])


def test_column_sums_basic():
    np.testing.assert_array_equal(column_l1_sums(SparseColMatrix(np.eye(3))), [1, 1, 1])
    np.testing.assert_array_equal(column_l1_sums(SparseColMatrix.empty(4, 4)), np.zeros(4))


def test_column_sums_trailing_empty_columns():
    Q = SparseColMatrix.from_triplets([0, 2], [0, 1], [0.3, 0.4], (3, 5))
    np.testing.assert_allclose(column_l1_sums(Q), [0.3, 0.4, 0, 0, 0])


def test_column_sums_match_dense(rng):
    A = random_sparse(8, rng)
    np.testing.assert_allclose(column_l1_sums(SparseColMatrix(A)), A.sum(axis=0), rtol=0, atol=1e-14)


def test_deficit_cases():
    np.testing.assert_array_equal(dangling_deficit(SparseColMatrix(np.eye(3))), np.zeros(3))
    Q = SparseColMatrix(np.array([[0.4, 0.0], [0.0, 0.0]]))
    np.testing.assert_allclose(dangling_deficit(Q), [0.6, 1.0])
    with pytest.raises(InvalidInputError):
        dangling_deficit(SparseColMatrix(np.array([[0.8, 0], [0.8, 0]])))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 9), seed=st.integers(0, 2**32 - 1))
def test_dangling_elimination_identity(n, seed):
    # d^T y = ||y|| - ||Q y|| for nonnegative y
    rng = np.random.default_rng(seed)
    A = random_sparse(n, rng)
    mass = A.sum(axis=0)
    A = A / np.where(mass > 0, mass, 1.0) * rng.uniform(0, 1, n)
    Q = SparseColMatrix(A)
    y = rng.random(n)
    lhs = dangling_deficit(Q) @ y
    rhs = y.sum() - spmv(Q, y).sum()
    assert abs(lhs - rhs) <= 1e-14


# --- SliceSet --------------------------------------------------------------


def test_slice_set_roundtrip_dense(rng):
    T = random_tensor(5, rng)
    s = SliceSet.from_dense_tensor(T)
    np.testing.assert_array_equal(s.to_dense_tensor(), T)
    for j in range(5):
        np.testing.assert_array_equal(s[j].toarray(), T[:, j, :])
        np.testing.assert_allclose(s.column_mass(j), T[:, j, :].sum(axis=0), atol=1e-15)
    assert np.all(np.diff(s.slice_index) >= 0)


def test_slice_set_rejects_overfull_column():
    with pytest.raises(InvalidInputError):
        SliceSet(2, [0, 1], [0, 0], [0, 0], [0.7, 0.7])


def test_slice_set_clamps_rounding_excess():
    s = SliceSet(2, [0, 1], [0, 0], [0, 0], [0.5, 0.5 + 5e-13])
    assert s.column_mass(0)[0] == 1.0
    assert s.deficit(0)[0] == 0.0


def test_slice_set_merges_duplicates():
    s = SliceSet(2, [0, 0], [1, 1], [0, 0], [0.25, 0.25])
    assert s.nnz == 1 and s.vals[0] == 0.5


def test_slice_set_from_slices_matches(rng):
    T = random_tensor(4, rng)
    a = SliceSet.from_dense_tensor(T)
    b = SliceSet.from_slices([T[:, j, :] for j in range(4)])
    assert a.equals(b)


def test_empty_slice_set_is_all_dangling():
    s = SliceSet.empty(3)
    np.testing.assert_array_equal(s.deficit_matrix(), np.ones((3, 3)))
    P = s.dense_stochastic_slices()
    np.testing.assert_allclose(P, np.full((3, 3, 3), 1 / 3))


def test_dense_stochastic_slices_are_stochastic(rng):
    s = random_slices(6, rng, density=0.3)
    P = s.dense_stochastic_slices()
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-14)
    assert P.min() >= 0
