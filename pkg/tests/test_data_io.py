import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopr import (
    FormatError,
    HoprProblem,
    IterationReport,
    InvalidInputError,
    SparseColMatrix,
    SparseUniformApprox,
    build_slice_set,
    gen_synthetic,
    load_result,
    load_slice_set,
    load_triples,
    pagerank_values,
    power_method,
    save_result,
    save_slice_set,
    save_triples,
    spm,
    top_k,
)
from conftest import random_slices


def write(path, text):
    path.write_text(text)
    return path


def dense_slices_oracle(n, m, triples):
    """``T[i, j, k] = Q_j(i, k)`` by direct evaluation of the U_j W_j product."""
    A = np.zeros((n, n, m))
    for a, b, s in triples:
        A[a - 1, b - 1, s - 1] = 1.0
    T = np.zeros((n, n, n))
    for j in range(n):
        U = A[j, :, :].copy()                    # U(i, s) = A(j, i, s)
        den = U.sum(axis=0)
        U = np.divide(U, den, out=np.zeros_like(U), where=den > 0)
        W = A[:, j, :].T.copy()                  # W(s, k) = A(k, j, s)
        den = W.sum(axis=0)
        W = np.divide(W, den, out=np.zeros_like(W), where=den > 0)
        T[:, j, :] = U @ W
    return T


# --- triples ---------------------------------------------------------------


def test_load_triples_minimal(tmp_path):
    p = write(tmp_path / "t.txt", "%%HOPR-TRIPLES 1\n2 1 1\n1 2 1\n")
    assert load_triples(p) == (2, 1, {(1, 2, 1)})


def test_load_triples_empty_and_duplicates(tmp_path):
    p = write(tmp_path / "e.txt", "%%HOPR-TRIPLES 1\n3 2 0\n")
    assert load_triples(p) == (3, 2, set())
    p = write(tmp_path / "d.txt", "%%HOPR-TRIPLES 1\n2 1 2\n1 2 1\n1 2 1\n")
    assert load_triples(p)[2] == {(1, 2, 1)}


@pytest.mark.parametrize("body", [
    "%%HOPR-SLICES 1\n2 1 1\n1 2 1\n",   # wrong magic
    "%%HOPR-TRIPLES 2\n2 1 1\n1 2 1\n",  # wrong version
    "%%HOPR-TRIPLES 1\n2 1 1\n3 2 1\n",  # page out of range
    "%%HOPR-TRIPLES 1\n2 1 1\n1 2 2\n",  # anchor out of range
    "%%HOPR-TRIPLES 1\n2 1 2\n1 2 1\n",  # too few lines
    "%%HOPR-TRIPLES 1\n2 1 1\n1 2 1\n2 1 1\n",  # too many lines
    "%%HOPR-TRIPLES 1\n2 1\n",
    "",
])
def test_load_triples_rejects(tmp_path, body):
    with pytest.raises(FormatError):
        load_triples(write(tmp_path / "bad.txt", body))


def test_triples_roundtrip(tmp_path):
    triples = {(1, 2, 1), (2, 1, 1), (3, 1, 2)}
    save_triples(tmp_path / "t.txt", 3, 2, triples)
    assert load_triples(tmp_path / "t.txt") == (3, 2, triples)


# --- ingestion -------------------------------------------------------------


def test_single_triple_has_no_second_order_path():
    s = build_slice_set(2, 1, {(1, 2, 1)})
    assert s.nnz == 0
    for j in range(2):
        assert set(s.column_mass(j)) <= {0.0, 1.0}


def test_back_and_forth_link():
    # 1 -> 2 -> 1: at page 2 having come from 1, go back to 1
    s = build_slice_set(2, 1, {(1, 2, 1), (2, 1, 1)})
    T = s.to_dense_tensor()
    assert T[0, 1, 0] == 1.0 and T[1, 0, 1] == 1.0
    assert s.nnz == 2


def test_dense_links_give_uniform_slices():
    n = 2
    triples = {(a, b, 1) for a in range(1, n + 1) for b in range(1, n + 1)}
    s = build_slice_set(n, 1, triples)
    np.testing.assert_allclose(s.to_dense_tensor(), np.full((n, n, n), 1 / n))


def test_no_triples_all_dangling():
    s = build_slice_set(4, 3, set())
    assert s.nnz == 0
    np.testing.assert_array_equal(s.deficit_matrix(), np.ones((4, 4)))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), m=st.integers(1, 3), data=st.data())
def test_ingestion_matches_dense_oracle(n, m, data):
    triples = data.draw(st.sets(st.tuples(st.integers(1, n), st.integers(1, n), st.integers(1, m)),
                                max_size=30))
    s = build_slice_set(n, m, triples)
    np.testing.assert_allclose(s.to_dense_tensor(), dense_slices_oracle(n, m, triples), atol=1e-15)
    for j in range(n):
        assert s.column_mass(j).max(initial=0.0) <= 1.0 + 1e-12


def test_ingestion_range_check():
    with pytest.raises(InvalidInputError):
        build_slice_set(2, 1, {(1, 3, 1)})


# --- synthetic generation --------------------------------------------------


def test_synthetic_exact_count():
    assert gen_synthetic(100, 1e-4, seed=0).nnz == 100


def test_synthetic_deterministic():
    assert gen_synthetic(50, 1e-3, seed=7).equals(gen_synthetic(50, 1e-3, seed=7))
    assert not gen_synthetic(50, 1e-3, seed=7).equals(gen_synthetic(50, 1e-3, seed=8))


def test_synthetic_values_and_positions():
    s = gen_synthetic(20, 0.05, seed=1)
    assert s.nnz == 400
    assert s.vals.min() > 0 and s.vals.max() <= 1.0
    keys = (s.slice_index * 20 + s.cols) * 20 + s.rows
    assert np.unique(keys).size == s.nnz
    for j in range(20):
        assert s.column_mass(j).max() <= 1.0


def test_synthetic_argument_checks():
    with pytest.raises(InvalidInputError):
        gen_synthetic(10, 0.0, seed=0)
    with pytest.raises(InvalidInputError):
        gen_synthetic(0, 0.5, seed=0)


def test_synthetic_power_method_iterations():
    p = HoprProblem(gen_synthetic(1000, 1e-6, seed=0), alpha=0.85)
    _, rep = power_method(p, tol=1e-8)
    assert rep.converged and rep.iterations <= 15


# --- slice files -----------------------------------------------------------


def test_slice_roundtrip_is_bit_identical(tmp_path, rng):
    s = random_slices(7, rng, density=0.3)
    save_slice_set(tmp_path / "s.txt", s)
    assert load_slice_set(tmp_path / "s.txt").equals(s)


@pytest.mark.parametrize("body", [
    "%%HOPR-TRIPLES 1\n2 1\n1 1 1 0.5\n",
    "%%HOPR-SLICES 1\n2 1\n1 1 1 -0.5\n",
    "%%HOPR-SLICES 1\n2 1\n1 1 1 nan\n",
    "%%HOPR-SLICES 1\n2 1\n1 1 1 1.5\n",
    "%%HOPR-SLICES 1\n2 2\n1 1 1 0.5\n1 1 1 0.25\n",  # duplicate position
    "%%HOPR-SLICES 1\n2 2\n1 1 1 0.5\n",              # count mismatch
    "%%HOPR-SLICES 1\n2 1\n3 1 1 0.5\n",              # index out of range
    "%%HOPR-SLICES 1\n2 2\n1 1 1 0.7\n2 1 1 0.7\n",   # column mass > 1
])
def test_slice_file_rejects(tmp_path, body):
    with pytest.raises((FormatError, InvalidInputError)):
        load_slice_set(write(tmp_path / "bad.txt", body))


def test_format_error_carries_line(tmp_path):
    p = write(tmp_path / "bad.txt", "%%HOPR-SLICES 1\n2 1\n1 1 1 oops\n")
    with pytest.raises(FormatError, match="line 3"):
        load_slice_set(p)


# --- result files ----------------------------------------------------------


def test_result_roundtrip(tmp_path, rng):
    p = HoprProblem(random_slices(8, rng), alpha=0.85)
    a, rep = spm(p, beta=1e-4)
    save_result(tmp_path / "r.txt", a, rep, alpha=0.85, beta=1e-4, seed=3)
    rec = load_result(tmp_path / "r.txt")
    np.testing.assert_array_equal(rec.approx.to_dense(), a.to_dense())
    np.testing.assert_array_equal(top_k(pagerank_values(rec.approx), 8), top_k(pagerank_values(a), 8))
    assert rec.report.residual_history == rep.residual_history
    assert rec.report.iterations == rep.iterations and rec.report.converged == rep.converged
    assert rec.report.final_sparsity == rep.final_sparsity
    assert rec.meta["method"] == "spm" and rec.meta["seed"] == "3"


def test_result_checksum_detects_tampering(tmp_path):
    a = SparseUniformApprox(SparseColMatrix(np.diag([0.5, 0.25])), [0.1, 0.05])
    path = tmp_path / "r.txt"
    save_result(path, a, IterationReport(method="x"))
    text = path.read_text().replace("0.25", "0.35")
    path.write_text(text)
    with pytest.raises(FormatError, match="checksum"):
        load_result(path)


def test_result_rejects_bad_magic(tmp_path):
    with pytest.raises(FormatError):
        load_result(write(tmp_path / "r.txt", "%%HOPR-SLICES 1\n1 0\n1 1.0\n"))
