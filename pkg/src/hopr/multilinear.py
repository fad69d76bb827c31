"""Multilinear PageRank baseline for third-order tensors.

Solves ``x = alpha R (x kron x) + (1 - alpha) v`` by fixed-point iteration,
where ``R`` is the dangling-corrected flattening of the tensor along its first
index. Neither the dangling vector nor ``x kron x`` is ever formed.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import DimensionError, InvalidInputError
from .operators import IterationReport
from .sparse_core import SliceSet

__all__ = [
    "FlattenedSliceSet",
    "permute_to_flattened",
    "permute_from_flattened",
    "ml_matvec",
    "ml_fixed_point",
    "benchmark_flatten",
    "rank_one",
]


class FlattenedSliceSet:
    """Slices ``Qt_k[i, j] = Q_j[i, k]`` of the first-index flattening.

    Same triplet storage as :class:`SliceSet` (sorted by block ``k``), with
    the roles of the second and third tensor indices exchanged.
    """

    def __init__(self, inner):
        self._inner = inner

    @property
    def n(self):
        return self._inner.n

    @property
    def nnz(self):
        return self._inner.nnz

    @property
    def triplets(self):
        """``(i, k, j, value)``: entry ``(i, j)`` of block ``k``."""
        s = self._inner
        return s.rows, s.slice_index, s.cols, s.vals

    def __getitem__(self, k):
        return self._inner[k]

    def stacked_dense(self):
        """Dense ``n x n**2`` matrix ``[Qt_0, ..., Qt_{n-1}]``; small ``n`` only."""
        n = self.n
        out = np.zeros((n, n * n))
        i, k, j, val = self.triplets
        out[i, k * n + j] = val
        return out

    def __repr__(self):
        return f"FlattenedSliceSet(n={self.n}, nnz={self.nnz})"


def permute_to_flattened(slices):
    """Re-bucket ``Q_j[i, k]`` into ``Qt_k[i, j]`` (a column permutation of ``[Q_0 .. Q_{n-1}]``)."""
    s = slices
    return FlattenedSliceSet(SliceSet(s.n, s.rows, s.cols, s.slice_index, s.vals))


def permute_from_flattened(flat):
    """Inverse of :func:`permute_to_flattened`."""
    i, k, j, val = flat.triplets
    return SliceSet(flat.n, i, j, k, val)


def benchmark_flatten(slices):
    """Wall time in seconds of :func:`permute_to_flattened`, with its result."""
    t0 = time.perf_counter()
    flat = permute_to_flattened(slices)
    return time.perf_counter() - t0, flat


def ml_matvec(flat, x):
    """``sum_k x_k Qt_k x``, i.e. ``Qt (x kron x)`` without the length-``n**2`` vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (flat.n,):
        raise DimensionError(f"vector has shape {x.shape}, expected ({flat.n},)")
    i, k, j, val = flat.triplets
    return np.bincount(i, weights=val * x[k] * x[j], minlength=flat.n)


def rank_one(x):
    """The symmetric rank-one lift ``x x^T``."""
    x = np.asarray(x, dtype=np.float64)
    return np.outer(x, x)


def ml_fixed_point(flat, v=None, alpha=0.85, tol=1e-8, max_iter=200, x0=None):
    """Fixed-point iteration for the multilinear PageRank vector.

    ``x <- alpha m + alpha/n (1 - ||m||_1) e + (1 - alpha) v`` with
    ``m = ml_matvec(flat, x)``; stops when ``||x_new - x||_1 / ||x||_1 <= tol``.
    A unique solution is only guaranteed for ``alpha < 1/2``; larger values
    run but are noted in the report.
    """
    n = flat.n
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha!r}")
    v = np.full(n, 1.0 / n) if v is None else np.asarray(v, dtype=np.float64)
    x = v.copy() if x0 is None else np.array(x0, dtype=np.float64)
    for name, vec in (("v", v), ("x0", x)):
        if vec.shape != (n,):
            raise DimensionError(f"{name} has shape {vec.shape}, expected ({n},)")
        if np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-12:
            raise InvalidInputError(f"{name} must be a stochastic vector")

    report = IterationReport(method="ml-fp")
    if alpha >= 0.5:
        report.notes.append(f"alpha={alpha} >= 1/2: uniqueness of the solution is not guaranteed")
    t0 = time.perf_counter()
    for q in range(max_iter):
        m = ml_matvec(flat, x)
        x_new = alpha * m + (alpha / n) * (1.0 - m.sum()) + (1.0 - alpha) * v
        res = float(np.abs(x_new - x).sum() / x.sum())
        x = x_new
        report.iterations = q + 1
        report.residual_history.append(res)
        if res <= tol:
            report.converged = True
            break
    report.wall_time = time.perf_counter() - t0
    return x, report
