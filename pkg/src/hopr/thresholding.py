"""Closed-form spike/background split of a nonnegative vector.

Solves::

    min_{s >= 0, mu >= 0}  0.5 * ||s + mu * e - b||^2 + beta * ||s||_1

The minimiser keeps the ``d`` largest entries of ``b`` as spikes
``s_i = b_i - beta - mu`` and flattens the rest into the background ``mu``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError, UnsupportedSizeError
from .sparse_core import SparseColMatrix

__all__ = [
    "ThresholdResult",
    "threshold",
    "threshold_columns",
    "threshold_matrix",
    "threshold_oracle",
    "objective",
    "ORACLE_MAX_N",
]

ORACLE_MAX_N = 12


@dataclass(frozen=True)
class ThresholdResult:
    s: np.ndarray
    mu: float
    d: int

    @property
    def support(self):
        return np.flatnonzero(self.s)

    def reconstruct(self):
        """The thresholded vector ``s + mu * e``."""
        return self.s + self.mu


def _check(b, beta):
    if not beta > 0:
        raise InvalidInputError(f"beta must be positive, got {beta!r}")
    if not np.all(np.isfinite(b)):
        raise InvalidInputError("input must be finite")
    if np.any(b < 0):
        raise InvalidInputError("input must be nonnegative")


def threshold_columns(B, beta, *, check=True):
    """Threshold every column of a dense ``n x m`` array independently.

    Returns ``(S, mu, d)``: dense spikes with the shape of ``B``, the
    per-column background and the per-column spike count.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2:
        raise InvalidInputError("threshold_columns expects a 2-d array")
    if check:
        _check(B, beta)
    n, m = B.shape
    if n == 0:
        raise InvalidInputError("cannot threshold an empty vector")
    # descending order; ties keep the lower original index first
    order = np.argsort(-B, axis=0, kind="stable")
    c = np.take_along_axis(B, order, axis=0)
    # tail[t] = sum of c[t:] (computed from the small end for accuracy)
    tail = np.cumsum(c[::-1], axis=0)[::-1]
    # g(d) = (n - d) c_d - sum_{t > d} c_t is nonincreasing in d, so the spikes
    # are the longest prefix d with g(d) > n * beta (d = n never qualifies).
    if n > 1:
        dd = np.arange(1, n, dtype=np.float64)[:, None]
        g = (n - dd) * c[:-1] - tail[1:]
        d = np.cumprod(g > n * beta, axis=0).sum(axis=0)
    else:
        d = np.zeros(m, dtype=np.int64)
    rest = np.where(d < n, tail[np.minimum(d, n - 1), np.arange(m)], 0.0)
    mu = (rest + d * beta) / (n - d)
    spikes = c - beta - mu
    spikes[np.arange(n)[:, None] >= d] = 0.0
    np.maximum(spikes, 0.0, out=spikes)
    S = np.empty_like(B)
    np.put_along_axis(S, order, spikes, axis=0)
    return S, mu, d


def threshold(b, beta):
    """Spike/background split of a single nonnegative vector."""
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise InvalidInputError("threshold expects a 1-d vector")
    S, mu, d = threshold_columns(b[:, None], beta)
    return ThresholdResult(S[:, 0], float(mu[0]), int(d[0]))


def threshold_matrix(A, beta):
    """Column-wise threshold of a nonnegative matrix.

    Returns ``(S, u)`` with ``S`` a :class:`SparseColMatrix` of spikes and
    ``u[j]`` the background of column ``j``.
    """
    if sp.issparse(A):
        A = A.toarray()
    S, mu, _ = threshold_columns(A, beta)
    return SparseColMatrix(S), mu


def objective(b, beta, s, mu):
    b = np.asarray(b, dtype=np.float64)
    r = s + mu - b
    return 0.5 * float(r @ r) + beta * float(np.sum(np.abs(s)))


def threshold_oracle(b, beta):
    """Exhaustive reference solver over all ``2**n`` candidate supports.

    For each support the two candidate backgrounds are the unconstrained
    optimum ``mu = (sum_{off} b + |D| beta) / (n - |D|)`` and the boundary
    ``mu = 0``. Primal-feasible candidates are scored on the true objective
    and the best is returned.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1 or b.size == 0:
        raise InvalidInputError("threshold_oracle expects a nonempty 1-d vector")
    n = b.size
    if n > ORACLE_MAX_N:
        raise UnsupportedSizeError(f"oracle is exhaustive and limited to n <= {ORACLE_MAX_N}")
    _check(b, beta)

    masks = np.array(list(itertools.product((False, True), repeat=n)), dtype=bool)
    size = masks.sum(axis=1)
    off_sum = (np.where(masks, 0.0, b)).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu_free = np.where(size < n, (off_sum + size * beta) / np.maximum(n - size, 1), np.nan)

    best = None
    for mu_all in (mu_free, np.zeros_like(mu_free)):
        s = np.where(masks, b[None, :] - beta - mu_all[:, None], 0.0)
        feasible = np.isfinite(mu_all) & (mu_all >= 0) & np.all(s >= 0, axis=1)
        r = s + mu_all[:, None] - b[None, :]
        obj = 0.5 * np.sum(r * r, axis=1) + beta * s.sum(axis=1)
        obj = np.where(feasible, obj, np.inf)
        k = int(np.argmin(obj))
        if best is None or obj[k] < best[0]:
            best = (obj[k], s[k], float(mu_all[k]))
    _, s, mu = best
    s = np.where(s > 0, s, 0.0)
    return ThresholdResult(s, mu, int(np.count_nonzero(s)))
