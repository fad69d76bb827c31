"""Truncated power methods on the sparse-plus-background representation.

Every iterate is stored as ``X = S + e u^T``: a sparse matrix of spikes ``S``
and one background value ``u[j]`` per column. Each sweep rebuilds a column
from row ``j`` of the current iterate and splits it again with
:func:`hopr.thresholding.threshold_columns`.

Three solvers live here:

* :func:`tpm_ding` -- the original truncated power method with an auxiliary
  teleport matrix ``G`` and explicitly stored dangling vectors.
* :func:`tpm_variant` -- ``G = v e^T / n``, no dangling vectors, no ``G``.
* :func:`tpm_partial` -- the variant, but after a warm-up only the columns
  with the largest PageRank values keep being recomputed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _engine
from .errors import ConfigError, DimensionError, InvalidInputError
from .operators import IterationReport
from .sparse_core import SparseColMatrix
from .thresholding import threshold_columns

__all__ = [
    "SparseUniformApprox",
    "ActiveSet",
    "default_start",
    "pagerank_values",
    "split_pagerank_values",
    "top_k",
    "shrink_active_set",
    "tpm_ding",
    "tpm_variant",
    "tpm_partial",
    "ding_approximation",
    "variant_map",
    "random_teleport_matrix",
    "relative_error",
]


@dataclass(frozen=True)
class SparseUniformApprox:
    """``X = S + e u^T``: sparse spikes plus a per-column background."""

    S: SparseColMatrix
    u: np.ndarray

    def __post_init__(self):
        S = self.S if isinstance(self.S, SparseColMatrix) else SparseColMatrix(self.S)
        u = np.asarray(self.u, dtype=np.float64).copy()
        if S.n_rows != S.n_cols or u.shape != (S.n_cols,):
            raise DimensionError("S must be n x n and u of length n")
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise InvalidInputError("background values must be finite and nonnegative")
        u.flags.writeable = False
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_dense(cls, X):
        X = np.asarray(X, dtype=np.float64)
        return cls(SparseColMatrix(X), np.zeros(X.shape[1]))

    @property
    def n(self):
        return self.u.size

    @property
    def sparsity(self):
        """Fraction of stored spikes among the ``n**2`` entries."""
        return self.S.nnz / float(self.n) ** 2

    def mass(self):
        return float(self.S.csc.sum() + self.n * self.u.sum())

    def columns(self, cols):
        """Dense ``n x len(cols)`` block of the reconstructed matrix."""
        cols = np.asarray(cols, dtype=np.int64)
        return self.S.csc[:, cols].toarray() + self.u[cols]

    def to_dense(self):
        return self.S.toarray() + self.u[None, :]


def default_start(n):
    """``S = 0``, ``u = e / n**2``: total mass one."""
    return SparseUniformApprox(SparseColMatrix.empty(n, n), np.full(n, 1.0 / n**2))


def pagerank_values(approx):
    """``PV[j] = sum_i S[i, j] + u[j]`` (background counted once per column)."""
    return np.asarray(approx.S.csc.sum(axis=0)).ravel() + approx.u


def split_pagerank_values(X, beta):
    """PageRank values of a dense matrix after the same spike/background split.

    Lets a dense reference (e.g. the power-method solution) be ranked on the
    same footing as the truncated solvers run with threshold ``beta``.
    """
    S, mu, _ = threshold_columns(np.asarray(X, dtype=np.float64), beta)
    return S.sum(axis=0) + mu


def top_k(pv, k):
    """Indices of the ``k`` largest PageRank values, ties to the lower index."""
    pv = np.asarray(pv, dtype=np.float64)
    order = np.lexsort((np.arange(pv.size), -pv))
    return order[:k]


def relative_error(approx, reference, threads=1):
    """``||X - X_ref||_l1 / ||X_ref||_l1`` evaluated one column block at a time.

    ``reference`` is either a dense array or another :class:`SparseUniformApprox`.
    """
    n = approx.n
    if isinstance(reference, SparseUniformApprox):
        if reference.n != n:
            raise DimensionError("approximations differ in size")
        get_ref = reference.columns
    else:
        reference = np.asarray(reference, dtype=np.float64)
        if reference.shape != (n, n):
            raise DimensionError(f"reference has shape {reference.shape}, expected {(n, n)}")
        get_ref = lambda cols: reference[:, cols]  # noqa: E731

    blocks = _engine.column_blocks(np.arange(n), n)

    def run(cols):
        ref = get_ref(cols)
        return np.abs(approx.columns(cols) - ref).sum(), ref.sum()

    parts = _engine.map_blocks(run, blocks, threads)
    diff = sum(p[0] for p in parts)
    total = sum(p[1] for p in parts)
    return float(diff / total)


@dataclass(frozen=True)
class ActiveSet:
    """Columns still being updated, together with the shrink law parameters."""

    members: np.ndarray
    tau: float = 0.1
    varsigma: int = 10
    ell: int = 1

    def __post_init__(self):
        m = np.unique(np.asarray(self.members, dtype=np.int64))
        m.flags.writeable = False
        object.__setattr__(self, "members", m)

    @classmethod
    def full(cls, n, tau=0.1, varsigma=10, ell=1):
        _check_partial(n, varsigma, tau, ell)
        return cls(np.arange(n), tau, varsigma, ell)

    def __len__(self):
        return self.members.size


def _check_partial(n, varsigma, tau, ell):
    if varsigma < 1 or varsigma > n:
        raise ConfigError(f"varsigma must lie in [1, n={n}], got {varsigma!r}")
    if not 0.0 < tau <= 1.0:
        raise ConfigError(f"tau must lie in (0, 1], got {tau!r}")
    if ell < 1:
        raise ConfigError(f"ell must be at least 1, got {ell!r}")


def shrink_active_set(prev, pv, q):
    """Keep the ``max(floor(tau * |prev|), varsigma)`` members with the largest PV.

    Ties go to the lower column index.
    """
    if q < prev.ell:
        raise ConfigError(f"the active set only shrinks from iteration {prev.ell} on, got q={q}")
    pv = np.asarray(pv, dtype=np.float64)
    if prev.varsigma > pv.size:
        raise ConfigError(f"varsigma={prev.varsigma} exceeds n={pv.size}")
    card = max(int(np.floor(prev.tau * len(prev))), prev.varsigma)
    card = min(card, len(prev))
    members = prev.members
    order = np.lexsort((members, -pv[members]))
    return ActiveSet(members[order[:card]], prev.tau, prev.varsigma, prev.ell)


# ---------------------------------------------------------------------------
# shared sweep


def _teleport_rows(G, rows, n, v):
    """Dense rows ``G[rows, :]`` of the auxiliary teleport matrix."""
    if G is None:
        return np.repeat((v[rows] / n)[:, None], n, axis=1)
    if sp.issparse(G):
        return G[rows, :].toarray()
    return G[rows, :]


def _sweep(problem, kind, beta, S_csc, S_csr, u, cols, G=None, D=None):
    """Recompute the columns ``cols`` from the current ``S + e u^T``.

    Returns the new spikes as coo parts, the new backgrounds, the l1 change
    summed over ``cols`` and the new PageRank values of ``cols``.
    """
    n, alpha, v = problem.n, problem.alpha, problem.v
    yrows = S_csr[cols, :].toarray() + u[None, :]
    if kind == "ding":
        grows = _teleport_rows(G, cols, n, v)
        z = alpha * yrows + (1.0 - alpha) * grows
        Y = _engine.slice_products(problem.slices, cols, z)
        Y += (np.einsum("bk,bk->b", D[cols], z) / n)[None, :]
    else:
        qy = _engine.slice_products(problem.slices, cols, yrows)
        ny = yrows.sum(axis=1)
        Y = alpha * qy
        Y += (alpha / n) * (ny - qy.sum(axis=0))
        if kind == "variant":
            Y += ((1.0 - alpha) / n) * v[:, None]
        elif kind == "spm":
            Y += (1.0 - alpha) * np.outer(v, ny)
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
    # rounding can leave -1e-20 where the deficit is exactly zero
    np.maximum(Y, 0.0, out=Y)

    S_blk, mu, _ = threshold_columns(Y, beta, check=False)
    old = S_csc[:, cols].toarray() + u[cols]
    change = float(np.abs((S_blk + mu) - old).sum())
    pv = S_blk.sum(axis=0) + mu
    r, c = np.nonzero(S_blk)
    return (r, cols[c], S_blk[r, c]), mu, change, pv


def _iterate(problem, kind, beta, tol, max_iter, start, *, G=None, partial=None,
             threads=1, callback=None, method=None):
    n = problem.n
    if not beta > 0:
        raise ConfigError(f"beta must be positive, got {beta!r}")
    approx = default_start(n) if start is None else start
    if approx.n != n:
        raise DimensionError("starting approximation has the wrong size")
    D = problem.slices.deficit_matrix() if kind == "ding" else None

    S_csc = approx.S.csc
    u = approx.u.copy()
    pv = pagerank_values(approx)
    active = ActiveSet.full(n, *partial) if partial is not None else None
    all_cols = np.arange(n)

    report = IterationReport(method=method or kind)
    t0 = time.perf_counter()
    for q in range(max_iter):
        if active is None or q < active.ell:
            cols = all_cols
        else:
            active = shrink_active_set(active, pv, q)
            cols = active.members
        S_csr = S_csc.tocsr()
        mass = S_csc.sum() + n * u.sum()
        blocks = _engine.column_blocks(cols, n)
        parts = _engine.map_blocks(
            lambda blk: _sweep(problem, kind, beta, S_csc, S_csr, u, blk, G=G, D=D),
            blocks, threads)

        res = sum(p[2] for p in parts) / mass
        new_u = u.copy()
        rr, cc, vv = [np.zeros(0, dtype=np.int64)], [np.zeros(0, dtype=np.int64)], [np.zeros(0)]
        for blk, ((r, c, val), mu, _, pv_blk) in zip(blocks, parts):
            new_u[blk] = mu
            pv[blk] = pv_blk
            rr.append(r)
            cc.append(c)
            vv.append(val)
        updated = sp.csc_array((np.concatenate(vv), (np.concatenate(rr), np.concatenate(cc))),
                               shape=(n, n))
        if cols.size == n:
            S_csc = updated
        else:
            keep = np.ones(n)
            keep[cols] = 0.0
            frozen = S_csc @ sp.diags_array(keep)
            frozen.eliminate_zeros()
            S_csc = (frozen + updated).tocsc()
        S_csc.sort_indices()
        u = new_u

        report.iterations = q + 1
        report.residual_history.append(float(res))
        report.active_columns_history.append(int(cols.size))
        if callback is not None:
            callback(q, SparseUniformApprox(S_csc, u), cols)
        if res <= tol:
            report.converged = True
            break
    report.wall_time = time.perf_counter() - t0
    result = SparseUniformApprox(S_csc, u)
    report.final_sparsity = result.sparsity
    return result, report


# ---------------------------------------------------------------------------
# public solvers


def random_teleport_matrix(n, sparsity, seed):
    """Random sparse nonnegative ``G`` with total mass one (at least one entry)."""
    rng = np.random.default_rng(seed)
    nnz = max(1, int(np.ceil(sparsity * n * n - 1e-9)))
    pos = rng.choice(n * n, size=nnz, replace=False)
    vals = 1.0 - rng.random(nnz)
    vals /= vals.sum()
    r, c = np.divmod(pos, n)
    return sp.csr_array((vals, (r, c)), shape=(n, n))


def tpm_ding(problem, G=None, beta=None, tol=1e-8, max_iter=200, S0=None, u0=None, *,
             threads=1, callback=None):
    """Truncated power method with auxiliary teleport matrix ``G``.

    Each sweep computes ``Y[:, j] = P_j z_j`` with
    ``z_j = alpha * (S[j, :] + u) + (1 - alpha) * G[j, :]`` using the stored
    dangling vectors, then thresholds. The approximation of the stationary
    matrix is ``alpha * (S + e u^T) + (1 - alpha) * G``; see
    :func:`ding_approximation`.

    ``G`` may be dense, scipy-sparse, or ``None`` for ``v e^T / n``.
    """
    n = problem.n
    if G is not None:
        if G.shape != (n, n):
            raise DimensionError(f"G has shape {G.shape}, expected {(n, n)}")
        total = G.sum()
        if (G.min() if not sp.issparse(G) else (G.data.min() if G.nnz else 0.0)) < 0:
            raise InvalidInputError("G must be nonnegative")
        if abs(total - 1.0) > 1e-10:
            raise InvalidInputError(f"G must have total mass 1, got {total!r}")
        if sp.issparse(G):
            G = sp.csr_array(G)
    beta = 1.0 / n**3 if beta is None else beta
    return _iterate(problem, "ding", beta, tol, max_iter, _start(n, S0, u0), G=G,
                    threads=threads, callback=callback, method="tpm")


def ding_approximation(approx, alpha, G=None, v=None):
    """``alpha * (S + e u^T) + (1 - alpha) * G`` as a sparse-plus-background pair."""
    n = approx.n
    if G is None:
        v = np.full(n, 1.0 / n) if v is None else np.asarray(v, dtype=np.float64)
        if np.allclose(v, v[0], rtol=0, atol=1e-15):
            return SparseUniformApprox(alpha * approx.S.csc, alpha * approx.u + (1 - alpha) * v[0] / n)
        G = np.outer(v, np.full(n, 1.0 / n))
    G = sp.csc_array(G)
    return SparseUniformApprox(alpha * approx.S.csc + (1 - alpha) * G, alpha * approx.u)


def _start(n, S0, u0):
    if S0 is None and u0 is None:
        return None
    S0 = SparseColMatrix.empty(n, n) if S0 is None else S0
    u0 = np.full(n, 1.0 / n**2) if u0 is None else u0
    return SparseUniformApprox(S0, u0)


def tpm_variant(problem, beta=None, tol=1e-8, max_iter=200, S0=None, u0=None, *,
                threads=1, callback=None):
    """Truncated power method with ``G = v e^T / n`` and no dangling vectors.

    Sweep: ``y = S[j, :] + u``,
    ``Y[:, j] = alpha Q_j y + alpha/n (||y|| - ||Q_j y||) e + (1 - alpha)/n v``,
    then threshold. The approximation is ``S + e u^T`` itself.
    """
    n = problem.n
    beta = 1.0 / n**3 if beta is None else beta
    return _iterate(problem, "variant", beta, tol, max_iter, _start(n, S0, u0),
                    threads=threads, callback=callback, method="tpm-v")


def tpm_partial(problem, beta=None, varsigma=10, tau=0.1, ell=1, tol=1e-8, max_iter=200,
                S0=None, u0=None, *, threads=1, callback=None):
    """:func:`tpm_variant` with partial updating.

    The first ``ell`` sweeps touch every column. Afterwards the active set is
    cut to the ``max(floor(tau * previous), varsigma)`` columns of the
    previous set with the largest PageRank values, and all other columns are
    frozen. With ``tau = 1`` this is exactly :func:`tpm_variant`.
    """
    n = problem.n
    _check_partial(n, varsigma, tau, ell)
    beta = 1.0 / n**3 if beta is None else beta
    return _iterate(problem, "variant", beta, tol, max_iter, _start(n, S0, u0),
                    partial=(tau, varsigma, ell), threads=threads, callback=callback,
                    method="tpm-pu")


def variant_map(problem, A, beta, G=None):
    """Dense reference of one variant sweep ``A -> T~(alpha P(A) + (1 - alpha) G)``.

    Builds every ``P_j`` explicitly; for property tests at small ``n``.
    """
    A = np.asarray(A, dtype=np.float64)
    n, alpha = problem.n, problem.alpha
    P = problem.slices.dense_stochastic_slices()
    if G is None:
        G = np.outer(problem.v, np.full(n, 1.0 / n))
    Y = alpha * np.einsum("jik,jk->ij", P, A) + (1.0 - alpha) * G
    S, mu, _ = threshold_columns(Y, beta)
    return S + mu[None, :]
