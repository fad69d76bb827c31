"""The exact higher-order PageRank operator and the dense power method.

For a second-order chain the stationary matrix ``X`` (``X[i, j]`` is the
probability of being at ``i`` now and at ``j`` one step earlier) satisfies,
column by column::

    X[:, j] = alpha * P_j X[j, :]^T + (1 - alpha) * ||X[j, :]||_1 * v

with the dangling-corrected ``P_j = Q_j + e d_j^T / n``. The correction is
never formed: ``d_j^T y = ||y||_1 - ||Q_j y||_1`` for nonnegative ``y``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .errors import ConfigError, DimensionError, InvalidInputError, UnsupportedSizeError
from .sparse_core import SliceSet, spmv

__all__ = [
    "HoprProblem",
    "IterationReport",
    "DENSE_MAX_N",
    "apply_w_column",
    "apply_w",
    "power_method",
    "model_residual",
    "uniform_start",
]

DENSE_MAX_N = 5000
STOCH_TOL = 1e-12


@dataclass(frozen=True)
class HoprProblem:
    """Slices, teleport vector and damping factor of one PageRank problem."""

    slices: SliceSet
    v: np.ndarray = None
    alpha: float = 0.85

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        n = self.slices.n
        if self.v is None:
            v = np.full(n, 1.0 / n)
        else:
            v = np.asarray(self.v, dtype=np.float64).copy()
            if v.shape != (n,):
                raise DimensionError(f"teleport vector has shape {v.shape}, expected ({n},)")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise InvalidInputError("teleport vector must be finite and nonnegative")
            if abs(v.sum() - 1.0) > STOCH_TOL:
                raise InvalidInputError(f"teleport vector sums to {v.sum()!r}, not 1")
        v.flags.writeable = False
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.slices.n


@dataclass
class IterationReport:
    """What happened during one solver run."""

    method: str = ""
    iterations: int = 0
    converged: bool = False
    residual_history: list = field(default_factory=list)
    wall_time: float = 0.0
    active_columns_history: list = field(default_factory=list)
    final_sparsity: float | None = None
    notes: list = field(default_factory=list)

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else float("nan")


def uniform_start(n):
    """Uniform starting matrix with total mass 1."""
    return np.full((n, n), 1.0 / (n * n))


def apply_w_column(problem, X, j):
    """Column ``j`` of the operator applied to ``X``, using one sparse mat-vec."""
    X = np.asarray(X, dtype=np.float64)
    n, alpha = problem.n, problem.alpha
    y = X[j, :]
    qy = spmv(problem.slices[j], y)
    ny = y.sum()
    return alpha * qy + (alpha / n) * (ny - qy.sum()) + (1.0 - alpha) * ny * problem.v


def _w_block(problem, X, cols):
    n, alpha = problem.n, problem.alpha
    yrows = X[cols, :]
    qy = _engine.slice_products(problem.slices, cols, yrows)
    ny = yrows.sum(axis=1)
    out = alpha * qy
    out += (alpha / n) * (ny - qy.sum(axis=0))
    out += (1.0 - alpha) * np.outer(problem.v, ny)
    return out


def apply_w(problem, X, threads=1):
    """The full operator on a dense nonnegative ``n x n`` matrix."""
    X = np.asarray(X, dtype=np.float64)
    n = problem.n
    if X.shape != (n, n):
        raise DimensionError(f"expected a {(n, n)} matrix, got {X.shape}")
    out = np.empty_like(X)
    blocks = _engine.column_blocks(np.arange(n), n)

    def run(cols):
        out[:, cols[0]:cols[-1] + 1] = _w_block(problem, X, cols)

    _engine.map_blocks(run, blocks, threads)
    return out


def model_residual(problem, X):
    """``||X - W(X)||_l1``, the distance of ``X`` from being a fixed point."""
    X = np.asarray(X, dtype=np.float64)
    if np.any(X < 0):
        raise InvalidInputError("residual is defined for nonnegative X")
    return float(np.abs(X - apply_w(problem, X)).sum())


def power_method(problem, X0=None, tol=1e-8, max_iter=200, *, threads=1,
                 max_dense_n=DENSE_MAX_N, callback=None):
    """Jacobi power iteration ``X <- W(X)`` on the dense stationary matrix.

    Stops once ``||X_new - X||_l1 / ||X||_l1 <= tol``. When ``max_iter`` is hit
    the last iterate is returned with ``report.converged = False``.

    Returns
    -------
    X : ndarray, shape (n, n)
    report : IterationReport
    """
    n = problem.n
    if n > max_dense_n:
        raise UnsupportedSizeError(f"dense power method is capped at n <= {max_dense_n}")
    if X0 is None:
        X = uniform_start(n)
    else:
        X = np.array(X0, dtype=np.float64)
        if X.shape != (n, n):
            raise DimensionError(f"X0 must have shape {(n, n)}")
        if np.any(X < 0):
            raise InvalidInputError("X0 must be nonnegative")
        if abs(X.sum() - 1.0) > STOCH_TOL:
            raise InvalidInputError("X0 must have total mass 1")

    report = IterationReport(method="power")
    t0 = time.perf_counter()
    for q in range(max_iter):
        X_new = apply_w(problem, X, threads=threads)
        res = float(np.abs(X_new - X).sum() / X.sum())
        X = X_new
        report.iterations = q + 1
        report.residual_history.append(res)
        if callback is not None:
            callback(q, X)
        if res <= tol:
            report.converged = True
            break
    report.wall_time = time.perf_counter() - t0
    return X, report
