"""Sparse power method on the original (unmodified) model.

Same sweep structure as :mod:`hopr.truncated_pm`, but the teleport term is
``(1 - alpha) ||y||_1 v`` as in the exact operator, so the fixed point
approximates the true stationary matrix rather than a ``G``-modified one.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .thresholding import threshold_columns
from .truncated_pm import _check_partial, _iterate, _start

__all__ = ["spm", "spm_partial", "rho_experiment", "write_rho_table"]


def spm(problem, beta=None, tol=1e-8, max_iter=200, S0=None, u0=None, *,
        threads=1, callback=None):
    """Sparse power method.

    Sweep: ``y = S[j, :] + u``,
    ``Y[:, j] = alpha Q_j y + alpha/n (||y|| - ||Q_j y||) e + (1 - alpha) ||y|| v``,
    then threshold column ``j``.
    """
    n = problem.n
    beta = 1.0 / n**3 if beta is None else beta
    return _iterate(problem, "spm", beta, tol, max_iter, _start(n, S0, u0),
                    threads=threads, callback=callback, method="spm")


def spm_partial(problem, beta=None, varsigma=10, tau=0.1, ell=1, tol=1e-8, max_iter=200,
                S0=None, u0=None, *, threads=1, callback=None):
    """:func:`spm` restricted to a shrinking set of high-PageRank columns."""
    n = problem.n
    _check_partial(n, varsigma, tau, ell)
    beta = 1.0 / n**3 if beta is None else beta
    return _iterate(problem, "spm", beta, tol, max_iter, _start(n, S0, u0),
                    partial=(tau, varsigma, ell), threads=threads, callback=callback,
                    method="spm-pu")


def _thresholded(A, beta):
    S, mu, _ = threshold_columns(A, beta, check=False)
    return S + mu[None, :]


def rho_experiment(n, trials, beta=None, seed=0, *, normalize=True):
    """Empirical contraction ratios of the column-wise threshold.

    Each trial draws two ``n x n`` matrices with i.i.d. uniform[0, 1] entries
    and records ``||T(A) - T(B)||_l1 / ||A - B||_l1``. With ``normalize`` the
    draws are first scaled to total mass one, which is the scale of the
    solver iterates the threshold is applied to.
    """
    if n < 2:
        raise InvalidInputError("rho_experiment needs n >= 2")
    if trials < 1:
        raise InvalidInputError("rho_experiment needs at least one trial")
    beta = 1.0 / n**2 if beta is None else beta
    rng = np.random.default_rng(seed)
    rhos = []
    while len(rhos) < trials:
        A = rng.random((n, n))
        B = rng.random((n, n))
        if normalize:
            A /= A.sum()
            B /= B.sum()
        denom = np.abs(A - B).sum()
        if denom == 0.0:
            continue
        rhos.append(float(np.abs(_thresholded(A, beta) - _thresholded(B, beta)).sum() / denom))
    return rhos


def write_rho_table(path, rhos):
    """Two-column text table ``trial rho`` (1-based trial numbers)."""
    with open(path, "w") as fh:
        fh.write("# trial rho\n")
        for t, r in enumerate(rhos, start=1):
            fh.write(f"{t} {r!r}\n")
