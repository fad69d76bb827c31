"""Sparse storage for the transition slices and the dangling-deficit kernels.

Indices are 0-based throughout the in-memory API. The file formats in
:mod:`hopr.data_io` are 1-based.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, InvalidInputError

__all__ = [
    "COLSUM_TOL",
    "SparseColMatrix",
    "SliceSet",
    "spmv",
    "column_l1_sums",
    "dangling_deficit",
]

# Columns whose mass exceeds 1 by at most this much are accepted (and clamped).
COLSUM_TOL = 1e-12


class SparseColMatrix:
    """Immutable column-compressed nonnegative matrix.

    A thin validated wrapper around :class:`scipy.sparse.csc_array`. Stored
    values are finite and strictly positive, row indices are strictly
    increasing within each column.
    """

    __slots__ = ("_csc",)

    def __init__(self, matrix, shape=None):
        csc = sp.csc_array(matrix, shape=shape, dtype=np.float64, copy=True)
        csc.sum_duplicates()
        csc.eliminate_zeros()
        csc.sort_indices()
        data = csc.data
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("sparse matrix holds non-finite values")
        if np.any(data < 0):
            raise InvalidInputError("sparse matrix holds negative values")
        csc.data.flags.writeable = False
        csc.indices.flags.writeable = False
        csc.indptr.flags.writeable = False
        self._csc = csc

    @classmethod
    def from_triplets(cls, rows, cols, vals, shape):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= shape[0]):
            raise InvalidInputError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= shape[1]):
            raise InvalidInputError("column index out of range")
        return cls(sp.coo_array((np.asarray(vals, dtype=np.float64), (rows, cols)), shape=shape))

    @classmethod
    def empty(cls, n_rows, n_cols):
        return cls(sp.csc_array((n_rows, n_cols)))

    @property
    def csc(self):
        """The underlying (read-only) scipy array."""
        return self._csc

    @property
    def shape(self):
        return self._csc.shape

    @property
    def n_rows(self):
        return self._csc.shape[0]

    @property
    def n_cols(self):
        return self._csc.shape[1]

    @property
    def nnz(self):
        return self._csc.nnz

    def toarray(self):
        return self._csc.toarray()

    def __repr__(self):
        return f"SparseColMatrix(shape={self.shape}, nnz={self.nnz})"


def spmv(Q, x):
    """Return ``Q @ x`` for a nonnegative vector ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != Q.n_cols:
        raise DimensionError(f"cannot multiply {Q.shape} matrix by vector of shape {x.shape}")
    if np.any(x < 0):
        raise InvalidInputError("spmv expects a nonnegative vector")
    return Q.csc @ x


def column_l1_sums(Q):
    """Column sums of a nonnegative sparse matrix (equal to column l1 norms)."""
    csc = Q.csc
    col_of_entry = np.repeat(np.arange(Q.n_cols), np.diff(csc.indptr))
    return np.bincount(col_of_entry, weights=csc.data, minlength=Q.n_cols).astype(np.float64)


def dangling_deficit(Q):
    """Per-column mass deficit ``d(k) = 1 - sum_i Q(i, k)``.

    With this ``d``, ``Q + e d^T / n`` is column stochastic. For 0/1 column
    sums it is the usual dangling indicator.
    """
    sums = column_l1_sums(Q)
    if np.any(sums > 1.0 + COLSUM_TOL):
        k = int(np.argmax(sums))
        raise InvalidInputError(f"column {k} has mass {sums[k]!r} > 1")
    return np.clip(1.0 - sums, 0.0, 1.0)


class SliceSet:
    """The ``n`` column-substochastic slices ``Q_0 .. Q_{n-1}`` of a transition tensor.

    Entry ``Q_j[i, k]`` is the probability of moving to ``i`` given the
    current state ``j`` and previous state ``k``. Storage is a triplet list
    sorted by ``(j, k, i)``, so memory is proportional to the nonzero count
    rather than ``n**2``.
    """

    def __init__(self, n, rows, slices, cols, vals):
        n = int(n)
        if n < 1:
            raise InvalidInputError("a slice set needs n >= 1")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        slices = np.asarray(slices, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.size == slices.size == cols.size == vals.size):
            raise DimensionError("triplet arrays differ in length")
        for name, idx in (("row", rows), ("slice", slices), ("column", cols)):
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise InvalidInputError(f"{name} index out of range for n={n}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("slice values must be finite")
        if np.any(vals < 0):
            raise InvalidInputError("slice values must be nonnegative")

        keep = vals != 0
        rows, slices, cols, vals = rows[keep], slices[keep], cols[keep], vals[keep]
        order = np.lexsort((rows, cols, slices))
        rows, slices, cols, vals = rows[order], slices[order], cols[order], vals[order]
        # merge duplicate positions
        if rows.size > 1:
            key = (slices * n + cols) * n + rows
            first = np.concatenate(([True], key[1:] != key[:-1]))
            if not first.all():
                starts = np.flatnonzero(first)
                vals = np.add.reduceat(vals, starts)
                rows, slices, cols = rows[starts], slices[starts], cols[starts]

        # column masses over the nonempty (j, k) columns
        col_key = slices * n + cols
        if col_key.size:
            head = np.concatenate(([True], col_key[1:] != col_key[:-1]))
            starts = np.flatnonzero(head)
            mass = np.add.reduceat(vals, starts)
            if np.any(mass > 1.0 + COLSUM_TOL):
                bad = starts[np.argmax(mass)]
                raise InvalidInputError(
                    f"slice {slices[bad]} column {cols[bad]} has mass {mass.max()!r} > 1"
                )
            over = mass > 1.0
            if over.any():
                scale = np.repeat(np.where(over, mass, 1.0), np.diff(np.append(starts, vals.size)))
                vals = vals / scale
            self._col_keys = col_key[starts]
            self._col_mass = np.minimum(mass, 1.0)
        else:
            self._col_keys = np.zeros(0, dtype=np.int64)
            self._col_mass = np.zeros(0)

        for arr in (rows, slices, cols, vals):
            arr.flags.writeable = False
        self.n = n
        self.rows, self.slice_index, self.cols, self.vals = rows, slices, cols, vals
        self.slice_ptr = np.searchsorted(slices, np.arange(n + 1), side="left")
        self._slices = None

    @classmethod
    def from_slices(cls, slices):
        """Build from a sequence of ``n`` square matrices (sparse or dense)."""
        slices = list(slices)
        n = len(slices)
        parts = ([], [], [], [])
        for j, Q in enumerate(slices):
            csc = Q.csc if isinstance(Q, SparseColMatrix) else sp.csc_array(Q)
            if csc.shape != (n, n):
                raise DimensionError(f"slice {j} has shape {csc.shape}, expected {(n, n)}")
            coo = csc.tocoo()
            parts[0].append(coo.row)
            parts[1].append(np.full(coo.nnz, j))
            parts[2].append(coo.col)
            parts[3].append(coo.data)
        if n == 0:
            raise InvalidInputError("a slice set needs n >= 1")
        return cls(n, *(np.concatenate(p) for p in parts))

    @classmethod
    def from_dense_tensor(cls, T):
        """Build from a dense array ``T[i, j, k] = Q_j[i, k]``."""
        T = np.asarray(T, dtype=np.float64)
        if T.ndim != 3 or len(set(T.shape)) != 1:
            raise DimensionError("expected an n x n x n array")
        i, j, k = np.nonzero(T)
        return cls(T.shape[0], i, j, k, T[i, j, k])

    @classmethod
    def empty(cls, n):
        z = np.zeros(0, dtype=np.int64)
        return cls(n, z, z, z, np.zeros(0))

    @property
    def nnz(self):
        return int(self.vals.size)

    def __len__(self):
        return self.n

    def __getitem__(self, j):
        return self.slices[j]

    @property
    def slices(self):
        """List of the ``n`` slices as :class:`SparseColMatrix` (built on first use)."""
        if self._slices is None:
            out = []
            for j in range(self.n):
                lo, hi = self.slice_ptr[j], self.slice_ptr[j + 1]
                out.append(SparseColMatrix.from_triplets(
                    self.rows[lo:hi], self.cols[lo:hi], self.vals[lo:hi], (self.n, self.n)))
            self._slices = out
        return self._slices

    def column_mass(self, j):
        """Column sums of slice ``j`` as a dense length-``n`` vector."""
        out = np.zeros(self.n)
        lo, hi = np.searchsorted(self._col_keys, [j * self.n, (j + 1) * self.n])
        out[self._col_keys[lo:hi] - j * self.n] = self._col_mass[lo:hi]
        return out

    def deficit(self, j):
        """Dangling deficit ``d_j`` of slice ``j``."""
        return np.clip(1.0 - self.column_mass(j), 0.0, 1.0)

    def deficit_matrix(self):
        """Dense ``n x n`` array whose row ``j`` is ``d_j``."""
        D = np.ones((self.n, self.n))
        j, k = np.divmod(self._col_keys, self.n)
        D[j, k] = np.clip(1.0 - self._col_mass, 0.0, 1.0)
        return D

    def to_dense_tensor(self):
        """Dense ``T[i, j, k] = Q_j[i, k]``; for small ``n`` only."""
        T = np.zeros((self.n, self.n, self.n))
        T[self.rows, self.slice_index, self.cols] = self.vals
        return T

    def dense_stochastic_slices(self):
        """Dense dangling-corrected ``P_j = Q_j + e d_j^T / n``, shape ``(n, n, n)`` indexed ``[j]``."""
        T = self.to_dense_tensor()
        P = np.transpose(T, (1, 0, 2)).copy()
        D = self.deficit_matrix()
        P += D[:, None, :] / self.n
        return P

    def equals(self, other):
        return (
            isinstance(other, SliceSet)
            and self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.slice_index, other.slice_index)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    def __repr__(self):
        return f"SliceSet(n={self.n}, nnz={self.nnz})"
