"""Block-vectorised column kernels shared by every solver.

All higher-order PageRank updates have the form ``column j of the new
iterate = f(Q_j y_j, ||y_j||_1, row j of the old iterate)``. The helpers here
evaluate ``Q_j y_j`` for a block of columns at once from the triplet storage
of a :class:`~hopr.sparse_core.SliceSet`, never touching more than an
``n x block`` dense array.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

# dense elements per working block (n * block_size); about 8 MB of float64
BLOCK_ELEMS = 1 << 20


def column_blocks(cols, n, block_elems=BLOCK_ELEMS):
    cols = np.asarray(cols, dtype=np.int64)
    size = max(1, min(cols.size, block_elems // max(n, 1)))
    return [cols[i:i + size] for i in range(0, cols.size, size)]


def slice_products(slices, cols, yrows):
    """Dense ``n x len(cols)`` array whose column ``p`` is ``Q_{cols[p]} @ yrows[p]``."""
    n = slices.n
    b = cols.size
    starts = slices.slice_ptr[cols]
    lens = slices.slice_ptr[cols + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros((n, b))
    offsets = np.cumsum(lens) - lens
    idx = np.repeat(starts - offsets, lens) + np.arange(total)
    pos = np.repeat(np.arange(b), lens)
    w = slices.vals[idx] * yrows[pos, slices.cols[idx]]
    flat = slices.rows[idx] * b + pos
    return np.bincount(flat, weights=w, minlength=n * b).reshape(n, b)


def map_blocks(func, blocks, threads=1):
    """Apply ``func`` to each block, optionally on a thread pool; order is preserved."""
    if threads is None or threads <= 1 or len(blocks) <= 1:
        return [func(blk) for blk in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, blocks))
