"""Text file formats, link-tensor ingestion and synthetic slice generation.

All files are plain text with 1-based indices and a versioned magic line:

slice set::

    %%HOPR-SLICES 1
    n nnz
    i j k v          # Q_j(i, k) = v, v in (0, 1]

link triples::

    %%HOPR-TRIPLES 1
    n m nnz
    i j s            # page i links to page j via anchor term s

result::

    %%HOPR-RESULT 1
    n nnz_S
    i j v            # nnz_S spike lines
    j u              # n background lines
    key=value        # metadata
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InvalidInputError
from .operators import IterationReport
from .sparse_core import SliceSet, SparseColMatrix
from .truncated_pm import SparseUniformApprox

__all__ = [
    "SLICES_MAGIC",
    "TRIPLES_MAGIC",
    "RESULT_MAGIC",
    "ResultRecord",
    "load_triples",
    "save_triples",
    "build_slice_set",
    "gen_synthetic",
    "save_slice_set",
    "load_slice_set",
    "save_result",
    "load_result",
]

SLICES_MAGIC = "%%HOPR-SLICES"
TRIPLES_MAGIC = "%%HOPR-TRIPLES"
RESULT_MAGIC = "%%HOPR-RESULT"
VERSION = 1


def _lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def _expect_magic(it, magic):
    try:
        lineno, line = next(it)
    except StopIteration:
        raise FormatError("empty file") from None
    parts = line.split()
    if not parts or parts[0] != magic:
        raise FormatError(f"bad magic {line!r}, expected {magic!r}", lineno)
    if len(parts) != 2 or parts[1] != str(VERSION):
        raise FormatError(f"unsupported version in {line!r}", lineno)


def _ints(line, count, lineno):
    parts = line.split()
    if len(parts) != count:
        raise FormatError(f"expected {count} fields, got {len(parts)}", lineno)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise FormatError(f"expected integers in {line!r}", lineno) from None


def _float(text, lineno):
    try:
        val = float(text)
    except ValueError:
        raise FormatError(f"cannot parse number {text!r}", lineno) from None
    if not math.isfinite(val):
        raise FormatError(f"non-finite value {text!r}", lineno)
    if val < 0:
        raise FormatError(f"negative value {text!r}", lineno)
    return val


def _header(it, count, what):
    try:
        lineno, line = next(it)
    except StopIteration:
        raise FormatError(f"missing {what} header") from None
    vals = _ints(line, count, lineno)
    if any(x < 0 for x in vals):
        raise FormatError("negative count in header", lineno)
    return vals


# ---------------------------------------------------------------------------
# link triples


def load_triples(path):
    """Read a link-triples file; returns ``(n, m, triples)`` with 1-based triples.

    Duplicate lines collapse to a single triple.
    """
    it = _lines(path)
    _expect_magic(it, TRIPLES_MAGIC)
    n, m, nnz = _header(it, 3, "n m nnz")
    triples = set()
    seen = 0
    for lineno, line in it:
        if seen == nnz:
            raise FormatError(f"more than the declared {nnz} triples", lineno)
        i, j, s = _ints(line, 3, lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise FormatError(f"page index out of range 1..{n}", lineno)
        if not 1 <= s <= m:
            raise FormatError(f"anchor index out of range 1..{m}", lineno)
        triples.add((i, j, s))
        seen += 1
    if seen != nnz:
        raise FormatError(f"declared {nnz} triples, found {seen}")
    return n, m, triples


def save_triples(path, n, m, triples):
    triples = sorted(set(triples))
    with open(path, "w") as fh:
        fh.write(f"{TRIPLES_MAGIC} {VERSION}\n{n} {m} {len(triples)}\n")
        for i, j, s in triples:
            fh.write(f"{i} {j} {s}\n")


def _expand_join(left_key, right_key):
    """All index pairs ``(a, b)`` with ``left_key[a] == right_key[b]``."""
    order_r = np.argsort(right_key, kind="stable")
    rk = right_key[order_r]
    lo = np.searchsorted(rk, left_key, side="left")
    hi = np.searchsorted(rk, left_key, side="right")
    cnt = hi - lo
    total = int(cnt.sum())
    a = np.repeat(np.arange(left_key.size), cnt)
    offs = np.cumsum(cnt) - cnt
    b = order_r[np.repeat(lo - offs, cnt) + np.arange(total)]
    return a, b


def build_slice_set(n, m, triples):
    """Second-order slices ``Q_j = U_j W_j`` from binary link triples.

    With ``A(a, b, s) = 1`` when page ``a`` links to ``b`` through anchor ``s``::

        U_j(i, s) = A(j, i, s) / sum_i A(j, i, s)
        W_j(s, k) = A(k, j, s) / sum_s A(k, j, s)

    (zero when the denominator vanishes). ``Q_j(i, k)`` is then the chance of
    moving to ``i`` from ``j`` having arrived at ``j`` from ``k``.
    """
    arr = np.array(sorted(set(triples)), dtype=np.int64).reshape(-1, 3)
    if arr.size and (arr[:, :2].min() < 1 or arr[:, :2].max() > n
                     or arr[:, 2].min() < 1 or arr[:, 2].max() > m):
        raise InvalidInputError("triple index out of range")
    if arr.size == 0:
        return SliceSet.empty(n)
    a, b, s = arr[:, 0] - 1, arr[:, 1] - 1, arr[:, 2] - 1

    # U: page j = a, entry (i = b, s); normalised over targets of (a, s)
    key_as = a * m + s
    _, inv, cnt = np.unique(key_as, return_inverse=True, return_counts=True)
    u_val = 1.0 / cnt[inv]
    # W: page j = b, entry (s, k = a); normalised over anchors of (a, b)
    key_ab = a * n + b
    _, inv, cnt = np.unique(key_ab, return_inverse=True, return_counts=True)
    w_val = 1.0 / cnt[inv]

    # Q_j(i, k) = sum_s U_j(i, s) W_j(s, k): join U and W entries on (j, s)
    u_key = a * m + s            # U entry belongs to slice a
    w_key = b * m + s            # W entry belongs to slice b
    iu, iw = _expand_join(u_key, w_key)
    j = a[iu]
    i = b[iu]
    k = a[iw]
    vals = u_val[iu] * w_val[iw]
    return SliceSet(n, i, j, k, vals)


def gen_synthetic(n, sparsity, seed):
    """Random slices: ``ceil(sparsity * n**3)`` uniform(0, 1] entries at distinct positions.

    Positions are uniform over the ``n x n**2`` matrix ``[Q_0 .. Q_{n-1}]``.
    Columns whose mass exceeds one are rescaled to mass one, all others are
    left as drawn (substochastic, often dangling).
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if not 0.0 < sparsity <= 1.0:
        raise InvalidInputError(f"sparsity must lie in (0, 1], got {sparsity!r}")
    total = n**3
    nnz = min(total, int(math.ceil(sparsity * total - 1e-9)))
    rng = np.random.default_rng(seed)
    pos = np.sort(rng.choice(total, size=nnz, replace=False))
    vals = 1.0 - rng.random(nnz)
    i, col = np.divmod(pos, n * n)
    j, k = np.divmod(col, n)
    # rescale over-full columns before SliceSet validation
    _, inv = np.unique(j * n + k, return_inverse=True)
    mass = np.bincount(inv, weights=vals)
    vals = vals / np.maximum(mass[inv], 1.0)
    return SliceSet(n, i, j, k, vals)


# ---------------------------------------------------------------------------
# slice sets


def save_slice_set(path, slices):
    with open(path, "w") as fh:
        fh.write(f"{SLICES_MAGIC} {VERSION}\n{slices.n} {slices.nnz}\n")
        for i, j, k, v in zip((slices.rows + 1).tolist(), (slices.slice_index + 1).tolist(),
                              (slices.cols + 1).tolist(), slices.vals.tolist()):
            fh.write(f"{i} {j} {k} {v!r}\n")


def load_slice_set(path):
    it = _lines(path)
    _expect_magic(it, SLICES_MAGIC)
    n, nnz = _header(it, 2, "n nnz")
    if n < 1:
        raise FormatError("n must be at least 1", 2)
    rows = np.empty(nnz, dtype=np.int64)
    sl = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    seen = set()
    t = 0
    for lineno, line in it:
        if t == nnz:
            raise FormatError(f"more than the declared {nnz} entries", lineno)
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"expected 4 fields, got {len(parts)}", lineno)
        i, j, k = _ints(" ".join(parts[:3]), 3, lineno)
        if not all(1 <= x <= n for x in (i, j, k)):
            raise FormatError(f"index out of range 1..{n}", lineno)
        v = _float(parts[3], lineno)
        if not 0.0 < v <= 1.0:
            raise FormatError(f"value {v!r} outside (0, 1]", lineno)
        if (i, j, k) in seen:
            raise FormatError(f"duplicate entry ({i}, {j}, {k})", lineno)
        seen.add((i, j, k))
        rows[t], sl[t], cols[t], vals[t] = i - 1, j - 1, k - 1, v
        t += 1
    if t != nnz:
        raise FormatError(f"declared {nnz} entries, found {t}")
    try:
        return SliceSet(n, rows, sl, cols, vals)
    except InvalidInputError as exc:
        raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# results


@dataclass
class ResultRecord:
    """A solver result as stored on disk."""

    approx: SparseUniformApprox
    report: IterationReport
    meta: dict = field(default_factory=dict)


def _body_lines(approx):
    coo = approx.S.csc.tocoo()
    order = np.lexsort((coo.row, coo.col))
    lines = [f"{approx.n} {coo.nnz}"]
    lines += [f"{i + 1} {j + 1} {v!r}" for i, j, v in
              zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist())]
    lines += [f"{j + 1} {u!r}" for j, u in enumerate(approx.u.tolist())]
    return lines


def save_result(path, approx, report, **meta):
    """Write ``approx`` and the report; extra keyword metadata is stored verbatim."""
    body = _body_lines(approx)
    digest = hashlib.sha256("\n".join(body).encode()).hexdigest()
    info = {
        "method": report.method,
        "iterations": report.iterations,
        "converged": int(report.converged),
        "residual": repr(report.final_residual),
        "wall_time_s": repr(report.wall_time),
    }
    if report.final_sparsity is not None:
        info["sparsity"] = repr(report.final_sparsity)
    info["residual_history"] = ",".join(repr(r) for r in report.residual_history)
    info["active_columns_history"] = ",".join(str(c) for c in report.active_columns_history)
    for k, v in meta.items():
        if v is not None:
            info[k] = v
    info["checksum"] = digest
    with open(path, "w") as fh:
        fh.write(f"{RESULT_MAGIC} {VERSION}\n")
        fh.write("\n".join(body))
        fh.write("\n")
        for k, v in info.items():
            fh.write(f"{k}={v}\n")


def load_result(path):
    it = _lines(path)
    _expect_magic(it, RESULT_MAGIC)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise FormatError("missing n nnz_S header") from None
    n, nnz = _ints(header, 2, lineno)
    if n < 1 or nnz < 0:
        raise FormatError("bad result header", lineno)
    body = [header]
    rows, cols, vals = [], [], []
    for _ in range(nnz):
        lineno, line = _next(it)
        parts = line.split()
        if len(parts) != 3:
            raise FormatError("expected 'i j v'", lineno)
        i, j = _ints(" ".join(parts[:2]), 2, lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise FormatError("index out of range", lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(_float(parts[2], lineno))
        body.append(line)
    u = np.empty(n)
    for t in range(n):
        lineno, line = _next(it)
        parts = line.split()
        if len(parts) != 2 or _ints(parts[0], 1, lineno)[0] != t + 1:
            raise FormatError(f"expected background line for column {t + 1}", lineno)
        u[t] = _float(parts[1], lineno)
        body.append(line)
    meta = {}
    for lineno, line in it:
        key, sep, val = line.partition("=")
        if not sep:
            raise FormatError(f"expected key=value, got {line!r}", lineno)
        meta[key.strip()] = val.strip()
    if "checksum" in meta:
        if hashlib.sha256("\n".join(body).encode()).hexdigest() != meta["checksum"]:
            raise FormatError("checksum mismatch")

    S = SparseColMatrix.from_triplets(rows, cols, vals, (n, n))
    approx = SparseUniformApprox(S, u)
    report = IterationReport(
        method=meta.get("method", ""),
        iterations=int(meta.get("iterations", 0)),
        converged=meta.get("converged", "0") == "1",
        wall_time=float(meta.get("wall_time_s", "0")),
    )
    if meta.get("residual_history"):
        report.residual_history = [float(x) for x in meta["residual_history"].split(",")]
    elif "residual" in meta:
        report.residual_history = [float(meta["residual"])]
    if meta.get("active_columns_history"):
        report.active_columns_history = [int(x) for x in meta["active_columns_history"].split(",")]
    if "sparsity" in meta:
        report.final_sparsity = float(meta["sparsity"])
    return ResultRecord(approx, report, meta)


def _next(it):
    try:
        return next(it)
    except StopIteration:
        raise FormatError("unexpected end of file") from None
