"""From hyperlinks with anchor terms to a second-order chain.

A tiny web of five pages. Each triple (i, j, s) says page i links to page j
through anchor term s. The slices Q_j give the chance of leaving page j for
page i given that the surfer arrived at j from page k.
"""

import tempfile
from pathlib import Path

import numpy as np

import hopr

triples = {
    (1, 2, 1), (1, 3, 2), (2, 3, 1), (2, 4, 1), (3, 1, 2),
    (3, 5, 1), (4, 2, 2), (4, 5, 2), (5, 1, 1), (5, 3, 2),
}
with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "links.txt"
    hopr.save_triples(path, 5, 2, triples)
    n, m, loaded = hopr.load_triples(path)

slices = hopr.build_slice_set(n, m, loaded)
print(slices)
for j in range(n):
    print(f"page {j + 1}: dangling previous pages {np.flatnonzero(slices.deficit(j) == 1) + 1}")

problem = hopr.HoprProblem(slices, alpha=0.85)
X, rep = hopr.power_method(problem, tol=1e-12)
print(f"\nstationary matrix after {rep.iterations} iterations (row = now, column = before):")
print(np.array2string(X, precision=4, suppress_small=True))
print("page importance (column sums):", np.round(X.sum(axis=0), 4))
