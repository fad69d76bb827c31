"""Which columns carry the most PageRank?

Partial updating stops recomputing all but the highest-ranked columns. This
script checks that the top ten columns it reports agree with the full
methods and with the exact solution ranked under the same spike/background
split.
"""

import hopr

n = 1000
beta = 1.0 / n**3
problem = hopr.HoprProblem(hopr.gen_synthetic(n, 1e-6, seed=0), alpha=0.85)
X, _ = hopr.power_method(problem, tol=1e-12, max_iter=500)

tables = {"power": hopr.top_k(hopr.split_pagerank_values(X, beta), 10) + 1}
for name, solver in [("tpm-v", hopr.tpm_variant), ("tpm-pu", hopr.tpm_partial),
                     ("spm", hopr.spm), ("spm-pu", hopr.spm_partial)]:
    approx, rep = solver(problem, beta=beta)
    tables[name] = hopr.top_k(hopr.pagerank_values(approx), 10) + 1
    if name.endswith("-pu"):
        print(f"{name}: active columns per iteration {rep.active_columns_history}")

print()
print("rank " + " ".join(f"{k:>7s}" for k in tables))
for r in range(10):
    print(f"{r + 1:4d} " + " ".join(f"{t[r]:7d}" for t in tables.values()))
