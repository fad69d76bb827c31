"""Compare every solver on one random second-order chain.

Builds a synthetic slice set (n=1000, sparsity 1e-6), solves it exactly with
the dense power method, then runs the truncated and sparse methods and prints
iterations, CPU time, relative error against the exact matrix and the
fraction of stored spikes.
"""

import hopr

n = 1000
problem = hopr.HoprProblem(hopr.gen_synthetic(n, 1e-6, seed=0), alpha=0.85)
X, rep = hopr.power_method(problem, tol=1e-12, max_iter=500)
print(f"exact solution: {rep.iterations} iterations, {rep.wall_time:.3f}s\n")

G = hopr.random_teleport_matrix(n, 1e-3, seed=0)
runs = {
    "tpm (random G)": lambda b: hopr.tpm_ding(problem, G=G, beta=b),
    "tpm-v": lambda b: hopr.tpm_variant(problem, beta=b),
    "tpm-pu": lambda b: hopr.tpm_partial(problem, beta=b),
    "spm": lambda b: hopr.spm(problem, beta=b),
    "spm-pu": lambda b: hopr.spm_partial(problem, beta=b),
}

print(f"{'method':16s} {'beta':>7s} {'iter':>5s} {'cpu (s)':>8s} {'error':>10s} {'sparsity':>10s}")
for p in (2, 3, 4):
    beta = 1.0 / n**p
    for name, run in runs.items():
        approx, r = run(beta)
        if name.startswith("tpm (random"):
            approx = hopr.ding_approximation(approx, problem.alpha, G=G)
        err = hopr.relative_error(approx, X)
        print(f"{name:16s} {'1/n^' + str(p):>7s} {r.iterations:5d} {r.wall_time:8.3f} "
              f"{err:10.2e} {r.final_sparsity:10.2e}")
    print()

# the multilinear rank-one model for reference
x, r = hopr.ml_fixed_point(hopr.permute_to_flattened(problem.slices), alpha=0.85, tol=1e-12)
err = hopr.relative_error(hopr.SparseUniformApprox.from_dense(hopr.rank_one(x)), X)
print(f"multilinear x x^T: {r.iterations} iterations, error {err:.2e}")
