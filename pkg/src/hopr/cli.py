"""Command line driver: ``hopr {generate,ingest,solve,rank,compare,rho}``.

Exit codes: 0 success, 2 invalid configuration or input, 3 the solver hit
``--max-iter`` before ``--tol`` (the result file is still written).
"""

from __future__ import annotations

import argparse
import re
import sys
import time

import numpy as np

from . import data_io
from .errors import HoprError
from .multilinear import ml_fixed_point, permute_to_flattened, rank_one
from .operators import HoprProblem, power_method
from .sparse_pm import rho_experiment, spm, spm_partial, write_rho_table
from .truncated_pm import (
    SparseUniformApprox,
    ding_approximation,
    pagerank_values,
    random_teleport_matrix,
    relative_error,
    split_pagerank_values,
    top_k,
    tpm_ding,
    tpm_partial,
    tpm_variant,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

METHODS = ("power", "tpm", "tpm-v", "tpm-pu", "spm", "spm-pu", "ml-fp")

_SYMBOLIC_BETA = re.compile(r"^1/n\^(\d+)$")


class _ConfigFailure(Exception):
    pass


def parse_beta(text, n):
    """``"1/n^p"`` or a positive float literal."""
    if text is None:
        return 1.0 / n**3
    m = _SYMBOLIC_BETA.match(text.replace(" ", ""))
    if m:
        return 1.0 / float(n) ** int(m.group(1))
    try:
        beta = float(text)
    except ValueError:
        raise _ConfigFailure(f"cannot parse beta {text!r}; use a number or 1/n^p") from None
    if not np.isfinite(beta) or beta <= 0:
        raise _ConfigFailure(f"beta must be positive, got {text!r}")
    return beta


def _solve(args, slices):
    n = slices.n
    problem = HoprProblem(slices, alpha=args.alpha)
    beta = parse_beta(args.beta, n)
    common = dict(tol=args.tol, max_iter=args.max_iter)
    meta = dict(alpha=repr(args.alpha), seed=args.seed)
    m = args.method
    if m == "power":
        X, report = power_method(problem, threads=args.threads, **common)
        return SparseUniformApprox.from_dense(X), report, meta
    if m == "ml-fp":
        x, report = ml_fixed_point(permute_to_flattened(slices), alpha=args.alpha, **common)
        return SparseUniformApprox.from_dense(rank_one(x)), report, meta

    meta["beta"] = repr(beta)
    threads = dict(threads=args.threads)
    if m == "tpm":
        G = None
        if args.G == "random":
            G = random_teleport_matrix(n, args.g_sparsity, args.seed or 0)
        meta["G"] = args.G
        approx, report = tpm_ding(problem, G=G, beta=beta, **common, **threads)
        return ding_approximation(approx, args.alpha, G=G), report, meta
    if m == "tpm-v":
        approx, report = tpm_variant(problem, beta=beta, **common, **threads)
    elif m == "spm":
        approx, report = spm(problem, beta=beta, **common, **threads)
    else:
        partial = dict(varsigma=args.varsigma, tau=args.tau, ell=args.ell)
        meta.update(tau=repr(args.tau), varsigma=args.varsigma, ell=args.ell)
        solver = tpm_partial if m == "tpm-pu" else spm_partial
        approx, report = solver(problem, beta=beta, **partial, **common, **threads)
    return approx, report, meta


def _print_report(report, n, nnz, load_s, quiet):
    print(f"method            {report.method}")
    print(f"n                 {n}")
    print(f"slice nnz         {nnz}")
    print(f"load time (s)     {load_s!r}")
    print(f"solve time (s)    {report.wall_time!r}")
    print(f"iterations        {report.iterations}")
    print(f"converged         {report.converged}")
    print(f"final residual    {report.final_residual!r}")
    if report.final_sparsity is not None:
        print(f"sparsity of S     {report.final_sparsity!r}")
    for note in report.notes:
        print(f"note              {note}")
    if not quiet:
        print("residual history")
        for q, r in enumerate(report.residual_history, start=1):
            print(f"  {q:4d} {r!r}")
        if report.active_columns_history:
            print("active columns    " + " ".join(map(str, report.active_columns_history)))


def cmd_solve(args):
    if args.tol <= 0 or args.max_iter < 1 or args.threads < 1:
        raise _ConfigFailure("--tol must be positive, --max-iter and --threads at least 1")
    t0 = time.perf_counter()
    slices = data_io.load_slice_set(args.slices)
    load_s = time.perf_counter() - t0
    approx, report, meta = _solve(args, slices)
    data_io.save_result(args.out, approx, report, **meta)
    _print_report(report, slices.n, slices.nnz, load_s, args.quiet)
    if not report.converged:
        print(f"warning: not converged after {report.iterations} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_rank(args):
    rec = data_io.load_result(args.result)
    n = rec.approx.n
    k = args.k
    if k < 1:
        raise _ConfigFailure("k must be at least 1")
    if k > n:
        print(f"warning: k={k} exceeds n={n}; showing all {n}", file=sys.stderr)
        k = n
    if args.beta is not None:
        pv = split_pagerank_values(rec.approx.to_dense(), parse_beta(args.beta, n))
    else:
        pv = pagerank_values(rec.approx)
    print("rank page_id PV")
    for r, j in enumerate(top_k(pv, k), start=1):
        print(f"{r} {j + 1} {float(pv[j])!r}")
    return EXIT_OK


def cmd_compare(args):
    approx = data_io.load_result(args.result).approx
    ref = data_io.load_result(args.reference).approx
    print(repr(relative_error(approx, ref, threads=args.threads)))
    return EXIT_OK


def cmd_generate(args):
    slices = data_io.gen_synthetic(args.n, args.sparsity, args.seed)
    data_io.save_slice_set(args.out, slices)
    print(f"wrote n={slices.n} nnz={slices.nnz} to {args.out}")
    return EXIT_OK


def cmd_ingest(args):
    n, m, triples = data_io.load_triples(args.triples)
    slices = data_io.build_slice_set(n, m, triples)
    data_io.save_slice_set(args.out, slices)
    print(f"wrote n={slices.n} nnz={slices.nnz} from {len(triples)} triples to {args.out}")
    return EXIT_OK


def cmd_rho(args):
    beta = parse_beta(args.beta, args.n)
    rhos = rho_experiment(args.n, args.trials, beta=beta, seed=args.seed, normalize=not args.raw)
    write_rho_table(args.out, rhos)
    print(f"trials {len(rhos)}  max rho {max(rhos)!r}  mean rho {float(np.mean(rhos))!r}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="hopr", description="Second-order PageRank solvers.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="random sparse slice set")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--sparsity", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("ingest", help="link triples to a slice set")
    i.add_argument("triples")
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_ingest)

    s = sub.add_parser("solve", help="run a solver on a slice set")
    s.add_argument("slices")
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--alpha", type=float, default=0.85)
    s.add_argument("--beta", default=None, help="threshold; number or 1/n^2, 1/n^3, 1/n^4 (default 1/n^3)")
    s.add_argument("--tau", type=float, default=0.1)
    s.add_argument("--varsigma", type=int, default=10)
    s.add_argument("--ell", type=int, default=1)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--G", choices=("uniform", "random"), default="uniform",
                   help="teleport matrix for --method tpm")
    s.add_argument("--g-sparsity", type=float, default=1e-3,
                   help="fill of the random G (seeded by --seed)")
    s.add_argument("--quiet", action="store_true", help="omit the residual history")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("rank", help="top-k columns of a result by PageRank value")
    r.add_argument("result")
    r.add_argument("-k", type=int, default=10)
    r.add_argument("--beta", default=None,
                   help="split the stored matrix with this threshold before ranking")
    r.set_defaults(func=cmd_rank)

    c = sub.add_parser("compare", help="relative l1 error of a result against a reference")
    c.add_argument("result")
    c.add_argument("reference")
    c.add_argument("--threads", type=int, default=1)
    c.set_defaults(func=cmd_compare)

    h = sub.add_parser("rho", help="contraction ratios of the threshold on random pairs")
    h.add_argument("--n", type=int, default=200)
    h.add_argument("--trials", type=int, default=2000)
    h.add_argument("--beta", default="1/n^2")
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--raw", action="store_true", help="skip normalizing the draws to unit mass")
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_rho)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (_ConfigFailure, HoprError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
