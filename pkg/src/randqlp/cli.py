"""Command-line harness: generate test matrices, run decompositions,
verify error bounds, and time algorithms.

Exit codes: 0 success, 1 runtime/numerical error, 2 usage error. Defaults
for --threads and --mem-cap can be overridden with the RANDQLP_THREADS and
RANDQLP_MEM_CAP environment variables.
"""

import argparse
import concurrent.futures
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import bounds as bounds_mod
from . import matio
from .decompositions import flops_cpqr, flops_rand_qlp, pivoted_qlp, rand_qlp
from .errors import (
    CapacityError,
    ContractError,
    ConvergenceError,
    NonFiniteError,
    NotApplicableError,
    ParameterError,
    ParseError,
    ShapeError,
    SingularSketchError,
)
from .kernels import cpqr, jacobi_svd
from .matgen import SpectrumSpec, build, matrix_market_read
from .metrics import sv_compare, write_sv_comparison_csv
from .rng import GaussianStream, gaussian_matrix

ENV_PREFIX = "RANDQLP_"
ALGORITHMS = ("randqlp", "pqlp", "cpqr", "svd")

_USAGE_ERRORS = (ParameterError, NotApplicableError)
_RUNTIME_ERRORS = (
    ShapeError,
    NonFiniteError,
    ContractError,
    ConvergenceError,
    SingularSketchError,
    ParseError,
    CapacityError,
    OSError,
)


def _env_default(name, fallback, cast=int):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise ParameterError(f"bad value for {ENV_PREFIX}{name}: {raw!r}") from None


def _parse_seeds(text):
    """Seed list syntax: '7', '1,2,5', or an inclusive range '0..19'."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ParameterError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(tok) for tok in text.split(",") if tok]


def _parse_algs(text):
    algs = [tok.strip() for tok in text.split(",") if tok.strip()]
    for alg in algs:
        if alg not in ALGORITHMS:
            raise ParameterError(
                f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}"
            )
    if not algs:
        raise ParameterError("no algorithms requested")
    return algs


def _load_matrix(path, mem_cap):
    path = str(path)
    if path.endswith((".mtx", ".mm")):
        return matrix_market_read(path, mem_cap=mem_cap)
    return matio.read_matrix(path, mem_cap=mem_cap)


def _prepare_out(out_dir, force, names):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not force:
        clashes = [str(out / n) for n in names if (out / n).exists()]
        if clashes:
            raise ParameterError(
                "refusing to overwrite existing files (use --force): "
                + ", ".join(clashes)
            )
    return out


def _write_sigma_csv(path, sigma):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "sigma"])
        for i, s in enumerate(sigma):
            writer.writerow([i + 1, repr(float(s))])


def cmd_gen(args):
    spec = SpectrumSpec.from_json(Path(args.spec).read_text())
    out = _prepare_out(args.out, args.force, ["matrix.rqlp", "sigma.csv", "spec.json"])
    tm = build(spec, args.seed)
    matio.write_matrix(out / "matrix.rqlp", tm.a)
    _write_sigma_csv(out / "sigma.csv", tm.sigma_true)
    payload = spec.to_dict()
    payload["seed"] = args.seed
    (out / "spec.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {out / 'matrix.rqlp'} ({spec.n}x{spec.n})")
    return 0


def _run_algorithm(alg, a, seed):
    if alg == "randqlp":
        f = rand_qlp(a, GaussianStream(seed))
        return {"q": f.q, "l": f.l, "p": f.p}, f.diag_estimates(), f.reconstruct()
    if alg == "pqlp":
        f = pivoted_qlp(a)
        return {"q": f.q, "l": f.l, "p": f.p}, f.diag_estimates(), f.reconstruct()
    if alg == "cpqr":
        f = cpqr(a)
        recon = np.empty_like(a)
        recon[:, f.perm] = f.q @ f.r
        return (
            {"q": f.q, "r": f.r},
            np.sort(np.abs(np.diag(f.r)))[::-1],
            recon,
        )
    f = jacobi_svd(a)
    return {"u": f.u, "v": f.v}, f.sigma.copy(), f.reconstruct()


def cmd_decompose(args):
    algs = _parse_algs(args.algs)
    a = _load_matrix(args.input, args.mem_cap)
    out = _prepare_out(
        args.out,
        args.force,
        list(algs) + ["residuals.json", "timings.json", "sv_compare.csv"],
    )
    norm_a = np.linalg.norm(a)
    timings = {}
    residuals = {}
    estimates = {}
    for alg in algs:
        t0 = time.perf_counter()
        factors, diag, recon = _run_algorithm(alg, a, args.seed)
        timings[alg] = time.perf_counter() - t0
        alg_dir = out / alg
        alg_dir.mkdir(exist_ok=True)
        for name, mat in factors.items():
            matio.write_matrix(alg_dir / f"{name}.rqlp", mat)
        _write_sigma_csv(alg_dir / "diag.csv", diag)
        estimates[alg] = diag
        residual = np.linalg.norm(a - recon) / norm_a if norm_a > 0 else 0.0
        residuals[alg] = residual
        print(f"{alg}: residual {residual:.3e}  ({timings[alg]:.3f}s)")
    if "svd" in estimates and len(estimates) > 1:
        rows = sv_compare(
            estimates["svd"],
            [(alg, d) for alg, d in estimates.items() if alg != "svd"],
        )
        write_sv_comparison_csv(rows, out / "sv_compare.csv")
    (out / "residuals.json").write_text(json.dumps(residuals, indent=2) + "\n")
    (out / "timings.json").write_text(json.dumps(timings, indent=2) + "\n")
    return 0


def _bounds_for_seed(a, oracle, k, seed):
    f = rand_qlp(a, GaussianStream(seed))
    report = bounds_mod.evaluate_bounds(a, f, oracle, k)
    return report


def cmd_bounds(args):
    spec = SpectrumSpec.from_json(Path(args.spec).read_text())
    if args.k is None:
        args.k = spec.k
    if args.k is None or not 1 <= args.k < spec.n:
        raise ParameterError(f"k must satisfy 1 <= k < {spec.n}, got {args.k}")
    seeds = _parse_seeds(args.seeds)
    if not seeds:
        raise ParameterError("at least one seed is required")
    out = _prepare_out(args.out, args.force, ["summary.json"])
    tm = build(spec, args.matrix_seed)
    oracle = tm.construction_factors() if tm.is_exact else jacobi_svd(tm.a)

    def run(seed):
        return seed, _bounds_for_seed(tm.a, oracle, args.k, seed)

    # total concurrency stays within --threads: the worker pool provides the
    # parallelism and the BLAS pools are capped to the remainder
    results, errors = {}, {}
    workers = max(1, min(args.threads, len(seeds)))
    with threadpool_limits(max(1, args.threads // workers)):
        if workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(run, seed): seed for seed in seeds}
                for fut in concurrent.futures.as_completed(futures):
                    seed = futures[fut]
                    try:
                        results[seed] = fut.result()[1]
                    except SingularSketchError as exc:
                        errors[seed] = str(exc)
        else:
            for seed in seeds:
                try:
                    results[seed] = run(seed)[1]
                except SingularSketchError as exc:
                    errors[seed] = str(exc)

    violation_count = 0
    for seed in sorted(results):
        report = results[seed]
        payload = report.to_dict()
        payload["seed"] = seed
        payload["violations"] = report.violations()
        violation_count += len(payload["violations"])
        (out / f"bound_report_{seed}.json").write_text(
            json.dumps(payload, indent=2) + "\n"
        )
    summary = {
        "spec": spec.to_dict(),
        "matrix_seed": args.matrix_seed,
        "k": args.k,
        "seeds": seeds,
        "reports": len(results),
        "violations": violation_count,
        "errors": {str(seed): msg for seed, msg in sorted(errors.items())},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{len(results)} reports, {violation_count} violations, {len(errors)} errors")
    return 0


_FLOPS_MODELS = {"randqlp": flops_rand_qlp, "cpqr": flops_cpqr}


def cmd_bench(args):
    algs = _parse_algs(args.algs)
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    if not sizes or any(n < 2 for n in sizes):
        raise ParameterError(f"bad size list {args.sizes!r}")
    if args.repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {args.repeats}")
    matrices = {n: gaussian_matrix(GaussianStream(args.seed), n, n) for n in sizes}
    samples = {(n, alg): [] for n in sizes for alg in algs}
    with threadpool_limits(args.threads):
        for n in sizes:
            for alg in algs:
                _run_algorithm(alg, matrices[n], args.seed)  # warm-up
        # interleave rounds so background load spreads over all cells
        # instead of biasing one size
        for _ in range(args.repeats):
            for n in sizes:
                for alg in algs:
                    t0 = time.perf_counter()
                    _run_algorithm(alg, matrices[n], args.seed)
                    samples[(n, alg)].append(time.perf_counter() - t0)
    reduce = np.median if args.stat == "median" else np.min
    rows = []
    for n in sizes:
        for alg in algs:
            seconds = float(reduce(samples[(n, alg)]))
            model = _FLOPS_MODELS.get(alg)
            rows.append((n, alg, seconds, model(n, n) if model else ""))
            print(f"n={n:5d} {alg:8s} {seconds:.4f}s")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "alg", "seconds", "flops_model"])
            writer.writerows(rows)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="randqlp",
        description="Randomized QLP decomposition toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic matrix with ground truth")
    p.add_argument("--spec", required=True, help="path to a spectrum spec JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="factor a matrix with the selected algorithms")
    p.add_argument("--input", required=True, help="matrix file (.rqlp or .mtx)")
    p.add_argument("--algs", default="randqlp,pqlp,cpqr,svd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument(
        "--mem-cap",
        type=int,
        default=_env_default("MEM_CAP", 2 * 1024**3),
        help="input size cap in bytes",
    )
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bounds", help="verify the error bounds over a seed sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--matrix-seed", type=int, default=0)
    p.add_argument("--seeds", default="0", help="'7', '1,2,5', or '0..19'")
    p.add_argument("--k", type=int, default=None, help="split index (default: spec k)")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--threads", type=int, default=_env_default("THREADS", 1))
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bench", help="median wall time per algorithm and size")
    p.add_argument("--sizes", default="200,400,800")
    p.add_argument("--algs", default="randqlp,cpqr")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument(
        "--threads",
        type=int,
        default=_env_default("THREADS", os.cpu_count() or 1),
    )
    p.add_argument(
        "--stat",
        choices=("median", "min"),
        default="median",
        help="reduction over the repeats; min resists timeslice stealing "
        "on shared machines",
    )
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
