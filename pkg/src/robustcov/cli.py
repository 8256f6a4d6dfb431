"""Command-line surface: estimation on CSV data, simulation sweeps,
sparse-supremum diagnostics, and contamination lower bounds.

Exit codes: 0 success, 2 input/config error, 3 degenerate-data error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from collections import defaultdict
from pathlib import Path
from statistics import median

import numpy as np

from . import dataio, svgplot
from .covp4 import FitParams, P4Config, ScaleInfo, estimate_cov_p4
from .covpgt4 import Pgt4Config, estimate_cov_pgt4
from .diagnostics import f_stat_bruteforce, f_stat_greedy, peaky_spread_decompose
from .directions import seed_directions
from .errors import DegenerateSampleError, RobustCovError
from .linalg import effective_rank, op_norm, sample_covariance
from .opnorm import DirectionParams
from .scalars import (
    epsilon_lower_bound,
    fourpoint_epsilon_reference,
    fourpoint_y1,
)
from .simulate import run_experiment, records_to_csv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="robustcov")
    sub = top.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="robust covariance estimate from a sample CSV")
    est.add_argument("input", help="sample CSV (N rows, d columns)")
    regime = est.add_mutually_exclusive_group()
    regime.add_argument("--p4", action="store_true", help="p = 4 estimator (default)")
    regime.add_argument("--pgt4", action="store_true", help="p > 4 estimator")
    est.add_argument("--eta", type=float, default=0.0)
    est.add_argument("--delta", type=float, default=0.1)
    est.add_argument("--kappa", type=float, default=1.5, help="kappa(4) or kappa(p)")
    est.add_argument("--p", type=float, default=6.0, help="moment order for --pgt4")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--oracle-scale", metavar="FILE", help="matrix CSV giving the true Sigma scale")
    est.add_argument("--center", action="store_true", help="subtract column means first")
    est.add_argument("--jitter", type=float, default=0.0, metavar="SIGMA",
                     help="add N(0, SIGMA^2) noise to every row (seeded)")
    est.add_argument("--lambda-override", type=float, default=None)
    est.add_argument("--budget", type=int, default=None)
    est.add_argument("--refine-steps", type=int, default=50)
    est.add_argument("--out", default=None, help="output matrix CSV (default stdout)")

    sim = sub.add_parser("simulate", help="Monte Carlo sweep from a config file")
    sim.add_argument("config")
    sim.add_argument("--out", default=None, help="override the config's output path")
    sim.add_argument("--plot", action="store_true", help="emit SVG median-error plots")
    sim.add_argument("--timings", action="store_true",
                     help="append a wall_time column (breaks byte determinism)")

    low = sub.add_parser("lowerbound", help="contamination lower bound epsilon(X, eta)")
    src = low.add_mutually_exclusive_group()
    src.add_argument("--fourpoint", action="store_true",
                     help="builtin heavy-tailed four-point law (default)")
    src.add_argument("--atoms", metavar="FILE", help="CSV of (value, prob) atoms")
    low.add_argument("--eta", default="0.01,0.04,0.16", help="comma-separated eta list")

    diag = sub.add_parser("diagnose", help="sparse-supremum and peaky/spread diagnostics")
    diag.add_argument("input", help="sample CSV")
    diag.add_argument("--kmax", type=int, default=3)
    diag.add_argument("--lambdas", default="0.01,0.1,1.0")
    diag.add_argument("--ref", default=None, help="reference matrix CSV (default: sample covariance)")
    diag.add_argument("--budget", type=int, default=64)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--out", default=None, help="output prefix (default stdout)")
    return top


def _cmd_estimate(args) -> int:
    path = Path(args.input)
    if not path.exists():
        print(f"error: input file {path} not found", file=sys.stderr)
        return EXIT_INPUT
    X = dataio.load_sample(path)
    if args.center:
        X = X - X.mean(axis=0, keepdims=True)
    if args.jitter > 0.0:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((args.seed, 77))))
        X = X + args.jitter * rng.standard_normal(X.shape)

    scale = None
    if args.oracle_scale:
        scale = ScaleInfo.from_matrix(dataio.load_matrix(args.oracle_scale))
    ds = DirectionParams(budget=args.budget, refine_steps=args.refine_steps)
    fit = FitParams()

    if args.pgt4:
        cfg = Pgt4Config(
            eta=args.eta, delta=args.delta, p=args.p, kappa_p=max(args.kappa, 1.0),
            scale=scale, fit=fit, ds=ds, seed=args.seed,
        )
        res = estimate_cov_pgt4(X, cfg)
        matrix = res.matrix
        level = res.levels[-1] if res.levels else None
        residual = level.residual if level is not None else 0.0
        summary = (
            f"regime=pgt4 residual={residual:.6g} feasible={str(res.feasible).lower()} "
            f"Q={res.selected_Q:.6g} eps={res.eps:.6g} effective_rank={_effrank(matrix)}"
        )
    else:
        cfg = P4Config(
            eta=args.eta, delta=args.delta, kappa4=max(args.kappa, 1.0),
            fit=fit, ds=ds, seed=args.seed,
        )
        res = estimate_cov_p4(X, cfg, lambda_override=args.lambda_override,
                              scale_override=scale)
        matrix = res.matrix
        residual = res.fit.residual if res.fit is not None else 0.0
        summary = (
            f"regime=p4 residual={residual:.6g} feasible={str(res.feasible).lower()} "
            f"lambda={res.lam:.6g} effective_rank={_effrank(matrix)}"
        )

    payload = dataio.format_rows(matrix)
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)
    print(summary)
    return EXIT_OK


def _effrank(matrix: np.ndarray) -> str:
    try:
        return f"{effective_rank(matrix):.4g}"
    except RobustCovError:
        return "nan"


def _cmd_simulate(args) -> int:
    cfg = dataio.parse_experiment_config(args.config)
    records = run_experiment(cfg)
    out_path = Path(args.out) if args.out else Path(cfg.output)
    out_path.write_text(records_to_csv(records, with_timing=args.timings))
    print(f"wrote {len(records)} records to {out_path}")
    if args.plot:
        _write_plots(records, cfg, out_path)
    return EXIT_OK


def _write_plots(records, cfg, out_path: Path) -> None:
    ok = [r for r in records if r.status == "ok"]

    def median_series(axis: str):
        series = []
        other = "eta" if axis == "N" else "N"
        for name in cfg.estimators:
            grouped = defaultdict(lambda: defaultdict(list))
            for r in ok:
                if name in r.errors:
                    grouped[getattr(r, other)][getattr(r, axis)].append(r.errors[name])
            for other_val, by_axis in sorted(grouped.items()):
                xs = sorted(by_axis)
                ys = [median(by_axis[x]) for x in xs]
                label = f"{name} ({other}={other_val:g})"
                series.append((label, xs, ys))
        return series

    for axis, fname in (("N", "vs_n"), ("eta", "vs_eta")):
        series = [s for s in median_series(axis) if len(s[1]) >= 2 and min(s[1]) > 0]
        if series:
            target = out_path.with_name(out_path.stem + f"_{fname}.svg")
            svgplot.write_plot(target, series, axis, "median operator-norm error",
                               f"median error vs {axis}")
            print(f"wrote {target}")


def _cmd_lowerbound(args) -> int:
    etas = [float(t) for t in args.eta.split(",") if t.strip()]
    if args.atoms:
        dist = dataio.load_distribution(args.atoms)
        reference = None
    else:
        for eta in etas:
            if not 0.0 < eta <= 0.25:
                print(f"error: builtin four-point law requires 0 < eta <= 1/4, got {eta}",
                      file=sys.stderr)
                return EXIT_INPUT
        dist = None
        reference = fourpoint_epsilon_reference
    print("eta,epsilon,reference,rel_err")
    for eta in etas:
        d = dist if dist is not None else fourpoint_y1(eta)
        eps = epsilon_lower_bound(d, eta)
        if reference is not None:
            ref = reference(eta)
            rel = abs(eps - ref) / ref if ref else 0.0
            print(f"{eta:g},{eps!r},{ref!r},{rel:.3g}")
        else:
            print(f"{eta:g},{eps!r},,")
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    path = Path(args.input)
    if not path.exists():
        print(f"error: input file {path} not found", file=sys.stderr)
        return EXIT_INPUT
    X = dataio.load_sample(path)
    ref = dataio.load_matrix(args.ref) if args.ref else sample_covariance(X)
    lambdas = [float(t) for t in args.lambdas.split(",") if t.strip()]

    f_lines = ["k,f_brute,f_greedy"]
    for k in range(1, args.kmax + 1):
        f_lines.append(f"{k},{f_stat_bruteforce(X, k)!r},{f_stat_greedy(X, k)!r}")

    ds = seed_directions(X, np.zeros((X.shape[1],) * 2), args.budget, args.seed,
                         refine_steps=10)
    d_lines = ["lambda,peaky,spread,total"]
    for lam in lambdas:
        peaky, spread, total = peaky_spread_decompose(X, lam, ref, ds)
        d_lines.append(f"{lam:g},{peaky!r},{spread!r},{total!r}")

    if args.out:
        Path(args.out + "_fstat.csv").write_text("\n".join(f_lines) + "\n")
        Path(args.out + "_decomp.csv").write_text("\n".join(d_lines) + "\n")
        print(f"wrote {args.out}_fstat.csv and {args.out}_decomp.csv")
    else:
        print("\n".join(f_lines))
        print()
        print("\n".join(d_lines))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if args.command == "estimate":
                return _cmd_estimate(args)
            if args.command == "simulate":
                return _cmd_simulate(args)
            if args.command == "lowerbound":
                return _cmd_lowerbound(args)
            return _cmd_diagnose(args)
    except DegenerateSampleError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (RobustCovError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run() -> None:  # console entry point
    sys.exit(main())


if __name__ == "__main__":
    run()
