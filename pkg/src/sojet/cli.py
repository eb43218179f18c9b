"""Command-line entry point: ``sojet solve | bench | figures | problems``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .exceptions import SojetError
from .testbed import get_problem, list_problems


def _solve(args) -> int:
    problem = get_problem(args.problem, args.n)
    common = {"eps_init": args.eps_init, "kappa_eps": args.kappa_eps,
              "eps_min": args.eps_min, "seed": args.seed}
    if args.method == "sojet":
        over = dict(common, tau_init=args.tau_init, c=args.c, kappa_tau=args.kappa_tau,
                    max_outer_iters=args.max_iters, w_cap=args.w_cap)
    else:
        ignored = [k for k in ("tau_init", "c", "kappa_tau", "w_cap")
                   if getattr(args, k) is not None]
        if ignored:
            logging.warning("options not used by gs: %s", ", ".join(ignored))
        over = dict(common, max_iters=args.max_iters)
    over = {k: v for k, v in over.items() if v is not None}
    params = bench.make_params(args.method, args.seed or 0, over)
    rec = bench.run_method(problem, args.method, params)
    if args.trace:
        rec.write_trace(args.trace)
    c = rec.counters
    print(f"problem      {problem.name} (n={problem.n})")
    print(f"method       {args.method}")
    print(f"termination  {rec.termination.value}")
    print(f"final_f      {bench.fmt(rec.final_f)}")
    if problem.f_star is not None:
        print(f"f_star       {bench.fmt(problem.f_star)}")
    print(f"iterations   {len(rec.iterates)}")
    print(f"n_f={c.n_f} n_grad={c.n_grad} n_hess={c.n_hess}")
    if rec.violations:
        print(f"runtime check violations: {len(rec.violations)}")
    return 0


def _bench(args) -> int:
    cfg = bench.BenchConfig.from_json(args.config) if args.config else bench.BenchConfig()
    cfg.jobs = args.jobs
    cfg.timing = args.timing
    report = bench.run_benchmark(cfg)
    bench.write_results_csv(report.results, args.out)
    if args.profile:
        ok = [r for r in report.results if r.termination != bench.ERROR_STATUS]
        if ok:
            bench.write_profile_csv(bench.performance_profile(ok, args.threshold), args.profile)
    for problem, method, msg in report.errors:
        print(f"error: {problem}/{method}: {msg}", file=sys.stderr)
    print(f"{len(report.results)} cells, {len(report.errors)} failed -> {args.out}")
    return 1 if report.errors else 0


def _figures(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves, minima = bench.model_comparison_data()
    bench.write_curves_csv(curves, minima, out / "models_example.csv",
                           out / "models_example_minima.csv")
    curves, minima = bench.jet_refinement_data()
    bench.write_curves_csv(curves, minima, out / "jet_refinement.csv",
                           out / "jet_refinement_minima.csv")
    print(f"plot data written to {out}")
    return 0


def _problems(args) -> int:
    print(f"{'name':<20} {'min_n':>5}  {'convex':<6}  f_star")
    for name, min_n, convex, f_star in list_problems():
        print(f"{name:<20} {min_n:>5}  {str(convex):<6}  {f_star}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sojet", description="Second-order jet descent toolkit")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one method on one problem")
    s.add_argument("--problem", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--method", choices=bench.METHODS, default="sojet")
    for flag in ("--eps-init", "--tau-init", "--c", "--kappa-eps", "--kappa-tau", "--eps-min"):
        s.add_argument(flag, type=float)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--w-cap", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--trace", metavar="PATH.json")
    s.set_defaults(func=_solve)

    b = sub.add_parser("bench", help="run the benchmark and write CSV tables")
    b.add_argument("--config", metavar="PATH.json")
    b.add_argument("--out", default="results.csv")
    b.add_argument("--profile", metavar="profile.csv")
    b.add_argument("--threshold", type=float, default=1e-4)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--timing", action="store_true",
                   help="record wall time (results.csv is then no longer reproducible)")
    b.set_defaults(func=_bench)

    f = sub.add_parser("figures", help="write plot data for the 1-D model illustrations")
    f.add_argument("--out-dir", default="figures")
    f.set_defaults(func=_figures)

    p = sub.add_parser("problems", help="show the test-problem registry")
    p.add_argument("--list", action="store_true", default=True)
    p.set_defaults(func=_problems)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SojetError, ValueError, OSError) as exc:
        print(f"sojet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
