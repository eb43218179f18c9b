"""Benchmark harness: run methods over the problem registry, tabulate results
and build Dolan-More performance profiles."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional

import numpy as np

from .baseline import GSParams, run_gs
from .exceptions import EmptyResults
from .solver import SolverParams, run_descent
from .subproblem import SolveOptions
from .testbed import DEFAULT_SUITE, get_problem

log = logging.getLogger(__name__)

METHODS = ("sojet", "gs")
RESULT_COLUMNS = ("problem", "n", "method", "n_f", "n_grad", "n_hess", "final_f",
                  "accuracy", "wall_time_s", "termination")
PROFILE_COLUMNS = ("ratio_log10", "method", "fraction_solved")
ERROR_STATUS = "Error"


def fmt(x: float) -> str:
    """Float formatting used in every CSV: 17 significant digits."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class BenchResult:
    problem: str
    n: int
    method: str
    n_f: int
    n_grad: int
    n_hess: int
    final_f: float
    accuracy: float
    wall_time: float
    termination: str
    message: str = field(default="", compare=False)

    def row(self) -> list:
        return [self.problem, str(self.n), self.method, str(self.n_f), str(self.n_grad),
                str(self.n_hess), fmt(self.final_f), fmt(self.accuracy),
                fmt(self.wall_time), self.termination]


@dataclass(frozen=True)
class ProfilePoint:
    ratio_log10: float
    method: str
    fraction_solved: float


@dataclass
class BenchConfig:
    problems: list = field(default_factory=lambda: list(DEFAULT_SUITE))
    n: int = 10
    methods: list = field(default_factory=lambda: list(METHODS))
    seed: int = 0
    overrides: dict = field(default_factory=dict)
    jobs: int = 1
    timing: bool = False  # record wall time; off keeps results.csv reproducible

    @classmethod
    def from_dict(cls, d: dict) -> "BenchConfig":
        known = {"problems", "n", "methods", "seed", "overrides"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**{k: v for k, v in d.items()})
        if isinstance(cfg.problems, str):
            cfg.problems = [cfg.problems]
        if isinstance(cfg.methods, str):
            cfg.methods = [cfg.methods]
        cfg.n = int(cfg.n)
        cfg.seed = int(cfg.seed)
        return cfg

    @classmethod
    def from_json(cls, path) -> "BenchConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class BenchReport:
    results: list
    errors: list  # (problem, method, message) for every failed cell

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)


def cell_seed(global_seed: int, problem: str, method: str) -> int:
    """Stable per-cell seed (independent of PYTHONHASHSEED)."""
    key = f"{global_seed}\x00{problem}\x00{method}".encode()
    return int(np.random.SeedSequence([int(global_seed), zlib.crc32(key)]).generate_state(1)[0])


def make_params(method: str, seed: int, overrides: Optional[dict] = None):
    overrides = dict(overrides or {})
    if method == "sojet":
        overrides.setdefault("seed", seed)
        if isinstance(overrides.get("solve"), dict):
            overrides["solve"] = SolveOptions(**overrides["solve"])
        return SolverParams().with_overrides(**overrides)
    if method == "gs":
        overrides.setdefault("seed", seed)
        return GSParams().with_overrides(**overrides)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def run_method(problem, method: str, params):
    if method == "sojet":
        return run_descent(problem, params=params)
    if method == "gs":
        return run_gs(problem, params=params)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def run_cell(problem_name: str, n: int, method: str, seed: int,
             overrides: Optional[dict] = None, timing: bool = False) -> BenchResult:
    """One (problem, method) run. Failures are returned, never raised."""
    t0 = time.perf_counter()
    try:
        problem = get_problem(problem_name, n)
        params = make_params(method, seed, overrides)
        rec = run_method(problem, method, params)
    except Exception as exc:  # isolate the cell
        log.error("cell %s/%s failed: %r", problem_name, method, exc)
        return BenchResult(problem_name, n, method, 0, 0, 0, math.nan, math.inf,
                           0.0, ERROR_STATUS, f"{type(exc).__name__}: {exc}")
    wall = time.perf_counter() - t0 if timing else 0.0
    c = rec.counters
    return BenchResult(problem_name, n, method, c.n_f, c.n_grad, c.n_hess,
                       float(rec.final_f), math.nan, wall, rec.termination.value)


def _cell_args(config: BenchConfig):
    for p in config.problems:
        for m in config.methods:
            yield (p, config.n, m, cell_seed(config.seed, p, m),
                   config.overrides.get(m), config.timing)


def with_accuracies(results: Iterable[BenchResult]) -> list:
    """Fill ``accuracy = final_f - best final_f`` per (problem, n)."""
    results = list(results)
    best: dict = {}
    for r in results:
        if math.isfinite(r.final_f):
            key = (r.problem, r.n)
            best[key] = min(best.get(key, math.inf), r.final_f)
    out = []
    for r in results:
        b = best.get((r.problem, r.n))
        acc = r.final_f - b if (b is not None and math.isfinite(r.final_f)) else math.inf
        out.append(_replace(r, accuracy=acc))
    return out


def _replace(r: BenchResult, **kw) -> BenchResult:
    d = {f.name: getattr(r, f.name) for f in fields(r)}
    d.update(kw)
    return BenchResult(**d)


def run_benchmark(config) -> BenchReport:
    """Run every (problem, method) cell of ``config``; cells are independent."""
    if isinstance(config, dict):
        config = BenchConfig.from_dict(config)
    args = list(_cell_args(config))
    if config.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            raw = list(pool.map(run_cell, *zip(*args)))
    else:
        raw = [run_cell(*a) for a in args]
    errors = [(r.problem, r.method, r.message) for r in raw if r.termination == ERROR_STATUS]
    return BenchReport(with_accuracies(raw), errors)


def performance_profile(results: Iterable[BenchResult], threshold: float = 1e-4) -> list:
    """Dolan-More profile on gradient-evaluation counts.

    A method solves a problem iff its accuracy is below ``threshold``. For each
    breakpoint ``r`` (log10 of every finite ratio that occurs) and each method,
    ``fraction_solved`` is the share of problems with ratio <= 10^r.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    results = list(results)
    if not results:
        raise EmptyResults("no benchmark results to profile")
    methods = sorted({r.method for r in results})
    by_problem: dict = {}
    for r in results:
        by_problem.setdefault((r.problem, r.n), {})[r.method] = r
    n_prob = len(by_problem)

    ratios = {m: [] for m in methods}
    for cells in by_problem.values():
        solved = {m: r.n_grad for m, r in cells.items() if r.accuracy < threshold}
        best = min(solved.values()) if solved else None
        for m in methods:
            if m not in solved:
                ratios[m].append(math.inf)
            elif best == 0:
                ratios[m].append(1.0 if solved[m] == 0 else math.inf)
            else:
                ratios[m].append(solved[m] / best)

    breaks = sorted({v for rs in ratios.values() for v in rs if math.isfinite(v)}) or [1.0]
    points = []
    for b in breaks:
        for m in methods:
            k = sum(1 for v in ratios[m] if v <= b)
            points.append(ProfilePoint(math.log10(b), m, k / n_prob))
    return points


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_results_csv(results: Iterable[BenchResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow(r.row())


def read_results_csv(path) -> list:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(BenchResult(
                row["problem"], int(row["n"]), row["method"], int(row["n_f"]),
                int(row["n_grad"]), int(row["n_hess"]), float(row["final_f"]),
                float(row["accuracy"]), float(row["wall_time_s"]), row["termination"]))
    return out


def write_profile_csv(points: Iterable[ProfilePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for p in points:
            w.writerow([fmt(p.ratio_log10), p.method, fmt(p.fraction_solved)])


def read_profile_csv(path) -> list:
    with open(path, newline="") as fh:
        return [ProfilePoint(float(r["ratio_log10"]), r["method"], float(r["fraction_solved"]))
                for r in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# plot data for the two one-dimensional model illustrations
# ---------------------------------------------------------------------------

def _ball_argmin(z, v, x, eps):
    inside = np.abs(z - x) <= eps + 1e-12
    k = int(np.argmin(np.where(inside, v, np.inf)))
    return float(z[k]), float(v[k])


def model_comparison_data(x: float = 0.1, eps: float = 0.75, samples: int = 19,
                          points: int = 2001, gamma: float = 1.0, u: float = 1.0):
    """Gradient-sampling, proximal-bundle and jet models of the 1-D nonsmooth
    example ``max(sqrt|t|, -4|t|^2.5 + t + 1)`` built from equidistant samples.

    Returns ``(curves, minima)``: ``curves`` maps column name to an array over
    the grid ``z``; ``minima`` maps model name to ``(z_min, value)`` in the ball.
    """
    from .model import ModelSet
    from .oracle import evaluate_jet

    p = get_problem("paper_ex_3_6", 1)
    ys = np.linspace(x - eps, x + eps, samples)
    jets = [evaluate_jet(p, [y]) for y in ys]
    fx = p.f([x])
    z = np.linspace(x - 1.5 * eps, x + 1.5 * eps, points)
    d = z - x
    xi = np.array([J.xi[0] for J in jets])
    fy = np.array([J.fy for J in jets])
    H = np.array([J.H[0, 0] for J in jets])
    gs = (fx + np.outer(d, xi)).max(axis=1) + 0.5 * d * d
    alpha = fx - fy - xi * (x - ys)
    shift = np.maximum(np.abs(alpha), gamma * (x - ys) ** 2)
    pbm = (fx + np.outer(d, xi) - shift).max(axis=1) + 0.5 * u * d * d
    W = ModelSet([x], eps, jets)
    jet = np.array([W.values([t]).max() for t in z])
    f = np.array([p.f([t]) for t in z])
    curves = {"z": z, "f": f, "gradient_sampling": gs, "proximal_bundle": pbm, "jet_model": jet}
    minima = {k: _ball_argmin(z, curves[k], x, eps)
              for k in ("gradient_sampling", "proximal_bundle", "jet_model")}
    return curves, minima


def jet_refinement_data(x: float = -0.2, eps: float = 0.5, points: int = 2001):
    """Jet model of ``sqrt(|t| + 0.1)`` from the jet at ``x`` alone (W1) and
    after adding the jet at the W1 minimizer (W2)."""
    from .model import ModelSet
    from .oracle import evaluate_jet
    from .subproblem import solve_subproblem

    p = get_problem("paper_ex_4_7", 1)
    W1 = ModelSet([x], eps, [evaluate_jet(p, [x])])
    s1 = solve_subproblem(W1)
    W2 = W1.with_element(evaluate_jet(p, s1.z_bar))
    s2 = solve_subproblem(W2)
    z = np.linspace(x - 1.5 * eps, x + 1.5 * eps, points)
    curves = {"z": z, "f": np.array([p.f([t]) for t in z]),
              "model_W1": np.array([W1.values([t]).max() for t in z]),
              "model_W2": np.array([W2.values([t]).max() for t in z])}
    minima = {"model_W1": (float(s1.z_bar[0]), s1.theta),
              "model_W2": (float(s2.z_bar[0]), s2.theta)}
    return curves, minima


def write_curves_csv(curves: dict, minima: dict, path, minima_path) -> None:
    cols = list(curves)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*(curves[c] for c in cols)):
            w.writerow([fmt(v) for v in row])
    with open(minima_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "z_min", "value"])
        for k, (zm, v) in minima.items():
            w.writerow([k, fmt(zm), fmt(v)])
