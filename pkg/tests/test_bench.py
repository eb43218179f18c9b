import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sojet.bench import (BenchConfig, BenchResult, ProfilePoint, cell_seed, performance_profile,
                         read_profile_csv, read_results_csv, run_benchmark, with_accuracies,
                         write_profile_csv, write_results_csv)
from sojet.exceptions import EmptyResults

FIXTURE = Path(__file__).parent / "data" / "default_bench_n10_seed0.csv"


def R(problem, method, n_grad, acc, final_f=0.0):
    return BenchResult(problem, 10, method, n_grad, n_grad, 0, final_f, acc, 0.0, "EpsilonConverged")


def curve(points, method):
    return [(p.ratio_log10, p.fraction_solved) for p in points if p.method == method]


class TestProfile:
    def test_single_method(self):
        pts = performance_profile([R("a", "A", 5, 0.0), R("b", "A", 9, 0.0)])
        assert curve(pts, "A") == [(0.0, 1.0)]

    def test_two_methods_one_problem(self):
        pts = performance_profile([R("p", "A", 10, 0.0), R("p", "B", 20, 0.0)])
        assert curve(pts, "A") == [(0.0, 1.0), (math.log10(2), 1.0)]
        assert curve(pts, "B") == [(0.0, 0.0), (math.log10(2), 1.0)]

    def test_failure_plateau(self):
        pts = performance_profile([R("p", "A", 10, 0.0), R("p", "B", 5, 1.0),
                                   R("q", "A", 10, 0.0), R("q", "B", 5, 0.0)])
        assert max(f for _, f in curve(pts, "B")) == 0.5

    def test_threshold_is_strict(self):
        pts = performance_profile([R("p", "A", 10, 1e-4)], threshold=1e-4)
        assert curve(pts, "A") == [(0.0, 0.0)]

    def test_empty(self):
        with pytest.raises(EmptyResults):
            performance_profile([])

    @given(st.lists(st.tuples(st.integers(0, 4), st.sampled_from("ABC"), st.integers(1, 500),
                              st.booleans()), min_size=1, max_size=30))
    def test_invariants(self, cells):
        res = [R(f"p{p}", m, c, 0.0 if ok else 1.0) for p, m, c, ok in cells]
        pts = performance_profile(res)
        for m in {p.method for p in pts}:
            fr = [f for _, f in curve(pts, m)]
            assert all(0.0 <= f <= 1.0 for f in fr)
            assert fr == sorted(fr)
        # at the largest ratio every curve equals its solved fraction
        last = {m: curve(pts, m)[-1][1] for m in {p.method for p in pts}}
        probs = {}
        for r in res:
            probs.setdefault(r.problem, {})[r.method] = r
        for m, f in last.items():
            solved = sum(1 for cells_ in probs.values() if m in cells_ and cells_[m].accuracy < 1e-4)
            assert f == pytest.approx(solved / len(probs))


class TestAccuracy:
    def test_relative_to_best(self):
        out = with_accuracies([R("p", "A", 1, 0, 3.0), R("p", "B", 1, 0, 2.5)])
        assert [r.accuracy for r in out] == [0.5, 0.0]

    def test_failed_cell_is_infinite(self):
        out = with_accuracies([R("p", "A", 1, 0, math.nan), R("p", "B", 1, 0, 2.5)])
        assert out[0].accuracy == math.inf and out[1].accuracy == 0.0


class TestRunBenchmark:
    def test_two_methods(self):
        rep = run_benchmark({"problems": ["maxq"], "n": 10, "methods": ["sojet", "gs"]})
        assert len(rep) == 2 and not rep.errors
        best = min(r.final_f for r in rep)
        for r in rep:
            assert r.accuracy == r.final_f - best >= 0
        assert min(r.accuracy for r in rep) == 0.0

    def test_unknown_problem_isolated(self):
        rep = run_benchmark({"problems": ["nope", "absval"], "n": 3, "methods": ["sojet"]})
        assert [e[0] for e in rep.errors] == ["nope"]
        ok = [r for r in rep if r.problem == "absval"]
        assert ok and ok[0].final_f < 1e-4

    def test_overrides_applied(self):
        rep = run_benchmark({"problems": ["maxq"], "n": 4, "methods": ["gs"],
                             "overrides": {"gs": {"max_iters": 2}}})
        assert rep.results[0].termination == "MaxOuterIterations"

    def test_unknown_config_key(self):
        with pytest.raises(ValueError):
            BenchConfig.from_dict({"problem": ["maxq"]})

    def test_cell_seed_stable(self):
        assert cell_seed(0, "maxq", "gs") == cell_seed(0, "maxq", "gs")
        assert len({cell_seed(0, "maxq", m) for m in ("gs", "sojet")}) == 2
        assert cell_seed(0, "maxq", "gs") != cell_seed(1, "maxq", "gs")

    def test_concurrent_matches_sequential(self):
        cfg = {"problems": ["absval", "chained_lq", "maxq"], "n": 4}
        seq = run_benchmark(cfg)
        par = BenchConfig.from_dict(cfg)
        par.jobs = 3
        assert run_benchmark(par).results == seq.results


class TestCSV:
    @given(st.lists(st.tuples(st.floats(allow_nan=False), st.floats(0, 1e300),
                              st.integers(0, 10**9)), min_size=1, max_size=5))
    def test_round_trip(self, tmp_path_factory, rows):
        path = tmp_path_factory.mktemp("csv") / "r.csv"
        res = [BenchResult(f"p{i}", 3, "gs", c, c + 1, 0, f, a, 0.25, "EpsilonConverged")
               for i, (f, a, c) in enumerate(rows)]
        write_results_csv(res, path)
        assert read_results_csv(path) == res

    def test_profile_round_trip(self, tmp_path):
        pts = [ProfilePoint(math.log10(3), "gs", 1 / 3), ProfilePoint(0.0, "sojet", 0.7)]
        write_profile_csv(pts, tmp_path / "p.csv")
        assert read_profile_csv(tmp_path / "p.csv") == pts
        assert (tmp_path / "p.csv").read_text().splitlines()[0] == "ratio_log10,method,fraction_solved"


@pytest.mark.slow
def test_default_benchmark_regression(tmp_path):
    """Full default suite against the pinned first execution."""
    rep = run_benchmark(BenchConfig())
    assert len(rep) == 20 and not rep.errors
    pinned = read_results_csv(FIXTURE)
    for got, ref in zip(rep.results, pinned):
        assert (got.problem, got.method, got.termination) == (ref.problem, ref.method, ref.termination)
        assert (got.n_f, got.n_grad, got.n_hess) == (ref.n_f, ref.n_grad, ref.n_hess)
        assert got.final_f == pytest.approx(ref.final_f, rel=1e-9, abs=1e-12)
    out = tmp_path / "results.csv"
    write_results_csv(rep.results, out)
    assert read_results_csv(out) == rep.results


class TestFigureData:
    def test_model_comparison(self):
        from sojet.bench import model_comparison_data
        from sojet.testbed import get_problem
        curves, minima = model_comparison_data()
        f = get_problem("paper_ex_3_6", 1).f
        fx = f([0.1])
        # gradient sampling: the ball holds a critical point, so no step (d = 0)
        assert minima["gradient_sampling"][0] == pytest.approx(0.1, abs=1e-3)
        # proximal bundle still decreases f, but by little
        zb = minima["proximal_bundle"][0]
        zj = minima["jet_model"][0]
        assert f([zj]) < f([zb]) < fx
        # the jet model minimizer lands near the minimizer of f in the ball
        z, fz = curves["z"], curves["f"]
        inside = np.abs(z - 0.1) <= 0.75
        z_true = z[inside][np.argmin(fz[inside])]
        assert abs(zj - z_true) < 0.05

    def test_jet_refinement(self):
        from sojet.bench import jet_refinement_data
        curves, minima = jet_refinement_data()
        assert minima["model_W1"][0] == pytest.approx(0.3, abs=1e-3)
        # after one refinement the minimizer is close to argmin f = 0
        assert abs(minima["model_W2"][0]) < 0.05
