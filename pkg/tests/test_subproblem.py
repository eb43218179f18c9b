import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_model
from sojet.exceptions import DimensionTooLarge, EmptyModel
from sojet.model import ModelSet, eval_model
from sojet.oracle import JetElement, evaluate_jet
from sojet.subproblem import Status, brute_force_min, solve_subproblem
from sojet.testbed import get_problem


def W1(fy, xi, H, eps=1.0, x=0.0):
    return ModelSet([x], eps, [JetElement([x], fy, [xi], [[H]])])


def ex47():
    return ModelSet([-0.2], 0.5, [evaluate_jet(get_problem("paper_ex_4_7", 1), [-0.2])])


def abs_pair():
    return ModelSet([0.0], 1.0, [JetElement([0.5], 0.5, [1.0], [[0.0]]),
                                 JetElement([-0.5], 0.5, [-1.0], [[0.0]])])


class TestSolve:
    def test_convex_interior_vertex(self):
        s = solve_subproblem(W1(0.0, -1.0, 2.0))
        assert s.z_bar[0] == pytest.approx(0.5, abs=1e-6)
        assert s.theta == pytest.approx(-0.25, abs=1e-10)
        assert s.status is Status.OPTIMAL

    def test_concave_boundary_tie(self):
        s = solve_subproblem(W1(0.0, 0.0, -2.0))
        assert s.theta == pytest.approx(-1.0, abs=1e-8)
        # lexicographic tie-break picks the smaller z
        assert s.z_bar[0] == pytest.approx(-1.0, abs=1e-6)

    def test_sqrt_kink(self):
        t0 = time.perf_counter()
        s = solve_subproblem(ex47())
        assert time.perf_counter() - t0 < 1.0
        assert s.z_bar[0] == pytest.approx(0.3, abs=1e-3)
        theta_ref = np.sqrt(0.3) - 0.25 / np.sqrt(0.3) - 0.03125 * 0.3**-1.5
        assert s.theta == pytest.approx(theta_ref, abs=1e-8)

    def test_abs_pair(self):
        s = solve_subproblem(abs_pair())
        assert abs(s.z_bar[0]) < 1e-6 and abs(s.theta) < 1e-6

    def test_outside_vertex_hits_boundary(self):
        s = solve_subproblem(W1(0.0, -10.0, 2.0))
        assert s.z_bar[0] == pytest.approx(1.0, abs=1e-7)
        assert s.theta == pytest.approx(-9.0, abs=1e-6)

    def test_empty(self):
        with pytest.raises(EmptyModel):
            solve_subproblem(ModelSet([0.0], 1.0, []))

    def test_deterministic(self, rng):
        W = random_model(rng, 3, 5)
        a = solve_subproblem(W, rng=np.random.default_rng(7))
        b = solve_subproblem(W, rng=np.random.default_rng(7))
        assert np.array_equal(a.z_bar, b.z_bar) and a.theta == b.theta

    def test_warm_start_never_hurts(self, rng):
        W = random_model(rng, 2, 6)
        cold = solve_subproblem(W, rng=np.random.default_rng(1))
        warm = solve_subproblem(W, rng=np.random.default_rng(1), starts=[cold.z_bar])
        assert warm.theta <= cold.theta + 1e-12

    @given(st.integers(0, 2**31), st.integers(1, 4), st.integers(1, 6))
    def test_postconditions(self, seed, n, m):
        W = random_model(np.random.default_rng(seed), n, m)
        s = solve_subproblem(W, rng=np.random.default_rng(seed))
        assert np.linalg.norm(s.z_bar - W.center) <= W.radius + 1e-8
        assert s.theta == pytest.approx(eval_model(W, s.z_bar)[0], abs=1e-10)
        # never worse than the center
        assert s.theta <= eval_model(W, W.center)[0] + 1e-10


class TestBruteForce:
    def test_convex(self):
        _, th = brute_force_min(W1(0.0, -1.0, 2.0), 4001)
        assert th == pytest.approx(-0.25, abs=1e-6)

    def test_sqrt_kink(self):
        z, _ = brute_force_min(ex47(), 4001)
        assert z[0] == pytest.approx(0.3, abs=2.5e-4)

    def test_boundary(self):
        z, _ = brute_force_min(W1(0.0, -10.0, 2.0), 4001)
        assert z[0] == pytest.approx(1.0)

    def test_abs_pair(self):
        z, th = brute_force_min(abs_pair(), 4001)
        assert abs(z[0]) < 1e-12 and abs(th) < 1e-12

    def test_errors(self):
        with pytest.raises(DimensionTooLarge):
            brute_force_min(ModelSet(np.zeros(3), 1.0, [JetElement(np.zeros(3), 0, np.zeros(3), np.eye(3))]), 11)
        with pytest.raises(EmptyModel):
            brute_force_min(ModelSet([0.0], 1.0, []), 11)
