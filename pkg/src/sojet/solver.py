"""Second-order jet descent: jet approximation loop and outer descent loop."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .exceptions import AllRestartsInfeasible
from .model import ModelSet, carry_over, eval_model
from .oracle import JetElement, Oracle, OracleCounters
from .subproblem import SolveOptions, solve_subproblem

log = logging.getLogger(__name__)

THETA_MONOTONE_TOL = 1e-6
INSERTION_TOL = 1e-10
DISTINCT_TOL = 1e-12


class Termination(str, enum.Enum):
    EPSILON_CONVERGED = "EpsilonConverged"
    MAX_OUTER_ITERATIONS = "MaxOuterIterations"
    INNER_LOOP_CAP = "InnerLoopCap"
    SUBPROBLEM_FAILURE = "SubproblemFailure"


@dataclass(frozen=True)
class SolverParams:
    c: float = 0.5
    eps_init: float = 10.0
    tau_init: float = 1e-5
    kappa_eps: float = 0.1
    kappa_tau: float = 1.0
    eps_min: float = 1e-5
    max_outer_iters: int = 1000
    max_inner_iters: int = 100
    w_cap: Optional[int] = None
    seed: int = 0
    solve: SolveOptions = field(default_factory=SolveOptions)
    strict: bool = False  # raise on the first violated runtime check

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if not 0 < self.kappa_eps < 1:
            raise ValueError("kappa_eps must lie in (0, 1)")
        if not 0 < self.kappa_tau <= 1:
            raise ValueError("kappa_tau must lie in (0, 1]")
        if min(self.eps_init, self.tau_init, self.eps_min) <= 0:
            raise ValueError("eps_init, tau_init and eps_min must be positive")
        if self.max_outer_iters < 1 or self.max_inner_iters < 1:
            raise ValueError("iteration limits must be positive")
        if self.w_cap is not None and self.w_cap < 1:
            raise ValueError("w_cap must be positive")

    def with_overrides(self, **kw) -> "SolverParams":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True)
class IterationRecord:
    i: int
    x: np.ndarray
    f: float
    eps: float
    tau: float
    w_size: int
    inner_iters: int
    n_f: int
    n_grad: int
    n_hess: int

    def to_dict(self) -> dict:
        return {
            "i": self.i, "x": [float(v) for v in self.x], "f": self.f,
            "eps": self.eps, "tau": self.tau, "w_size": self.w_size,
            "inner_iters": self.inner_iters, "n_f": self.n_f,
            "n_grad": self.n_grad, "n_hess": self.n_hess,
        }


@dataclass
class RunRecord:
    method: str
    iterates: list
    termination: Termination
    final_x: np.ndarray
    final_f: float
    counters: OracleCounters
    violations: list = field(default_factory=list)

    def trace(self) -> list:
        return [it.to_dict() for it in self.iterates]

    def write_trace(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.trace(), fh, indent=1)
            fh.write("\n")


def relative_decrease(theta: float, fx: float, eps: float) -> float:
    """Predicted decrease of the model relative to the radius."""
    return (theta - fx) / eps


class InnerOutcome(str, enum.Enum):
    ACCEPTED = "Accepted"
    REDUCE_EPSILON = "ReduceEpsilon"
    CAP_HIT = "CapHit"
    SUBPROBLEM_FAILURE = "SubproblemFailure"


@dataclass
class InnerResult:
    outcome: InnerOutcome
    W: ModelSet
    steps: int
    z_bar: Optional[np.ndarray] = None
    theta: Optional[float] = None
    jet: Optional[JetElement] = None  # jet at z_bar when accepted
    thetas: list = field(default_factory=list)


def _violation(violations, strict, msg):
    log.warning(msg)
    violations.append(msg)
    if strict:
        raise AssertionError(msg)


def inner_refine(x, fx: float, W: ModelSet, eps: float, tau: float, c: float,
                 oracle: Oracle, params: SolverParams,
                 rng: Optional[np.random.Generator] = None,
                 violations: Optional[list] = None) -> InnerResult:
    """Enrich ``W`` at model minimizers until the model is good enough.

    Returns ``ACCEPTED`` when the model minimizer gives sufficient decrease,
    ``REDUCE_EPSILON`` when the predicted decrease is below ``tau`` relative
    to ``eps``, and ``CAP_HIT`` after ``params.max_inner_iters`` additions.
    A solver breakdown yields ``SUBPROBLEM_FAILURE`` with ``theta = f(x)``.
    """
    x = np.asarray(x, dtype=float)
    if violations is None:
        violations = []
    if rng is None:
        rng = np.random.default_rng(params.seed)
    if not W.contains_base_point(x):
        raise ValueError("W must contain a jet element at x")
    steps = 0
    thetas = []
    warm = ()
    while True:
        try:
            sol = solve_subproblem(W, params.solve, rng, starts=warm)
        except AllRestartsInfeasible:
            log.warning("subproblem failed at |W|=%d, eps=%g", len(W), eps)
            return InnerResult(InnerOutcome.SUBPROBLEM_FAILURE, W, steps,
                               x.copy(), fx, thetas=thetas)
        theta = sol.theta
        if thetas and theta < thetas[-1] - THETA_MONOTONE_TOL:
            _violation(violations, params.strict,
                       f"model minimum decreased after insertion: {thetas[-1]!r} -> {theta!r}")
        thetas.append(theta)
        if relative_decrease(theta, fx, eps) > -tau:
            return InnerResult(InnerOutcome.REDUCE_EPSILON, W, steps, sol.z_bar, theta,
                               thetas=thetas)
        z = sol.z_bar
        if W.contains_base_point(z, DISTINCT_TOL):
            _violation(violations, params.strict,
                       f"model minimizer {z} already is a base point of W")
        J = oracle.jet(z)
        if J.fy <= fx + c * (theta - fx):
            return InnerResult(InnerOutcome.ACCEPTED, W, steps, z, theta, J, thetas)
        W = W.with_element(J)
        steps += 1
        # the model only grows, so earlier local minima are good starts
        warm = sol.local_minima
        value_at_z, _ = eval_model(W, z)
        if abs(value_at_z - J.fy) > INSERTION_TOL:
            _violation(violations, params.strict,
                       f"model at new base point is {value_at_z!r}, f is {J.fy!r}")
        if steps >= params.max_inner_iters:
            return InnerResult(InnerOutcome.CAP_HIT, W, steps, z, theta, thetas=thetas)


def run_descent(problem, x0=None, params: Optional[SolverParams] = None) -> RunRecord:
    """Minimize ``problem`` with the practical second-order jet descent method."""
    params = params or SolverParams()
    x = np.array(problem.x0 if x0 is None else x0, dtype=float).reshape(-1)
    oracle = Oracle(problem)
    rng = np.random.default_rng(params.seed)
    violations: list = []
    c = params.c
    eps, tau = params.eps_init, params.tau_init

    J = oracle.jet(x)
    fx = J.fy
    W = None
    iterates = []
    i = 0
    termination = Termination.EPSILON_CONVERGED
    while True:
        W = carry_over(W, x, eps, J, params.w_cap)
        inner_total = 0
        while True:
            res = inner_refine(x, fx, W, eps, tau, c, oracle, params, rng, violations)
            inner_total += res.steps
            W = res.W
            if res.outcome is InnerOutcome.ACCEPTED:
                break
            eps *= params.kappa_eps
            tau *= params.kappa_tau
            if eps < params.eps_min:
                break
            W = W.restricted(eps)

        snap = oracle.counters.snapshot()
        iterates.append(IterationRecord(i, x.copy(), fx, eps, tau, len(W), inner_total, **snap))

        if res.outcome is not InnerOutcome.ACCEPTED:
            termination = {
                InnerOutcome.CAP_HIT: Termination.INNER_LOOP_CAP,
                InnerOutcome.SUBPROBLEM_FAILURE: Termination.SUBPROBLEM_FAILURE,
            }.get(res.outcome, Termination.EPSILON_CONVERGED)
            break
        f_new = res.jet.fy
        if not f_new <= fx - c * tau * eps:
            _violation(violations, params.strict,
                       f"iteration {i}: f decreased from {fx!r} to {f_new!r}, "
                       f"less than c*tau*eps = {c * tau * eps!r}")
        x, fx, J = res.z_bar.copy(), f_new, res.jet
        i += 1
        if i > params.max_outer_iters:
            termination = Termination.MAX_OUTER_ITERATIONS
            snap = oracle.counters.snapshot()
            iterates.append(IterationRecord(i, x.copy(), fx, eps, tau, len(W), 0, **snap))
            break
        log.debug("iter %d f=%.10g eps=%.1e |W|=%d", i, fx, eps, len(W))

    return RunRecord("sojet", iterates, termination, x, fx, oracle.counters, violations)
