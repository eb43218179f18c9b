"""Jet-element evaluation and derivative checking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonFiniteValue


@dataclass(frozen=True, eq=False)
class JetElement:
    """One sampled second-order jet element ``(y, f(y), xi, H)``."""

    y: np.ndarray
    fy: float
    xi: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        xi = np.array(self.xi, dtype=float).reshape(-1)
        H = np.array(self.H, dtype=float).reshape(y.size, y.size)
        H = 0.5 * (H + H.T)
        fy = float(self.fy)
        if not (np.isfinite(fy) and np.all(np.isfinite(y))
                and np.all(np.isfinite(xi)) and np.all(np.isfinite(H))):
            raise NonFiniteValue(f"non-finite jet element at y={y}")
        for a in (y, xi, H):
            a.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "fy", fy)

    def expansion(self, z) -> float:
        d = np.asarray(z, dtype=float) - self.y
        return self.fy + self.xi @ d + 0.5 * d @ self.H @ d


@dataclass
class OracleCounters:
    n_f: int = 0
    n_grad: int = 0
    n_hess: int = 0

    def snapshot(self) -> dict:
        return {"n_f": self.n_f, "n_grad": self.n_grad, "n_hess": self.n_hess}


def _raw(problem, y):
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != problem.n:
        raise ValueError(f"expected a point of dimension {problem.n}, got {y.size}")
    return y, problem.evaluate(y)


def evaluate_jet(problem, y, counters: OracleCounters | None = None) -> JetElement:
    """Evaluate one element of the 0-jet of ``problem`` at ``y``.

    At kinks the problem's branch order decides which limiting element is
    returned. Each call counts as one value, gradient and Hessian evaluation.
    """
    y, (f, g, H, _) = _raw(problem, y)
    if counters is not None:
        counters.n_f += 1
        counters.n_grad += 1
        counters.n_hess += 1
    return JetElement(y.copy(), f, g, H)


class Oracle:
    """A problem bound to its own evaluation counters."""

    def __init__(self, problem, counters: OracleCounters | None = None):
        self.problem = problem
        self.counters = counters if counters is not None else OracleCounters()

    def jet(self, y) -> JetElement:
        return evaluate_jet(self.problem, y, self.counters)

    def value(self, y) -> float:
        _, (f, *_) = _raw(self.problem, y)
        f = float(f)
        if not np.isfinite(f):
            raise NonFiniteValue(f"non-finite value at y={y}")
        self.counters.n_f += 1
        return f

    def gradient(self, y) -> np.ndarray:
        _, (_, g, *_) = _raw(self.problem, y)
        g = np.array(g, dtype=float)
        if not np.all(np.isfinite(g)):
            raise NonFiniteValue(f"non-finite gradient at y={y}")
        self.counters.n_grad += 1
        return g


@dataclass(frozen=True)
class DerivativeReport:
    grad_rel_err: float
    hess_rel_err: float
    smooth: bool  # all stencil points share the branch of y


def _rel_err(approx, exact):
    return float(np.max(np.abs(approx - exact)) / max(1.0, np.max(np.abs(exact))))


def check_derivatives(problem, y, h: float = 1e-6) -> DerivativeReport:
    """Compare analytic derivatives with central differences at ``y``.

    The gradient is checked against differences of function values and the
    Hessian against differences of the analytic gradient. Errors are relative
    in the max-norm, ``max|fd - exact| / max(1, max|exact|)``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    f0, g0, H0, branch0 = problem.evaluate(y)
    H0 = 0.5 * (np.asarray(H0) + np.asarray(H0).T)
    n = y.size
    g_fd = np.empty(n)
    H_fd = np.empty((n, n))
    smooth = True
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fp, gp, _, bp = problem.evaluate(y + e)
        fm, gm, _, bm = problem.evaluate(y - e)
        smooth = smooth and bp == branch0 and bm == branch0
        g_fd[i] = (fp - fm) / (2 * h)
        H_fd[:, i] = (np.asarray(gp) - np.asarray(gm)) / (2 * h)
    H_fd = 0.5 * (H_fd + H_fd.T)
    return DerivativeReport(_rel_err(g_fd, np.asarray(g0)), _rel_err(H_fd, H0), smooth)
