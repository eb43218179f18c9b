"""First-order gradient sampling, used as the comparison method."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .oracle import Oracle
from .solver import IterationRecord, RunRecord, Termination

log = logging.getLogger(__name__)


def min_norm_element(G, tol: float = 1e-12, max_iter: int = 1000) -> np.ndarray:
    """Minimum-norm point of the convex hull of the rows of ``G``.

    Wolfe's algorithm: a major cycle adds the point most violating the
    optimality condition ``g^T x >= |x|^2``, minor cycles move to the affine
    minimizer of the current corral and drop points whose weight vanishes.
    """
    P = np.atleast_2d(np.asarray(G, dtype=float))
    m = P.shape[0]
    if m == 1:
        return P[0].copy()
    scale = max(1.0, float(np.max(np.einsum("ij,ij->i", P, P))))
    S = [int(np.argmin(np.einsum("ij,ij->i", P, P)))]
    w = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        for _ in range(max_iter):
            Ps = P[S]
            k = len(S)
            A = np.ones((k + 1, k + 1))
            A[:k, :k] = Ps @ Ps.T
            A[k, k] = 0.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            v = np.linalg.lstsq(A, rhs, rcond=None)[0][:k]
            if np.all(v > tol):
                w = v
                break
            mask = (v <= tol) & (w > v)
            theta = min(1.0, float(np.min(w[mask] / (w[mask] - v[mask])))) if np.any(mask) else 1.0
            w = w + theta * (v - w)
            drop = w <= tol
            if not np.any(drop):
                drop[np.argmin(w)] = True
            S = [s for s, dr in zip(S, drop) if not dr]
            w = w[~drop]
            w = w / w.sum()
        x = w @ P[S]
    return x


@dataclass(frozen=True)
class GSParams:
    m: Optional[int] = None  # samples per iteration, default 2n
    eps_init: float = 1.0
    kappa_eps: float = 0.1
    eps_min: float = 1e-5
    armijo_beta: float = 0.5
    armijo_gamma: float = 1e-4
    stat_tol: float = 1e-6
    max_iters: int = 1000
    max_backtracks: int = 50
    seed: int = 0

    def with_overrides(self, **kw) -> "GSParams":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _sample_ball(rng, x, eps, k):
    n = x.size
    v = rng.standard_normal((k, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return x + eps * v * rng.random((k, 1)) ** (1.0 / n)


def run_gs(problem, x0=None, params: Optional[GSParams] = None) -> RunRecord:
    """Simplified gradient sampling with a normalized Armijo line search."""
    params = params or GSParams()
    x = np.array(problem.x0 if x0 is None else x0, dtype=float).reshape(-1)
    n = x.size
    m = params.m if params.m is not None else 2 * n
    if m < n + 1:
        raise ValueError(f"need at least n + 1 = {n + 1} samples, got {m}")
    oracle = Oracle(problem)
    rng = np.random.default_rng(params.seed)
    eps = params.eps_init
    fx = oracle.value(x)
    iterates = []
    termination = Termination.EPSILON_CONVERGED
    it = 0
    while True:
        if eps < params.eps_min:
            break
        if it >= params.max_iters:
            termination = Termination.MAX_OUTER_ITERATIONS
            break
        pts = np.vstack((x, _sample_ball(rng, x, eps, m - 1)))
        G = np.array([oracle.gradient(p) for p in pts])
        d = min_norm_element(G)
        nd = float(np.linalg.norm(d))
        backtracks = 0
        if nd <= params.stat_tol:
            eps *= params.kappa_eps
        else:
            direction = -d / nd
            t = eps
            moved = False
            for backtracks in range(params.max_backtracks):
                x_try = x + t * direction
                f_try = oracle.value(x_try)
                if f_try <= fx - params.armijo_gamma * t * nd:
                    x, fx = x_try, f_try
                    moved = True
                    break
                t *= params.armijo_beta
            if not moved:
                eps *= params.kappa_eps
        snap = oracle.counters.snapshot()
        iterates.append(IterationRecord(it, x.copy(), fx, eps, params.stat_tol, m,
                                        backtracks, **snap))
        it += 1
    return RunRecord("gs", iterates, termination, x, fx, oracle.counters)
