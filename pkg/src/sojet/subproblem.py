"""Minimization of the max-model over the ball ``B_eps(x)``.

The problem ``min_{|z - x| <= eps} T^W(z)`` is solved in epigraph form

    min beta  s.t.  q_k(z) <= beta  for every element k,   |z - x|^2 <= eps^2,

a linear objective with (possibly nonconvex) quadratic constraints. Each start
runs a feasible primal-dual interior-point iteration with exact second
derivatives; several starts are combined and the best feasible point wins.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import AllRestartsInfeasible, DimensionTooLarge, EmptyModel
from .model import ModelSet, eval_model

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SolveOptions:
    n_restarts: int = 5
    max_infeasible_restarts: int = 10
    kkt_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 500
    seed: Optional[int] = 0
    screen_pool: int = 16


@dataclass(frozen=True)
class SubproblemSolution:
    z_bar: np.ndarray
    theta: float
    status: Status
    restarts_used: int = 0
    kkt_residual: float = float("nan")
    local_minima: tuple = ()  # distinct end points of all starts, best first


@dataclass
class _StartResult:
    u: np.ndarray
    kkt: float
    iterations: int


class _ScaledProblem:
    """The subproblem in ``u = (z - x) / eps`` with values scaled to O(1).

    Constraint k reads ``a_k + b_k^T u + 0.5 u^T C_k u - t <= 0`` and the ball
    becomes ``u^T u <= 1``.
    """

    def __init__(self, W: ModelSet):
        x, eps = W.center, W.radius
        D = x - W.Y
        HD = np.einsum("kij,kj->ki", W.Hs, D)
        a = W.F + np.einsum("ki,ki->k", W.G, D) + 0.5 * np.einsum("ki,ki->k", D, HD)
        b = eps * (W.G + HD)
        C = eps * eps * W.Hs
        self.offset = float(np.max(a))
        spread = np.linalg.norm(b, axis=1) + 0.5 * np.abs(C).sum(axis=(1, 2))
        scale = float(np.max(np.concatenate((spread, np.abs(a - self.offset)))))
        self.scale = max(scale, 1e-14 * (1.0 + abs(self.offset)))
        self.a = (a - self.offset) / self.scale
        self.b = b / self.scale
        self.C = C / self.scale
        self.n = x.size
        self.m = a.size

    def quads(self, u):
        Cu = self.C @ u
        q = self.a + self.b @ u + 0.5 * (Cu @ u)
        return q, self.b + Cu

    def slacks(self, u, t):
        q, _ = self.quads(u)
        return np.concatenate(([1.0 - u @ u], t - q))


def _interior_point(P: _ScaledProblem, u0, max_iter, tol, mu0=1e-2) -> _StartResult:
    n, m = P.n, P.m
    u = np.array(u0, dtype=float)
    r2 = u @ u
    if r2 > 0.98:
        u *= np.sqrt(0.98 / r2)
    q, Gq = P.quads(u)
    t = float(np.max(q)) + 1.0
    s = np.concatenate(([1.0 - u @ u], t - q))
    mu = mu0
    mu_min = 0.1 * tol
    lam = mu / s
    delta = 0.0
    kkt = np.inf
    eye = np.eye(n + 1)

    it = 0
    for it in range(1, max_iter + 1):
        J = np.empty((m + 1, n + 1))
        J[0, :n] = 2 * u
        J[0, n] = 0.0
        J[1:, :n] = Gq
        J[1:, n] = -1.0
        rd = J.T @ lam
        rd[n] += 1.0
        comp = lam * s
        res = float(np.max(np.abs(rd)))
        kkt = max(res, float(np.max(comp)))
        if kkt <= tol:
            break
        if mu > mu_min and max(res, float(np.max(np.abs(comp - mu)))) <= 10 * mu:
            mu = max(mu_min, min(0.2 * mu, mu**1.5))

        gphi = mu * (J.T @ (1.0 / s))
        gphi[n] += 1.0
        M = J.T @ ((lam / s)[:, None] * J)
        M[:n, :n] += 2 * lam[0] * np.eye(n) + np.tensordot(lam[1:], P.C, axes=1)

        dp = None
        try:
            np.linalg.cholesky(M)
            dp = np.linalg.solve(M, -gphi)
            delta = 0.0
        except np.linalg.LinAlgError:
            base = max(1.0, float(np.max(np.abs(np.diag(M)))))
            d = max(1e-10 * base, delta / 3.0) if delta else 1e-8 * base
            for _ in range(60):
                try:
                    np.linalg.cholesky(M + d * eye)
                    dp = np.linalg.solve(M + d * eye, -gphi)
                    delta = d
                    break
                except np.linalg.LinAlgError:
                    d *= 8.0
        if dp is None or not np.all(np.isfinite(dp)):
            break

        # short steps keep each start inside its own basin
        step = np.linalg.norm(dp[:n])
        if step > 0.5:
            dp *= 0.5 / step
        slope = float(gphi @ dp)
        phi0 = t - mu * float(np.sum(np.log(s)))
        alpha = 1.0
        accepted = False
        for _ in range(60):
            u_new = u + alpha * dp[:n]
            t_new = t + alpha * dp[n]
            s_new = P.slacks(u_new, t_new)
            if np.all(s_new > 0):
                phi = t_new - mu * float(np.sum(np.log(s_new)))
                if phi <= phi0 + 1e-4 * alpha * slope or abs(phi - phi0) <= 1e-15 * (1 + abs(phi0)):
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            if mu > mu_min:
                mu = max(mu_min, 0.2 * mu)
                continue
            break

        Jdp = J @ dp
        dlam = (mu - lam * s + lam * Jdp) / s
        neg = dlam < 0
        alpha_d = 1.0
        if np.any(neg):
            alpha_d = min(1.0, float(np.min(-0.99 * lam[neg] / dlam[neg])))
        lam = lam + alpha_d * dlam
        u, t, s = u_new, t_new, s_new
        q, Gq = P.quads(u)
        # keep multipliers within a bounded factor of the central path
        lam = np.clip(lam, mu / (1e10 * s), 1e10 * mu / s)
    return _StartResult(u, float(kkt), it)


def _random_in_ball(rng, n, size=None):
    k = 1 if size is None else size
    v = rng.standard_normal((k, n))
    nv = np.linalg.norm(v, axis=1, keepdims=True)
    nv[nv == 0.0] = 1.0
    pts = v / nv * rng.random((k, 1)) ** (1.0 / n)
    return pts[0] if size is None else pts


def _screened_starts(P: _ScaledProblem, rng, k: int, pool: int):
    """``k`` well-separated low-value points from a uniform pool in the unit ball."""
    if k <= 0:
        return []
    U = _random_in_ball(rng, P.n, pool * k)
    # minima of nonconvex models often sit on the sphere
    norms = np.maximum(np.linalg.norm(U, axis=1, keepdims=True), 1e-300)
    U = np.concatenate((U, 0.99 * U / norms))
    CU = np.einsum("kij,pj->pki", P.C, U)
    vals = (P.a + U @ P.b.T + 0.5 * np.einsum("pki,pi->pk", CU, U)).max(axis=1)
    order = np.argsort(vals, kind="stable")
    chosen = []
    for sep in (0.5, 0.25, 0.0):
        for i in order:
            if len(chosen) == k:
                return [U[j] for j in chosen]
            if i in chosen:
                continue
            if all(np.linalg.norm(U[i] - U[j]) > sep for j in chosen):
                chosen.append(i)
    return [U[j] for j in chosen]


def solve_subproblem(W: ModelSet, opts: Optional[SolveOptions] = None,
                     rng: Optional[np.random.Generator] = None,
                     starts: Sequence = ()) -> SubproblemSolution:
    """Approximately minimize the model of ``W`` over its ball.

    Starts from the center, from any extra points given in ``starts`` and from
    ``opts.n_restarts`` random points in the ball, screened by model value
    from a larger uniform pool and kept apart from each other. The returned value
    is recomputed from the model at the returned point.
    """
    if not len(W):
        raise EmptyModel("cannot solve a subproblem without model elements")
    opts = opts or SolveOptions()
    if rng is None:
        rng = np.random.default_rng(opts.seed)
    x, eps = W.center, W.radius
    P = _ScaledProblem(W)
    n = P.n

    queue = [np.zeros(n)]
    for z in starts:
        u = (np.asarray(z, dtype=float) - x) / eps
        if np.all(np.isfinite(u)):
            queue.append(u)
    queue += _screened_starts(P, rng, opts.n_restarts, opts.screen_pool)

    candidates = []
    failures = 0
    restarts = 0
    while queue:
        u0 = queue.pop(0)
        res = _interior_point(P, u0, opts.max_iter, opts.kkt_tol)
        z = x + eps * res.u
        ok = np.all(np.isfinite(z)) and np.linalg.norm(z - x) <= eps + opts.feas_tol
        if not ok:
            failures += 1
            restarts += 1
            if failures > opts.max_infeasible_restarts:
                raise AllRestartsInfeasible(
                    f"{failures} consecutive starts ended infeasible")
            queue.insert(0, _random_in_ball(rng, n))
            continue
        failures = 0
        theta, _ = eval_model(W, z)
        candidates.append((theta, z, res.kkt))

    theta_min = min(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] <= theta_min + 1e-12 * (1.0 + abs(theta_min))]
    theta, z, kkt = min(tied, key=lambda c: tuple(c[1]))
    status = Status.OPTIMAL if kkt <= opts.kkt_tol else Status.MAX_ITERATIONS
    distinct = []
    for c in sorted(candidates, key=lambda c: c[0]):
        if all(np.linalg.norm(c[1] - d) > 1e-6 * eps for d in distinct):
            distinct.append(c[1])
    log.debug("subproblem |W|=%d theta=%.6g kkt=%.2e", len(W), theta, kkt)
    return SubproblemSolution(z, float(theta), status, restarts, float(kkt), tuple(distinct))


def brute_force_min(W: ModelSet, points_per_dim: int) -> tuple[np.ndarray, float]:
    """Grid search for the constrained model minimum (n <= 2 only)."""
    if not len(W):
        raise EmptyModel("cannot search an empty model")
    n = W.n
    if n > 2:
        raise DimensionTooLarge(f"grid oracle supports n <= 2, got {n}")
    if points_per_dim < 3:
        raise ValueError("points_per_dim must be at least 3")
    x, eps = W.center, W.radius
    axis = np.linspace(-eps, eps, points_per_dim)
    grid = np.array(list(itertools.product(axis, repeat=n)))
    grid = grid[np.linalg.norm(grid, axis=1) <= eps * (1 + 1e-12)] + x
    best_val = np.full(len(grid), -np.inf)
    for e in W.elements:
        D = grid - e.y
        v = e.fy + D @ e.xi + 0.5 * np.einsum("pi,ij,pj->p", D, e.H, D)
        np.maximum(best_val, v, out=best_val)
    k = int(np.argmin(best_val))
    return grid[k].copy(), float(best_val[k])
