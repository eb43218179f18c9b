"""Scalable nonsmooth test problems with analytic derivatives.

Every problem is a maximum (or a sum of maxima) of smooth pieces. Pieces are
evaluated in a fixed order and the first piece attaining the maximum is the
active one; ``|t|`` is treated as ``max(t, -t)``, so at ``t = 0`` the ``t >= 0``
branch wins. The raw evaluators return ``(f, grad, hess, branch)`` where
``branch`` is a hashable signature of the active pieces, used to tell whether
two nearby points lie on the same smooth piece.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import DimensionTooSmall, UnknownProblem

RawEval = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    n: int
    x0: np.ndarray
    f_star: Optional[float]
    convex: bool
    evaluate: RawEval = field(repr=False, compare=False)
    min_n: int = 1

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float)
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    def f(self, x) -> float:
        """Objective value without touching any counters."""
        return float(self.evaluate(np.asarray(x, dtype=float))[0])


def _sign(t):
    return np.where(t >= 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# chained problems: f(x) = sum_i max_k p_k(x_i, x_{i+1})
# ---------------------------------------------------------------------------

def _chained(x, pieces):
    """Assemble value/gradient/Hessian of a chained max-type function.

    ``pieces`` is a list of tuples ``(val, ga, gb, haa, hbb, hab)`` of arrays
    over the ``n - 1`` consecutive pairs ``(a, b) = (x_i, x_{i+1})``.
    """
    n = x.size
    vals = np.stack([p[0] for p in pieces])
    k = np.argmax(vals, axis=0)
    idx = np.arange(n - 1)

    def pick(j):
        return np.stack([np.broadcast_to(p[j], (n - 1,)) for p in pieces])[k, idx]

    f = float(np.sum(vals[k, idx]))
    ga, gb, haa, hbb, hab = (pick(j) for j in range(1, 6))
    g = np.zeros(n)
    g[:-1] += ga
    g[1:] += gb
    H = np.zeros((n, n))
    H[idx, idx] += haa
    H[idx + 1, idx + 1] += hbb
    H[idx, idx + 1] += hab
    H[idx + 1, idx] += hab
    return f, g, H, tuple(k.tolist())


def chained_lq(x):
    a, b = x[:-1], x[1:]
    lin = -a - b
    quad = lin + a * a + b * b - 1.0
    return _chained(x, [
        (lin, -1.0, -1.0, 0.0, 0.0, 0.0),
        (quad, -1.0 + 2 * a, -1.0 + 2 * b, 2.0, 2.0, 0.0),
    ])


def chained_cb3(x):
    a, b = x[:-1], x[1:]
    e = 2.0 * np.exp(-a + b)
    return _chained(x, [
        (a**4 + b * b, 4 * a**3, 2 * b, 12 * a * a, 2.0, 0.0),
        ((2 - a) ** 2 + (2 - b) ** 2, -2 * (2 - a), -2 * (2 - b), 2.0, 2.0, 0.0),
        (e, -e, e, e, e, -e),
    ])


def chained_mifflin2(x):
    # -a + 2r + 1.75|r| == max(-a + 3.75 r, -a + 0.25 r),  r = a^2 + b^2 - 1
    a, b = x[:-1], x[1:]
    r = a * a + b * b - 1.0
    pieces = []
    for kappa in (3.75, 0.25):
        pieces.append((-a + kappa * r, -1.0 + 2 * kappa * a, 2 * kappa * b,
                       2 * kappa, 2 * kappa, 0.0))
    return _chained(x, pieces)


def chained_crescent1(x):
    a, b = x[:-1], x[1:]
    n = x.size
    A = float(np.sum(a * a + (b - 1) ** 2 + b - 1))
    B = float(np.sum(-a * a - (b - 1) ** 2 + b + 1))
    sgn = 1.0 if A >= B else -1.0
    g = np.zeros(n)
    g[:-1] += 2 * sgn * a
    g[1:] += 2 * sgn * (b - 1) + 1.0
    d = np.zeros(n)
    d[:-1] += 2 * sgn
    d[1:] += 2 * sgn
    return max(A, B), g, np.diag(d), (sgn,)


# ---------------------------------------------------------------------------
# global max-type problems
# ---------------------------------------------------------------------------

def maxq(x):
    sq = x * x
    i = int(np.argmax(sq))
    g = np.zeros_like(x)
    g[i] = 2 * x[i]
    H = np.zeros((x.size, x.size))
    H[i, i] = 2.0
    return float(sq[i]), g, H, (i,)


def _hilbert(n):
    i = np.arange(1, n + 1)
    return 1.0 / (i[:, None] + i[None, :] - 1)


def mxhilb(x):
    A = _hilbert(x.size)
    v = A @ x
    i = int(np.argmax(np.abs(v)))
    s = 1.0 if v[i] >= 0 else -1.0
    return float(abs(v[i])), s * A[i], np.zeros((x.size, x.size)), (i, s)


def active_faces(x):
    # max{ g(-sum x), g(x_1), ..., g(x_n) },  g(t) = ln(|t| + 1)
    t = np.concatenate(([-np.sum(x)], x))
    vals = np.log1p(np.abs(t))
    i = int(np.argmax(vals))
    s = 1.0 if t[i] >= 0 else -1.0
    d1 = s / (1.0 + abs(t[i]))
    d2 = -1.0 / (1.0 + abs(t[i])) ** 2
    n = x.size
    if i == 0:
        g = np.full(n, -d1)
        H = np.full((n, n), d2)
    else:
        g = np.zeros(n)
        g[i - 1] = d1
        H = np.zeros((n, n))
        H[i - 1, i - 1] = d2
    return float(vals[i]), g, H, (i, s)


# ---------------------------------------------------------------------------
# functions of |x|_1; the two paper examples are 1-D and extend through the norm
# ---------------------------------------------------------------------------

def absval(x):
    s = _sign(x)
    return float(np.sum(np.abs(x))), s, np.zeros((x.size, x.size)), tuple(s.tolist())


def paper_ex_4_7(x):
    # sqrt(|x|_1 + 0.1)
    s = _sign(x)
    r = float(np.sum(np.abs(x))) + 0.1
    root = np.sqrt(r)
    return root, s / (2 * root), np.outer(s, s) * (-0.25 / (r * root)), tuple(s.tolist())


def paper_ex_3_6(x):
    # max{ sqrt(|x|_1), -4 |x|_1^2.5 + sum(x) + 1 }
    s = _sign(x)
    r = float(np.sum(np.abs(x)))
    p1 = np.sqrt(r)
    p2 = -4 * r**2.5 + float(np.sum(x)) + 1
    ss = np.outer(s, s)
    if p2 > p1:
        return p2, -10 * r**1.5 * s + 1, -15 * np.sqrt(r) * ss, (1,) + tuple(s.tolist())
    return p1, 0.5 * s / p1, -0.25 / (r * p1) * ss, (0,) + tuple(s.tolist())


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Entry:
    evaluate: RawEval
    min_n: int
    convex: bool
    x0: Callable[[int], np.ndarray]
    f_star: Callable[[int], Optional[float]]
    f_star_text: str


def _alternating(n):
    i = np.arange(1, n + 1)
    return np.where(i % 2 == 1, -1.5, 2.0)


def _maxq_x0(n):
    i = np.arange(1, n + 1, dtype=float)
    return np.where(i <= n / 2, i, -i)


REGISTRY: dict[str, _Entry] = {
    "maxq": _Entry(maxq, 1, True, _maxq_x0, lambda n: 0.0, "0"),
    "mxhilb": _Entry(mxhilb, 1, True, lambda n: np.ones(n), lambda n: 0.0, "0"),
    "chained_lq": _Entry(chained_lq, 2, True, lambda n: np.full(n, -0.5),
                         lambda n: -(n - 1) * np.sqrt(2.0), "-(n-1)*sqrt(2)"),
    "chained_cb3": _Entry(chained_cb3, 2, True, lambda n: np.full(n, 2.0),
                          lambda n: 2.0 * (n - 1), "2*(n-1)"),
    "active_faces": _Entry(active_faces, 1, False, lambda n: np.ones(n),
                           lambda n: 0.0, "0"),
    "chained_mifflin2": _Entry(chained_mifflin2, 2, False, _alternating,
                               lambda n: None, "unknown"),
    "chained_crescent1": _Entry(chained_crescent1, 2, False, _alternating,
                                lambda n: 0.0, "0"),
    "paper_ex_3_6": _Entry(paper_ex_3_6, 1, False, lambda n: np.full(n, 0.1 / n),
                           lambda n: None, "unknown"),
    "paper_ex_4_7": _Entry(paper_ex_4_7, 1, False, lambda n: np.full(n, -0.2 / n),
                           lambda n: float(np.sqrt(0.1)), "sqrt(0.1)"),
    "absval": _Entry(absval, 1, True, lambda n: np.arange(1, n + 1) / n,
                     lambda n: 0.0, "0"),
}

DEFAULT_SUITE = tuple(REGISTRY)
CONVEX_SUITE = tuple(k for k, e in REGISTRY.items() if e.convex)


def get_problem(name: str, n: int) -> ProblemSpec:
    try:
        entry = REGISTRY[name]
    except KeyError:
        raise UnknownProblem(name) from None
    if int(n) < entry.min_n:
        raise DimensionTooSmall(f"{name} needs n >= {entry.min_n}, got {n}")
    n = int(n)
    return ProblemSpec(
        name=name,
        n=n,
        x0=entry.x0(n),
        f_star=entry.f_star(n),
        convex=entry.convex,
        evaluate=entry.evaluate,
        min_n=entry.min_n,
    )


def list_problems():
    """Rows of ``(name, min_n, convex, f_star description)``."""
    return [(k, e.min_n, e.convex, e.f_star_text) for k, e in REGISTRY.items()]
