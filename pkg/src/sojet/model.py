"""Finite second-order max-model built from sampled jet elements."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .exceptions import EmptyModel
from .oracle import JetElement

BALL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModelSet:
    """A finite set ``W`` of jet elements around ``center`` with radius ``radius``.

    The model is ``T(z) = max_k f(y_k) + xi_k^T (z - y_k) + 0.5 (z - y_k)^T H_k (z - y_k)``.
    """

    center: np.ndarray
    radius: float
    elements: tuple = ()

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "elements", tuple(self.elements))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def n(self) -> int:
        return self.center.size

    # stacked coefficient arrays, shape (m,), (m, n), (m, n), (m, n, n)
    @cached_property
    def F(self):
        return np.array([e.fy for e in self.elements])

    @cached_property
    def Y(self):
        return np.array([e.y for e in self.elements]).reshape(len(self), self.n)

    @cached_property
    def G(self):
        return np.array([e.xi for e in self.elements]).reshape(len(self), self.n)

    @cached_property
    def Hs(self):
        return np.array([e.H for e in self.elements]).reshape(len(self), self.n, self.n)

    def distances(self, point=None) -> np.ndarray:
        p = self.center if point is None else np.asarray(point, dtype=float)
        return np.linalg.norm(self.Y - p, axis=1)

    def contains_base_point(self, z, tol: float = 1e-12) -> bool:
        return bool(len(self)) and bool(np.min(self.distances(z)) <= tol)

    def with_element(self, J: JetElement) -> "ModelSet":
        return ModelSet(self.center, self.radius, self.elements + (J,))

    def restricted(self, radius: float) -> "ModelSet":
        """Drop elements outside the ball of the given radius around the center."""
        keep = [e for e, d in zip(self.elements, self.distances())
                if d <= radius + BALL_TOL] if len(self) else []
        return ModelSet(self.center, radius, keep)

    def values(self, z) -> np.ndarray:
        """All individual expansions at ``z`` (one per element)."""
        if not len(self):
            raise EmptyModel("model set has no elements")
        D = np.asarray(z, dtype=float) - self.Y
        return self.F + np.einsum("ki,ki->k", self.G, D) \
            + 0.5 * np.einsum("ki,kij,kj->k", D, self.Hs, D)


def eval_model(W: ModelSet, z) -> tuple[float, int]:
    """Value of the max-model at ``z`` and the lowest index attaining it."""
    v = W.values(z)
    k = int(np.argmax(v))
    return float(v[k]), k


def carry_over(W_prev: Optional[ModelSet], x_new, eps: float, fresh: JetElement,
               cap: Optional[int] = None) -> ModelSet:
    """Re-center a model set at ``x_new``.

    Keeps ``fresh`` plus every previous element whose base point lies in the
    closed ``eps``-ball around ``x_new``. With ``cap`` set, the farthest
    elements are evicted until the set fits; ``fresh`` is never evicted.
    """
    x_new = np.asarray(x_new, dtype=float)
    if not np.array_equal(fresh.y, x_new):
        raise ValueError("fresh element must be based at x_new")
    old: Sequence[JetElement] = W_prev.elements if W_prev is not None else ()
    kept = []
    for e in old:
        d = float(np.linalg.norm(e.y - x_new))
        if d <= eps + BALL_TOL and d > 0.0:
            kept.append((d, e))
    if cap is not None and len(kept) + 1 > cap:
        # stable sort keeps the original order among equal distances
        kept.sort(key=lambda t: t[0])
        kept = kept[: max(cap - 1, 0)]
        # restore original order of the survivors
        order = {id(e): i for i, e in enumerate(old)}
        kept.sort(key=lambda t: order[id(t[1])])
    return ModelSet(x_new, eps, (fresh,) + tuple(e for _, e in kept))
