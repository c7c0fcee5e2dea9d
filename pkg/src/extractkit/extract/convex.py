"""Radial diffeomorphism between convex bodies given by their gauges."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..errors import InvalidGaugeError
from ..gauges import SmoothStep
from ..seqspace import SparseVec

Gauge = Callable[[np.ndarray], float]


class ConvexBodyDiffeo:
    """g(x) = (theta(mu_U) mu_U / mu_V + 1 - theta(mu_U)) x for U inside V.

    theta rises on [1/2, 1], so g is the identity on (1/2)U and carries the
    boundary of U onto the boundary of V.
    """

    def __init__(self, mu_u: Gauge, mu_v: Gauge):
        self.mu_u = mu_u
        self.mu_v = mu_v
        self.theta = SmoothStep(0.5, 1.0)

    def _gauges(self, x: np.ndarray) -> tuple[float, float]:
        mu, mv = float(self.mu_u(x)), float(self.mu_v(x))
        if mu <= 0.0 or mv <= 0.0:
            raise InvalidGaugeError(f"gauge vanishes on a nonzero vector ({mu}, {mv})")
        return mu, mv

    def forward(self, x: np.ndarray) -> np.ndarray:
        if not np.any(x):
            return x.copy()
        mu, mv = self._gauges(x)
        t = float(self.theta(mu))
        return (t * mu / mv + 1.0 - t) * x

    def inverse(self, y: np.ndarray) -> np.ndarray:
        if not np.any(y):
            return y.copy()
        M, mv = self._gauges(y)
        lam = M / mv  # mu_V(u) = 1/lam on the U-unit direction u
        if lam == 1.0:
            return y.copy()
        th = self.theta

        def k(t: float) -> float:
            return t * (1.0 + float(th(t)) * (lam - 1.0)) - M

        lo, hi = min(M, M / lam), max(M, M / lam)
        if k(lo) >= 0.0:
            t = lo
        elif k(hi) <= 0.0:
            t = hi
        else:
            t = brentq(k, lo, hi, xtol=1e-15 * max(1.0, hi), rtol=4 * np.finfo(float).eps, maxiter=200)
        return (t / M) * y


class _Composite:
    def __init__(self, inner: ConvexBodyDiffeo, outer: ConvexBodyDiffeo):
        self.inner, self.outer = inner, outer

    def forward(self, x):
        return self.outer.forward(self.inner.inverse(x))

    def inverse(self, y):
        return self.inner.forward(self.outer.inverse(y))


def body_diffeo(mu_u: Gauge, mu_v: Gauge, nested: bool = True):
    """Diffeo carrying U onto V; for non-nested bodies it passes through
    W = {mu_U + mu_V <= 1}, which lies inside both."""
    if nested:
        return ConvexBodyDiffeo(mu_u, mu_v)

    def mu_w(x):
        return mu_u(x) + mu_v(x)

    return _Composite(ConvexBodyDiffeo(mu_w, mu_u), ConvexBodyDiffeo(mu_w, mu_v))


def convex_body_diffeo(mu_u: Gauge, mu_v: Gauge, x, nested: bool = True):
    """Apply the U-to-V diffeo to a dense array or SparseVec."""
    g = body_diffeo(mu_u, mu_v, nested)
    if isinstance(x, SparseVec):
        return SparseVec.from_dense(g.forward(x.to_dense()), x.dim)
    return g.forward(np.asarray(x, dtype=float))
