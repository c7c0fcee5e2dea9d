"""Scalar gauges: smooth steps, the weighted functional omega, the deleting
curve gamma and the smooth-square gauge.

All transition profiles come from one tabulated C-infinity function

    Theta(s) = int_0^s rho / int_0^1 rho,   rho(s) = exp(-c / (s (1 - s)))

with sharpness c = 0.25. Values are evaluated by quintic Hermite interpolation
on a 4097-node table (exact plateaus outside (0, 1)); derivatives use rho
directly.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BoundViolationError, DomainError, SingularPointError
from .seqspace import BlockDecomposition, SparseVec

SHARPNESS = 0.25
TABLE_NODES = 4097
SQUARE_TABLE = 4096


def _rho(s: np.ndarray, c: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = (s > 0) & (s < 1)
    sm = s[m]
    out[m] = np.exp(-c / (sm * (1 - sm)))
    return out


def _rho_prime(s: np.ndarray, c: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = (s > 0) & (s < 1)
    sm = s[m]
    q = sm * (1 - sm)
    out[m] = np.exp(-c / q) * c * (1 - 2 * sm) / (q * q)
    return out


# quintic Hermite basis on [0, 1]: values, first and second derivatives
def _h5(t):
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    return (
        1 - 10 * t3 + 15 * t4 - 6 * t5,
        t - 6 * t3 + 8 * t4 - 3 * t5,
        0.5 * (t2 - 3 * t3 + 3 * t4 - t5),
        10 * t3 - 15 * t4 + 6 * t5,
        -4 * t3 + 7 * t4 - 3 * t5,
        0.5 * (t3 - 2 * t4 + t5),
    )


class _Profile:
    """Tables of Theta and its antiderivative I on a uniform grid."""

    def __init__(self, sharpness: float = SHARPNESS, nodes: int = TABLE_NODES):
        self.c = sharpness
        self.n = nodes - 1
        self.h = 1.0 / self.n
        s = np.linspace(0.0, 1.0, nodes)
        gx, gw = np.polynomial.legendre.leggauss(16)
        a, b = s[:-1], s[1:]
        half = 0.5 * (b - a)
        pts = (0.5 * (a + b))[:, None] + half[:, None] * gx[None, :]
        r = _rho(pts, sharpness)
        seg = (r * gw).sum(axis=1) * half
        z = seg.sum()
        self.z = z
        theta = np.concatenate([[0.0], np.cumsum(seg)]) / z
        theta[-1] = 1.0
        # int_{s_i}^{s_{i+1}} Theta = h Theta_i + int (s_{i+1} - t) rho(t) / z dt
        seg_i = self.h * theta[:-1] + ((b[:, None] - pts) * r * gw).sum(axis=1) * half / z
        anti = np.concatenate([[0.0], np.cumsum(seg_i)])
        d1 = _rho(s, sharpness) / z
        d2 = _rho_prime(s, sharpness) / z
        self.theta = (theta, d1, d2)
        self.anti = (anti, theta, d1)
        # python lists make scalar lookups cheap
        self._theta_l = tuple(a.tolist() for a in self.theta)
        self._anti_l = tuple(a.tolist() for a in self.anti)
        self.peak = float((_rho(np.linspace(0, 1, 200001), sharpness) / z).max())

    def _interp(self, tab, s: np.ndarray) -> np.ndarray:
        f, f1, f2 = tab
        x = np.clip(s, 0.0, 1.0) * self.n
        i = np.minimum(x.astype(int), self.n - 1)
        t = x - i
        h = self.h
        b0, b1, b2, b3, b4, b5 = _h5(t)
        return (
            f[i] * b0 + h * f1[i] * b1 + h * h * f2[i] * b2
            + f[i + 1] * b3 + h * f1[i + 1] * b4 + h * h * f2[i + 1] * b5
        )

    def _interp1(self, tab, s: float) -> float:
        f, f1, f2 = tab
        x = s * self.n
        i = min(int(x), self.n - 1)
        t = x - i
        h = self.h
        b0, b1, b2, b3, b4, b5 = _h5(t)
        return (
            f[i] * b0 + h * f1[i] * b1 + h * h * f2[i] * b2
            + f[i + 1] * b3 + h * f1[i + 1] * b4 + h * h * f2[i + 1] * b5
        )

    def value(self, s):
        if np.ndim(s) == 0:
            s = float(s)
            if s <= 0.0:
                return 0.0
            if s >= 1.0:
                return 1.0
            return min(1.0, max(0.0, self._interp1(self._theta_l, s)))
        s = np.asarray(s, dtype=float)
        out = np.clip(self._interp(self.theta, s), 0.0, 1.0)
        out[s <= 0.0] = 0.0
        out[s >= 1.0] = 1.0
        return out

    def deriv(self, s):
        if np.ndim(s) == 0:
            s = float(s)
            if s <= 0.0 or s >= 1.0:
                return 0.0
            return math.exp(-self.c / (s * (1 - s))) / self.z
        return _rho(s, self.c) / self.z

    def second(self, s):
        return _rho_prime(s, self.c) / self.z

    def antiderivative(self, s: float) -> float:
        """int_0^s Theta for s in [0, 1]."""
        if s <= 0.0:
            return 0.0
        if s >= 1.0:
            return float(self.anti[0][-1])
        return self._interp1(self._anti_l, s)


@lru_cache(maxsize=4)
def profile(sharpness: float = SHARPNESS) -> _Profile:
    return _Profile(sharpness)


@dataclass(frozen=True)
class SmoothStep:
    """C-infinity transition between exact plateaus.

    Rising: 0 for t <= lo, 1 for t >= hi. Falling: 1 for t <= lo, 0 for t >= hi.
    ``bound`` (if given) is checked against a 1e5-point scan of |derivative|.
    """

    lo: float
    hi: float
    rising: bool = True
    bound: float | None = None
    peak: float = field(init=False)

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"need lo < hi, got {self.lo}, {self.hi}")
        grid = np.linspace(self.lo, self.hi, 100001)
        peak = float(np.abs(self.deriv(grid)).max())
        object.__setattr__(self, "peak", peak)
        if self.bound is not None and peak > self.bound:
            raise BoundViolationError(f"derivative peak {peak} exceeds bound {self.bound}")

    def _s(self, t):
        s = (t - self.lo) / (self.hi - self.lo)
        return s if self.rising else 1.0 - s

    def __call__(self, t):
        return profile().value(self._s(t))

    def deriv(self, t):
        d = profile().deriv(self._s(t)) / (self.hi - self.lo)
        return d if self.rising else -d


def smoothstep_eval(s: SmoothStep, t):
    return s(t)


def smoothstep_deriv(s: SmoothStep, t):
    return s.deriv(t)


def deleting_theta() -> SmoothStep:
    """1 on [0, 1/2], 0 on [1, inf), |derivative| <= 4."""
    return SmoothStep(0.5, 1.0, rising=False, bound=4.0)


@dataclass(frozen=True)
class OmegaFunctional:
    """omega(x) = |diag(a) x|_2 with a = base^-j for the j-th index of ``order``."""

    order: tuple[int, ...]
    dim: int
    base: float = 4.0
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))
        w = np.zeros(self.dim)
        for j, i in enumerate(self.order, start=1):
            w[i - 1] = self.base ** (-j)
        object.__setattr__(self, "weights", w)

    @classmethod
    def default(cls, dim: int = 64) -> "OmegaFunctional":
        return cls(tuple(range(1, dim + 1)), dim)

    def weight(self, i: int) -> float:
        return float(self.weights[i - 1])

    def dense(self, x: np.ndarray) -> float:
        return math.sqrt(float(np.dot(self.weights * x, self.weights * x)))

    def __call__(self, v: SparseVec) -> float:
        return math.sqrt(math.fsum((self.weights[i - 1] * x) ** 2 for i, x in v.entries.items()))


def omega(w: OmegaFunctional, v: SparseVec) -> float:
    return w(v)


def omega_grad(w: OmegaFunctional, v: SparseVec) -> SparseVec:
    val = w(v)
    if val == 0.0:
        raise SingularPointError("omega is not differentiable at 0")
    return SparseVec({i: w.weights[i - 1] ** 2 * x / val for i, x in v.entries.items()}, v.dim)


@dataclass(frozen=True)
class DeletingCurve:
    """gamma(t) = sum_k theta(2^(k-1) t) y_k with y_k = e_{b(k)} / 4."""

    theta: SmoothStep
    anchors: tuple[int, ...]
    dim: int

    def coeffs(self, t):
        """Anchor coefficients; shape (K,) for scalar t, (len(t), K) for arrays."""
        if np.ndim(t) == 0:
            return np.array(self.coeff_list(float(t)))
        scale = 2.0 ** np.arange(len(self.anchors))
        t = np.asarray(t, dtype=float)
        return 0.25 * self.theta(t[:, None] * scale[None, :])

    def coeff_list(self, t: float) -> list[float]:
        # at most one anchor is strictly inside the transition band
        out = []
        s = t
        for _ in self.anchors:
            if s <= self.theta.lo:
                out.append(0.25)
            elif s >= self.theta.hi:
                out.append(0.0)
            else:
                out.append(0.25 * self.theta(s))
            s *= 2.0
        return out

    def dense(self, t: float) -> np.ndarray:
        out = np.zeros(self.dim)
        out[np.asarray(self.anchors) - 1] = self.coeffs(t)
        return out

    def __call__(self, t: float) -> SparseVec:
        if not t > 0:
            raise DomainError(f"gamma defined on (0, inf), got t={t}")
        c = self.coeff_list(t)
        return SparseVec({b: float(v) for b, v in zip(self.anchors, c)}, self.dim)


def gamma(c: DeletingCurve, t: float) -> SparseVec:
    return c(t)


class SmoothSquare:
    """Gauge of a C-infinity symmetric convex body with flat sides.

    First-quadrant boundary: segment [0, 1/2] x {1}, a corner arc, segment
    {1} x [0, 1/2]. In rotated coordinates u = (x - y)/sqrt2, v = (x + y)/sqrt2
    the arc is v = V(u) on |u| <= c with V' = 1 - 2 Theta((u + c) / 2c), which
    has flat contact of every order with both segments.
    """

    def __init__(self, table_size: int = SQUARE_TABLE):
        self.table_size = table_size
        self.c = 1.0 / (2.0 * math.sqrt(2.0))
        self._p = profile()
        u = np.linspace(-self.c, self.c, table_size)
        self._u = u
        self._ul = u.tolist()
        self._ratio = [x / self._v(x) for x in self._ul]

    def _v(self, u: float) -> float:
        c = self.c
        s = (u + c) / (2 * c)
        return 3 * c + (u + c) - 4 * c * self._p.antiderivative(s)

    def _vp(self, u: float) -> float:
        return 1.0 - 2.0 * self._p.value((u + self.c) / (2 * self.c))

    def _arc_u(self, q: float) -> float:
        # solve u = q V(u); u - q V(u) is increasing since |q V'| < 1
        j = bisect.bisect_left(self._ratio, q)
        j = min(max(j, 1), self.table_size - 1)
        lo, hi = self._ul[j - 1], self._ul[j]
        r0, r1 = self._ratio[j - 1], self._ratio[j]
        u = lo + (hi - lo) * (q - r0) / (r1 - r0) if r1 > r0 else lo
        for _ in range(50):
            g = u - q * self._v(u)
            if g > 0:
                hi = u
            else:
                lo = u
            step = g / (1.0 - q * self._vp(u))
            nu = u - step
            if not lo <= nu <= hi:
                nu = 0.5 * (lo + hi)
            if abs(nu - u) <= 1e-15 or hi - lo <= 1e-15:
                return nu
            u = nu
        return u

    def mu(self, a: float, b: float) -> float:
        a, b = abs(a), abs(b)
        if 2 * b <= a:
            return a
        if 2 * a <= b:
            return b
        u = self._arc_u((a - b) / (a + b))
        return (a + b) / (math.sqrt(2.0) * self._v(u))

    def grad(self, a: float, b: float) -> tuple[float, float]:
        if a == 0.0 and b == 0.0:
            raise SingularPointError("gauge is not differentiable at the origin")
        sa = math.copysign(1.0, a) if a != 0 else 0.0
        sb = math.copysign(1.0, b) if b != 0 else 0.0
        x, y = abs(a), abs(b)
        if 2 * y <= x:
            return (sa, 0.0)
        if 2 * x <= y:
            return (0.0, sb)
        u = self._arc_u((x - y) / (x + y))
        vp = self._vp(u)
        den = math.sqrt(2.0) * (self._v(u) - u * vp)
        return (sa * (1 - vp) / den, sb * (1 + vp) / den)

    def boundary_point(self, u: float) -> tuple[float, float]:
        v = self._v(u)
        return ((v + u) / math.sqrt(2.0), (v - u) / math.sqrt(2.0))


def mu_square(sq: SmoothSquare, a: float, b: float) -> float:
    return sq.mu(a, b)


def mu_square_grad(sq: SmoothSquare, a: float, b: float) -> tuple[float, float]:
    return sq.grad(a, b)


@dataclass(frozen=True)
class GaugeKit:
    theta: SmoothStep
    omega: OmegaFunctional
    curve: DeletingCurve
    square: SmoothSquare

    @classmethod
    def build(cls, decomp: BlockDecomposition, extraction: str = "extraction",
              e2_blocks: Sequence[str] | None = None) -> "GaugeKit":
        """omega enumerates the extraction block first, then the rest of E2."""
        e2_blocks = list(e2_blocks or [extraction])
        order = list(decomp.blocks[extraction])
        for name in e2_blocks:
            if name != extraction:
                order += list(decomp.blocks[name])
        theta = deleting_theta()
        om = OmegaFunctional(tuple(order), decomp.dim)
        curve = DeletingCurve(theta, tuple(decomp.blocks[extraction]), decomp.dim)
        return cls(theta, om, curve, _square())

    def config(self) -> dict:
        return {
            "omega_weights_base": int(self.omega.base),
            "theta_bound": int(self.theta.bound),
            "square_arc_table": self.square.table_size,
        }


@lru_cache(maxsize=1)
def _square() -> SmoothSquare:
    return SmoothSquare()


def rho(sq: SmoothSquare, psi_val: float, w: OmegaFunctional, x2: SparseVec) -> float:
    if psi_val < 0:
        raise DomainError(f"psi value must be nonnegative, got {psi_val}")
    return sq.mu(psi_val, w(x2))
