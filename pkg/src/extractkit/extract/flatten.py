"""Graph flattening: the staircase F, the twin functions phi and phi~, and the
homeomorphisms h(x) = (x1, x2 - F(phi(x), x1)) and its phi~ twin."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ContractionError, ScheduleError
from ..gauges import SmoothStep, profile
from .shepard import CertifiedApproximants, ShepardBlend, SoftDistance, certify

N_SERIES = 12
SOFTMIN_P = 8


def softmin(a: float, b: float, p: int = SOFTMIN_P) -> float:
    """Smooth lower bound of min(a, b) for positive arguments, within 2^(-1/p)."""
    if a <= 0.0 or b <= 0.0:
        return min(a, b)
    m = min(a, b)
    return m * ((m / a) ** p + (m / b) ** p) ** (-1.0 / p)


@dataclass(frozen=True)
class ProductWindow:
    """U = {|x1 - c1| < r1} x {|x2 - c2| < r2} on dense block arrays."""

    c1: np.ndarray
    r1: float
    c2: np.ndarray
    r2: float

    def contains(self, x1: np.ndarray, x2: np.ndarray) -> bool:
        return bool(np.linalg.norm(x1 - self.c1) < self.r1 and np.linalg.norm(x2 - self.c2) < self.r2)

    def clearance(self, x1: np.ndarray, v: np.ndarray) -> float:
        """Smoothed distance from (x1, v) to the complement (nonpositive outside)."""
        return softmin(self.r1 - float(np.linalg.norm(x1 - self.c1)),
                       self.r2 - float(np.linalg.norm(v - self.c2)))


class Staircase:
    """F(r, x1) = f_1 + sum_{n<N} h_{n+1}(r)(f_{n+1} - f_n) + h_{N+1}(r)(fbar - f_N),

    with f_n = lam_n fbar + (1 - lam_n) fbar_n, lam_n = 0 on {d <= scale/(n+1)}
    and 1 on {d > scale/n}. The last term folds the series tail into fbar so
    F(r, .) = fbar exactly for r >= 1.
    """

    def __init__(self, fbar: ShepardBlend, approx: CertifiedApproximants,
                 dist: SoftDistance, scale: float = 1.0, corpus: np.ndarray | None = None):
        if corpus is not None:
            certify(approx, fbar, corpus)
        self.fbar = fbar
        self.approx = approx
        self.dist = dist
        self.N = len(approx.maps)
        self.lam = [SmoothStep(scale / (n + 1), scale / n) for n in range(1, self.N + 1)]
        # h[n] for n = 2..N+1 rises on [1 - 2^(1-n), 1 - 2^-n]
        self.h = {n: SmoothStep(1 - 2.0 ** (1 - n), 1 - 2.0 ** (-n), bound=2.0 ** (n + 1))
                  for n in range(2, self.N + 2)}
        self.sup_error = max(approx.bounds)

    def _fs(self, x1: np.ndarray, upto: int):
        fb = self.fbar(x1)
        d = self.dist(x1)
        out = []
        for n in range(1, upto + 1):
            lam = self.lam[n - 1](d)
            if lam == 1.0:
                out.append(fb)
            else:
                out.append(lam * fb + (1 - lam) * self.approx.maps[n - 1](x1))
        return fb, out

    def _active(self, r: float) -> int:
        # h_{n+1}(r) > 0 iff r > 1 - 2^(-n)
        k = 0
        for n in range(1, self.N + 1):
            if r > 1 - 2.0 ** (-n):
                k = n
            else:
                break
        return k

    def __call__(self, r: float, x1: np.ndarray) -> np.ndarray:
        if r >= 1 - 2.0 ** (-(self.N + 1)):
            return self.fbar(x1)
        k = self._active(r)
        fb, fs = self._fs(x1, min(k + 1, self.N))
        val = fs[0].copy()
        for n in range(1, k + 1):
            nxt = fs[n] if n < self.N else fb
            val += self.h[n + 1](r) * (nxt - fs[n - 1])
        return val

    def deriv_r(self, r: float, x1: np.ndarray) -> np.ndarray:
        k = self._active(r)
        fb, fs = self._fs(x1, min(k + 1, self.N))
        val = np.zeros_like(fb)
        for n in range(1, k + 1):
            nxt = fs[n] if n < self.N else fb
            val += self.h[n + 1].deriv(r) * (nxt - fs[n - 1])
        return val


def staircase_F(fbar, approx, dist, scale: float = 1.0, corpus=None) -> Staircase:
    return Staircase(fbar, approx, dist, scale, corpus)


@dataclass(frozen=True)
class TwinSchedule:
    """Constants a_n, b_n = 2 a_n, c_n, d_n, eps_n, delta_n = eps_n + b_n.

    c_n is capped so a profile of height c_n fits on [a_n, b_n] with slope <= d_n.
    """

    eps: float
    N: int = N_SERIES
    a: tuple = field(init=False)
    b: tuple = field(init=False)
    c: tuple = field(init=False)
    d: tuple = field(init=False)
    e: tuple = field(init=False)
    delta: tuple = field(init=False)

    def __post_init__(self):
        eps, N = self.eps, self.N
        if not 0 < eps <= 1:
            raise ScheduleError(f"eps must lie in (0, 1], got {eps}")
        peak = profile().peak
        a = [eps * 4.0 ** -n for n in range(1, N + 2)]
        b = [2 * x for x in a]
        d = [eps * 4.0 ** -n for n in range(1, N + 2)]
        c = [min(eps * 16.0 ** -n, d[n - 1] * (b[n - 1] - a[n - 1]) / peak * (1 - 1e-9))
             for n in range(1, N + 2)]
        e = [eps * 16.0 ** -(n + 1) for n in range(1, N + 2)]
        for name, val in zip("abcde", (a, b, c, d, e)):
            object.__setattr__(self, name, tuple(val))
        object.__setattr__(self, "delta", tuple(x + y for x, y in zip(e, b)))
        self.validate()

    def validate(self) -> None:
        peak = profile().peak
        for n in range(self.N):
            if not self.a[n] < self.b[n]:
                raise ScheduleError(f"a_{n + 1} >= b_{n + 1}")
            if not self.e[n + 1] + self.b[n + 1] < self.a[n] - self.e[n]:
                raise ScheduleError(f"nesting fails at n={n + 1}")
            if self.c[n] * peak / (self.b[n] - self.a[n]) > self.d[n]:
                raise ScheduleError(f"profile slope exceeds d_{n + 1}")
        if sum(self.c[: self.N]) > self.eps / 2:
            raise ScheduleError("sum c_n exceeds eps/2")
        if sum(self.d[: self.N]) > 0.5:
            raise ScheduleError("sum d_n exceeds 1/2")


class TwinPhi:
    """phi = 1 - sum(c_n - psi_n), phi~ = 1 - sum(c_n - lam~_n psi_n), with
    psi_n = c_n theta_n(|x2 - fbar(x1)|).

    The blend fbar is smooth, so it serves as its own approximant g_n.
    """

    def __init__(self, fbar: Callable, schedule: TwinSchedule, window: ProductWindow):
        self.fbar = fbar
        self.s = schedule
        self.window = window
        N = schedule.N
        self.theta = [SmoothStep(schedule.a[n], schedule.b[n], rising=False) for n in range(N)]
        # lam~_n: 1 for clearance <= delta_n, 0 for clearance >= delta_{n-1}
        self.lam = [None] + [SmoothStep(schedule.delta[n], schedule.delta[n - 1], rising=False)
                             for n in range(1, N)]
        self.dstar = math.fsum(schedule.c[:N])

    def _r(self, x1, x2):
        fb = self.fbar(x1)
        diff = x2 - fb
        return float(np.linalg.norm(diff)), diff, fb

    def values(self, x1: np.ndarray, x2: np.ndarray) -> tuple[float, float]:
        r, _, fb = self._r(x1, x2)
        cl = self.window.clearance(x1, fb)
        gap = gap_t = 0.0
        for n in range(self.s.N):
            c = self.s.c[n]
            psi = c * self.theta[n](r)
            lam = 1.0 if n == 0 else self.lam[n](cl)
            gap += c - psi
            gap_t += c - lam * psi
        return 1.0 - gap, 1.0 - gap_t

    def phi(self, x1, x2) -> float:
        return self.values(x1, x2)[0]

    def phi_tilde(self, x1, x2) -> float:
        return self.values(x1, x2)[1]

    def grad2(self, x1, x2, tilde: bool = False) -> np.ndarray:
        r, diff, fb = self._r(x1, x2)
        if r == 0.0:
            return np.zeros_like(diff)
        cl = self.window.clearance(x1, fb) if tilde else 0.0
        acc = 0.0
        for n in range(self.s.N):
            lam = 1.0 if (n == 0 or not tilde) else self.lam[n](cl)
            acc += lam * self.s.c[n] * self.theta[n].deriv(r)
        return acc * diff / r


def twin_phi(fbar, window: ProductWindow, eps: float, N: int = N_SERIES) -> TwinPhi:
    return TwinPhi(fbar, TwinSchedule(eps, N), window)


@dataclass
class PicardTrace:
    steps: list = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        s = self.steps
        return [b / a for a, b in zip(s, s[1:]) if a > 1e-13]


class FlattenMaps:
    """The flattening pair (h, phi-map) sharing the staircase F."""

    def __init__(self, F: Staircase, twin: TwinPhi, eps: float,
                 tol: float = 1e-10, max_iter: int = 200):
        self.F = F
        self.twin = twin
        self.eps = eps
        self.tol = tol
        self.max_iter = max_iter

    def d(self, x1, x2, which: str = "h") -> np.ndarray:
        p, pt = self.twin.values(x1, x2)
        return self.F(p if which == "h" else pt, x1)

    def forward(self, x1, x2, which: str = "h") -> np.ndarray:
        return x2 - self.d(x1, x2, which)

    def inverse(self, x1, y, which: str = "h", trace: PicardTrace | None = None) -> np.ndarray:
        """Solve z - d(x1, z) = y by z <- y + d(x1, z), starting from z = y."""
        z = y + self.d(x1, y, which)
        prev = None
        if trace is not None:
            trace.steps.append(float(np.linalg.norm(z - y)))
        high = 0
        for _ in range(self.max_iter):
            z_new = y + self.d(x1, z, which)
            step = float(np.linalg.norm(z_new - z))
            if trace is not None:
                trace.steps.append(step)
            z = z_new
            if step <= self.tol:
                return z
            if prev is not None and prev > 0 and step / prev > 0.9:
                high += 1
                if high >= 3:
                    raise ContractionError(f"Picard ratio {step / prev:.3f} > 0.9")
            else:
                high = 0
            prev = step
        raise ContractionError(f"Picard did not reach {self.tol} in {self.max_iter} steps")

    @staticmethod
    def modulus(eta: float) -> float:
        """|x2 - x2'| <= eta/2 keeps h^-1 within eta (h^-1 is 4/3-Lipschitz in x2)."""
        return eta / 2


def flatten_forward(m: FlattenMaps, x1, x2, which: str = "h"):
    return m.forward(x1, x2, which)


def flatten_inverse(m: FlattenMaps, x1, y, which: str = "h"):
    return m.inverse(x1, y, which)
