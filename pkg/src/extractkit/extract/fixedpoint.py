"""Fixed points of semi-contractions F(b) - F(a) <= (b - a)/2 on (0, inf)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import BracketError, ContractViolationError

TINY = 1e-300


@dataclass(frozen=True)
class FixedPointProblem:
    F: Callable[[float], float]
    bracket: tuple[float, float] = (0.0, 1.0)
    tol: float = 1e-10


@dataclass(frozen=True)
class FixedPointResult:
    alpha: float
    residual: float
    evaluations: int


def solve_fixed_point(p: FixedPointProblem) -> float:
    return solve_fixed_point_full(p).alpha


def solve_fixed_point_full(p: FixedPointProblem) -> FixedPointResult:
    """Bisection on G(a) = a - F(a) followed by one secant step.

    G is strictly increasing (slope >= 1/2) under the semi-contraction
    hypothesis. Every evaluated pair is checked against that hypothesis.
    """
    F = p.F
    seen: list[tuple[float, float]] = []

    def G(a: float) -> float:
        fa = F(a)
        seen.append((a, fa))
        return a - fa

    lo = max(p.bracket[0], TINY)
    g_lo = G(lo)
    if g_lo > 0 and lo > TINY:
        lo = TINY
        g_lo = G(lo)
    if g_lo > 0:
        raise BracketError(f"G({lo}) = {g_lo} > 0: no root in (0, inf)")
    if g_lo == 0:
        return FixedPointResult(lo, 0.0, len(seen))

    hi = max(p.bracket[1], 1.0)
    hi = max(hi, F(1.0) + 1.0)
    g_hi = G(hi)
    for _ in range(64):
        if g_hi > 0:
            break
        hi *= 2.0
        g_hi = G(hi)
    else:
        raise BracketError("no sign change after bracket expansion")

    while hi - lo > 4e-16 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = G(mid)
        if g_mid == 0.0:
            lo = hi = mid
            g_lo = g_hi = 0.0
            break
        if g_mid < 0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid

    best, g_best = (lo, g_lo) if abs(g_lo) <= abs(g_hi) else (hi, g_hi)
    if hi > lo and g_hi != g_lo:
        a = lo - g_lo * (hi - lo) / (g_hi - g_lo)
        if lo <= a <= hi:
            g_a = G(a)
            if abs(g_a) < abs(g_best):
                best, g_best = a, g_a

    _check_contract(seen)
    if abs(g_best) > p.tol:
        raise ContractViolationError(
            f"residual {abs(g_best):.3e} above tolerance {p.tol:.1e} at alpha={best}"
        )
    return FixedPointResult(best, abs(g_best), len(seen))


def _check_contract(seen: list[tuple[float, float]]) -> None:
    pts = sorted(seen)
    for (a, fa), (b, fb) in zip(pts, pts[1:]):
        if b > a and fb - fa > 0.5 * (b - a) + 1e-12 * (1.0 + abs(fa)):
            raise ContractViolationError(
                f"F({b}) - F({a}) = {fb - fa:.3e} exceeds (b - a)/2 = {0.5 * (b - a):.3e}"
            )
