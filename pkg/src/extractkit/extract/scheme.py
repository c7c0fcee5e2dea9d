"""Extraction scheme h(x1, x2) = (x1, x2 + gamma(rho(x1, x2))) and its inverse."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError, ExcludedSetError
from ..gauges import GaugeKit
from ..seqspace import BlockDecomposition, ProductPoint, SparseVec
from .fixedpoint import FixedPointProblem, solve_fixed_point_full


class DenseScheme:
    """Scheme kernel on dense second-component arrays.

    ``positions`` lists the 1-based indices represented by the array slots.
    """

    def __init__(self, kit: GaugeKit, positions: np.ndarray, tau_fp: float = 1e-10):
        self.kit = kit
        self.positions = np.asarray(positions, dtype=int)
        self.w = kit.omega.weights[self.positions - 1]
        slot = {int(p): k for k, p in enumerate(self.positions)}
        missing = [b for b in kit.curve.anchors if b not in slot]
        if missing:
            raise DomainError(f"anchors {missing[:3]} not in the second block")
        self.anchor_slots = np.array([slot[b] for b in kit.curve.anchors], dtype=int)
        self.anchor_w2 = (self.w[self.anchor_slots] ** 2).tolist()
        self.tau_fp = tau_fp
        self.square = kit.square

    def omega(self, y: np.ndarray) -> float:
        wy = self.w * y
        return math.sqrt(float(np.dot(wy, wy)))

    def rho(self, psi_val: float, y: np.ndarray) -> float:
        return self.square.mu(psi_val, self.omega(y))

    def gamma(self, t: float) -> np.ndarray:
        out = np.zeros(len(self.positions))
        out[self.anchor_slots] = self.kit.curve.coeff_list(t)
        return out

    def forward(self, psi_val: float, y: np.ndarray) -> tuple[np.ndarray, float]:
        r = self.rho(psi_val, y)
        if r >= 1.0:
            return y, r
        if r == 0.0:
            raise ExcludedSetError("point lies in the excluded set K")
        return y + self.gamma(r), r

    def fixed_point_map(self, psi_val: float, y: np.ndarray) -> Callable[[float], float]:
        """F(a) = rho(y1, y - gamma(a)) with the non-anchor part precomputed."""
        wy = self.w * y
        base = float(np.dot(wy, wy))
        ya = y[self.anchor_slots].tolist()
        base -= sum(w2 * v * v for w2, v in zip(self.anchor_w2, ya))
        coeffs = self.kit.curve.coeff_list
        mu = self.square.mu
        pairs = list(zip(self.anchor_w2, ya))

        def F(a: float) -> float:
            c = coeffs(a)
            s = base
            for (w2, v), g in zip(pairs, c):
                s += w2 * (v - g) * (v - g)
            return mu(psi_val, math.sqrt(max(s, 0.0)))

        return F

    def inverse(self, psi_val: float, y: np.ndarray) -> tuple[np.ndarray, float]:
        r = self.rho(psi_val, y)
        if r >= 1.0:
            return y, r
        res = solve_fixed_point_full(
            FixedPointProblem(self.fixed_point_map(psi_val, y), (0.0, 1.0), self.tau_fp)
        )
        return y - self.gamma(res.alpha), res.alpha


@dataclass(frozen=True)
class ExtractionScheme:
    """psi: nonnegative callback on first-block vectors; K = psi^-1(0) x {0}."""

    psi: Callable[[SparseVec], float]
    kit: GaugeKit
    decomp: BlockDecomposition
    tau_K: float = 0.0
    tau_fp: float = 1e-10
    _dense: DenseScheme = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_dense", DenseScheme(self.kit, self.decomp.positions("E2") + 1, self.tau_fp)
        )

    def _psi(self, x1: SparseVec) -> float:
        v = float(self.psi(x1))
        if v < 0:
            raise DomainError(f"psi must be nonnegative, got {v}")
        return v

    def _y(self, x2: SparseVec) -> np.ndarray:
        return x2.to_dense()[self._dense.positions - 1]

    def _vec(self, y: np.ndarray, dim: int) -> SparseVec:
        out = np.zeros(dim)
        out[self._dense.positions - 1] = y
        return SparseVec.from_dense(out)

    def rho(self, p: ProductPoint) -> float:
        return self._dense.rho(self._psi(p.x1), self._y(p.x2))

    def forward(self, p: ProductPoint) -> ProductPoint:
        psi_val = self._psi(p.x1)
        y = self._y(p.x2)
        if psi_val <= self.tau_K and self._dense.omega(y) <= self.tau_K:
            raise ExcludedSetError("point lies in the excluded set K")
        out, r = self._dense.forward(psi_val, y)
        if r >= 1.0:
            return p
        return ProductPoint(p.x1, self._vec(out, p.x2.dim))

    def inverse_with_alpha(self, q: ProductPoint) -> tuple[ProductPoint, float]:
        psi_val = self._psi(q.x1)
        out, a = self._dense.inverse(psi_val, self._y(q.x2))
        if a >= 1.0:
            return q, a
        return ProductPoint(q.x1, self._vec(out, q.x2.dim)), a

    def inverse(self, q: ProductPoint) -> ProductPoint:
        return self.inverse_with_alpha(q)[0]


def scheme_forward(s: ExtractionScheme, p: ProductPoint) -> ProductPoint:
    return s.forward(p)


def scheme_inverse(s: ExtractionScheme, q: ProductPoint) -> ProductPoint:
    return s.inverse(q)


def _dist(a: ProductPoint, b: ProductPoint) -> float:
    d = a.join() - b.join()
    return math.sqrt(sum(v * v for v in d.entries.values()))


def extraction_record(s: ExtractionScheme, q: ProductPoint) -> dict:
    """Inverse image of q with displacement, rho, alpha and roundtrip error."""
    p, a = s.inverse_with_alpha(q)
    back = s.forward(p) if p is not q else q
    return {
        "input": q.join().to_json(),
        "output": p.join().to_json(),
        "displacement": _dist(p, q),
        "rho": s.rho(p),
        "alpha": a,
        "roundtrip_error": _dist(back, q),
    }
