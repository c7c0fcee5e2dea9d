"""phi(x) = sum_n (f(y_n) + T_n(x - y_n)) psi_n(x) with its analytic Jacobian,
and the surjectivity verdict built on the smallest singular value."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..seqspace import BlockDecomposition
from .cover import BallCover, as_rows
from .operators import BlockSurjections
from .partition import PartitionOfUnity

TAU_RANK = 1e-6


class Approximant:
    def __init__(self, f: Callable, cover: BallCover, pu: PartitionOfUnity, ops: BlockSurjections):
        self.cover = cover
        self.pu = pu
        self.ops = ops
        self.fy = np.atleast_2d(f(cover.centers))
        self.m = ops.m

    def eval(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(value, m x D Jacobian, active indices)."""
        st = self.pu.state(x)
        a = np.empty((len(st.active), self.m))
        J = np.zeros((self.m, len(x)))
        for r, n in enumerate(st.active):
            a[r] = self.fy[n] + self.ops.apply(n, x - self.cover.centers[n])
            J[np.arange(self.m), self.ops.blocks[self.ops.color[n]]] += st.weights[r] * self.ops.scale[n]
        J += a.T @ st.grads
        return st.weights @ a, J, st.active

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.eval(x)[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.eval(x)[0]


def approximant_eval(f, cover, pu, ops, x) -> tuple[np.ndarray, np.ndarray]:
    approx = Approximant(f, cover, pu, ops)
    val, J, _ = approx.eval(as_rows([x])[0])
    return val, J


def sigma_min(J: np.ndarray) -> float:
    return float(np.linalg.svd(J, compute_uv=False)[-1])


@dataclass(frozen=True)
class Verdict:
    sigma_min: float
    verdict: str
    guard: bool
    active: tuple[int, ...]

    def to_json(self) -> dict:
        return {"sigma_min": self.sigma_min, "verdict": self.verdict,
                "guard": self.guard, "active": list(self.active)}


def guard_predicate(x: np.ndarray, decomp: BlockDecomposition,
                    inside: tuple[str, ...] = ("data", "guarded")) -> bool:
    """True if x has a nonzero coordinate off the blocks in ``inside``; such
    points are never critical for the approximant."""
    mask = np.ones(len(x), dtype=bool)
    for name in inside:
        mask[decomp.positions(name)] = False
    return bool(np.any(x[mask] != 0.0))


def critical_certificate(J: np.ndarray, x: np.ndarray, decomp: BlockDecomposition,
                         active=(), tau: float = TAU_RANK) -> Verdict:
    s = sigma_min(J)
    if s >= tau:
        v = "surjective"
    elif s >= tau / 10:
        v = "inconclusive"
    else:
        v = "critical"
    return Verdict(s, v, guard_predicate(x, decomp), tuple(int(i) for i in active))
