"""Partition of unity subordinate to a ball cover.

phi_k falls from 1 to 0 as s_k = |x - y_k|^2 crosses [r_k^2/4, r_k^2];
h_k = phi_k prod_{j<k} (1 - phi_j) and psi_k = h_k / sum h. Gradients are
assembled from sigma_{k,j} = d psi_k / d s_j and grad s_j = 2 (x - y_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CoverageError
from ..gauges import profile
from .cover import BallCover, as_rows


@dataclass(frozen=True)
class PartitionState:
    active: np.ndarray
    weights: np.ndarray
    grads: np.ndarray
    bumps: np.ndarray
    bump_grads: np.ndarray
    sigma: np.ndarray


class PartitionOfUnity:
    def __init__(self, cover: BallCover):
        self.cover = cover
        self.lo = cover.inner**2
        self.hi = cover.radii**2

    def _phi(self, idx: np.ndarray, s: np.ndarray):
        w = self.hi[idx] - self.lo[idx]
        t = (s - self.lo[idx]) / w
        p = profile()
        # Theta(1 - t) = 1 - Theta(t); evaluating both sides keeps the tails exact
        return p.value(1.0 - t), p.value(t), -p.deriv(t) / w

    def state(self, x: np.ndarray) -> PartitionState:
        s_all = self.cover.sq_dists(x)
        idx = np.flatnonzero(s_all < self.hi)
        if len(idx) == 0:
            raise CoverageError("point lies outside every ball of the cover")
        s = s_all[idx]
        phi, one_minus, dphi = self._phi(idx, s)
        a = len(idx)
        # dh[k, j] = d h_k / d s_j over the active set (idx is ascending)
        h = np.empty(a)
        dh = np.zeros((a, a))
        for k in range(a):
            prev = one_minus[:k]
            h[k] = phi[k] * np.prod(prev)
            dh[k, k] = dphi[k] * np.prod(prev)
            for j in range(k):
                rest = np.prod(np.delete(prev, j))
                dh[k, j] = -phi[k] * dphi[j] * rest
        H = h.sum()
        if H <= 0.0:
            raise CoverageError("partition denominator vanishes")
        psi = h / H
        dH = dh.sum(axis=0)
        sigma = (dh - psi[:, None] * dH[None, :]) / H
        ds = 2.0 * (x[None, :] - self.cover.centers[idx])
        return PartitionState(idx, psi, sigma @ ds, h, dh @ ds, sigma)

    def __call__(self, x: np.ndarray):
        st = self.state(x)
        return st.active, st.weights, st.grads


def partition_eval(pu: PartitionOfUnity, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(active indices, weights, weight gradients as rows)."""
    return pu(as_rows([x])[0])
