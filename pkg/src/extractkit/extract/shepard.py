"""Shepard-type blending of scattered samples and smoothed distances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import CertificationError, DomainError
from ..seqspace import SparseVec


def _as_matrix(points) -> np.ndarray:
    rows = [p.to_dense() if isinstance(p, SparseVec) else np.asarray(p, dtype=float) for p in points]
    return np.atleast_2d(np.array(rows, dtype=float))


@dataclass(frozen=True)
class ShepardBlend:
    """f(x) = sum_i w_i v_i / sum_i w_i with w_i = exp(-s_i / L^2) / (s_i + tau).

    s_i is the squared distance to node i. With tau = 0 the blend interpolates
    the nodes exactly; tau > 0 gives a smooth approximant of the tau = 0 blend.
    """

    nodes: np.ndarray
    values: np.ndarray
    length: float
    tau: float = 0.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        s = ((self.nodes - x) ** 2).sum(axis=1)
        if self.tau == 0.0:
            hit = np.flatnonzero(s == 0.0)
            if len(hit):
                return self.values[hit[0]].copy()
        e = np.exp(-(s - s.min()) / self.length**2)
        w = e / (s + self.tau)
        return w @ self.values / w.sum()

    def batch(self, xs: np.ndarray) -> np.ndarray:
        """Row-wise evaluation on a matrix of points."""
        s = ((xs[:, None, :] - self.nodes[None, :, :]) ** 2).sum(axis=2)
        e = np.exp(-(s - s.min(axis=1, keepdims=True)) / self.length**2)
        if self.tau == 0.0:
            hit = s == 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                w = e / s
            rows = hit.any(axis=1)
            w[rows] = hit[rows].astype(float)
        else:
            w = e / (s + self.tau)
        return w @ self.values / w.sum(axis=1, keepdims=True)

    def with_tau(self, tau: float) -> "ShepardBlend":
        return ShepardBlend(self.nodes, self.values, self.length, tau)


def extend_function(samples: Sequence[tuple], smooth_off_set: bool = True,
                    length: float | None = None) -> ShepardBlend:
    """Continuous extension exact on the sample nodes, smooth off them.

    ``samples`` holds (x1, value) pairs as SparseVec or arrays.
    """
    if not samples:
        raise DomainError("cannot extend from an empty sample set")
    nodes = _as_matrix([s[0] for s in samples])
    values = _as_matrix([s[1] for s in samples])
    if length is None:
        span = np.ptp(nodes, axis=0).max() if len(nodes) > 1 else 1.0
        length = max(float(span), 1e-3)
    return ShepardBlend(nodes, values, length, 0.0)


@dataclass(frozen=True)
class SoftDistance:
    """(sum_i s_i^-q)^(-1/2q): a smooth lower bound of the distance to the nodes,
    vanishing exactly on them and within a factor n^(1/2q) of the true distance."""

    nodes: np.ndarray
    q: int = 4

    def __call__(self, x: np.ndarray) -> float:
        s = ((self.nodes - x) ** 2).sum(axis=1)
        m = s.min()
        if m == 0.0:
            return 0.0
        r = (m / s) ** self.q
        return float(np.sqrt(m) * r.sum() ** (-1.0 / (2 * self.q)))

    def true_distance(self, x: np.ndarray) -> float:
        return float(np.sqrt(((self.nodes - x) ** 2).sum(axis=1).min()))


@dataclass(frozen=True)
class CertifiedApproximants:
    """Smooth approximants fbar_n with certified corpus sup errors."""

    maps: tuple
    errors: tuple[float, ...]
    bounds: tuple[float, ...]


def staircase_bound(n: int) -> float:
    return 2.0 ** (-2 * n - 4)


def shepard_approximants(fbar: ShepardBlend, corpus: np.ndarray, count: int,
                         bound=staircase_bound) -> CertifiedApproximants:
    """Regularized blends fbar_n, n = 1..count, each verified on ``corpus``
    to be within bound(n) of fbar in sup norm."""
    exact = fbar.batch(corpus)
    maps, errs, bnds = [], [], []
    tau = 1e-2 * fbar.length**2
    for n in range(1, count + 1):
        target = bound(n)
        for _ in range(200):
            cand = fbar.with_tau(tau)
            err = float(np.linalg.norm(cand.batch(corpus) - exact, axis=1).max())
            if err <= 0.5 * target:
                break
            tau *= 0.25
        else:
            raise CertificationError(f"approximant {n} cannot reach {target:.2e}")
        maps.append(cand)
        errs.append(err)
        bnds.append(target)
    return CertifiedApproximants(tuple(maps), tuple(errs), tuple(bnds))


def certify(approx: CertifiedApproximants, fbar, corpus: np.ndarray) -> None:
    for n, (g, b) in enumerate(zip(approx.maps, approx.bounds), start=1):
        err = float(np.linalg.norm(g.batch(corpus) - fbar.batch(corpus), axis=1).max())
        if err > b:
            raise CertificationError(f"approximant {n}: corpus error {err:.3e} > {b:.3e}")


def probe_corpus(nodes: np.ndarray, rng: np.random.Generator, per_node: int = 6,
                 radii=(1e-4, 1e-3, 1e-2, 1e-1)) -> np.ndarray:
    """Nodes plus random probes at several distances around each node."""
    pts = [nodes]
    k = nodes.shape[1]
    for r in radii:
        d = rng.standard_normal((len(nodes) * per_node, k))
        d *= r / np.linalg.norm(d, axis=1, keepdims=True)
        pts.append(np.repeat(nodes, per_node, axis=0) + d)
    return np.vstack(pts)
