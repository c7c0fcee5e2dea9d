"""Greedy ball covers with corpus-based oscillation certificates.

Callbacks ``f`` and ``eps`` act row-wise on (n, D) arrays and return (n, m)
and (n,) arrays respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from ..errors import CoverError
from ..seqspace import BlockDecomposition, SparseVec

OSC_FRACTION = 1.0 / 16
COND_LIMIT = 1e8
PERTURB = 1e-6


def as_rows(points) -> np.ndarray:
    rows = [p.to_dense() if isinstance(p, SparseVec) else np.asarray(p, dtype=float) for p in points]
    return np.atleast_2d(np.array(rows, dtype=float))


def oscillation(values: np.ndarray) -> float:
    """sup |v_a - v_b| over a finite sample (rows for vectors, entries for scalars)."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        return float(v.max() - v.min()) if len(v) else 0.0
    if len(v) < 2:
        return 0.0
    return float(pdist(v).max())


@dataclass
class BallCover:
    centers: np.ndarray
    radii: np.ndarray
    eps_at: np.ndarray
    certificates: list[dict] = field(default_factory=list)
    independent: int = 0

    @property
    def inner(self) -> np.ndarray:
        return self.radii / 2

    def __len__(self) -> int:
        return len(self.radii)

    def sq_dists(self, x: np.ndarray) -> np.ndarray:
        d = self.centers - x
        return np.einsum("ij,ij->i", d, d)

    def containing(self, x: np.ndarray) -> np.ndarray:
        return np.flatnonzero(self.sq_dists(x) < self.radii**2)

    def overlaps(self) -> list[np.ndarray]:
        """Neighbours of each ball in the overlap graph."""
        c = self.centers
        sq = np.einsum("ij,ij->i", c, c)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2 * c @ c.T, 0.0)
        hit = np.sqrt(d2) < self.radii[:, None] + self.radii[None, :]
        np.fill_diagonal(hit, False)
        return [np.flatnonzero(row) for row in hit]


def _probes(y: np.ndarray, r: float, axes: np.ndarray, rng: np.random.Generator, n_random: int) -> np.ndarray:
    k = len(axes)
    P = np.repeat(y[None, :], 2 * k + n_random, axis=0)
    P[np.arange(k), axes] += r * (1 - 1e-12)
    P[k + np.arange(k), axes] -= r * (1 - 1e-12)
    d = rng.standard_normal((n_random, len(y)))
    d *= (r * rng.uniform(0, 1, n_random) ** (1 / len(y)) / np.linalg.norm(d, axis=1))[:, None]
    P[2 * k:] += d
    return P


def build_ball_cover(
    f: Callable[[np.ndarray], np.ndarray],
    eps: Callable[[np.ndarray], np.ndarray],
    corpus: Sequence,
    decomp: BlockDecomposition | None = None,
    r_max: float = 1.0,
    r_min: float = 1e-6,
    n_random: int = 16,
    seed: int = 0,
) -> BallCover:
    """Greedy cover of the corpus by balls on which f and eps oscillate by at
    most eps(center)/16. A ball of radius r marks corpus points within r/2."""
    X = as_rows(corpus)
    n, D = X.shape
    decomp = decomp or BlockDecomposition.standard(D)
    data = decomp.positions("data")
    axes = np.arange(D)
    rng = np.random.default_rng(seed)
    covered = np.zeros(n, dtype=bool)
    centers, radii, eps_at, certs = [], [], [], []
    basis_next = 0
    independent = 0
    for i in range(n):
        if covered[i]:
            continue
        y = X[i].copy()
        # rank ledger: keep centers independent while the data block has room
        if len(centers) < len(data):
            y, basis_next, ok = _independent(np.array(centers).reshape(-1, D), y, data, basis_next)
            independent += ok
        ey = float(eps(y[None, :])[0])
        bound = OSC_FRACTION * ey
        d_all = np.sqrt(np.einsum("ij,ij->i", X - y, X - y))
        r = r_max
        while True:
            if r < r_min:
                raise CoverError(f"no certified radius above {r_min} at corpus point {i}")
            S = np.vstack([y[None, :], X[d_all < r], _probes(y, r, axes, rng, n_random)])
            fs, es = np.atleast_2d(f(S)), eps(S)
            # distance to the center value bounds the diameter from below
            if (np.abs(es - es[0]).max() <= bound
                    and np.linalg.norm(fs - fs[0], axis=1).max() <= bound):
                of, oe = oscillation(fs), oscillation(es)
                if of <= bound and oe <= bound:
                    break
            r /= 2
        covered |= d_all < r / 2
        centers.append(y)
        radii.append(r)
        eps_at.append(ey)
        certs.append({"samples": len(S), "osc_f": of, "osc_eps": oe, "bound": bound})
    return BallCover(np.array(centers), np.array(radii), np.array(eps_at), certs, independent)


def _independent(C: np.ndarray, y: np.ndarray, data: np.ndarray, nxt: int):
    """Perturb y along unused data axes until [C; y] is well conditioned."""
    for _ in range(len(data) + 1):
        M = np.vstack([C, y[None, :]])
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] <= COND_LIMIT:
            return y, nxt, 1
        if nxt >= len(data):
            break
        y = y.copy()
        y[data[nxt]] += PERTURB
        nxt += 1
    return y, nxt, 0
