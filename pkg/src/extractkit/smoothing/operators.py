"""Block-supported surjections T_n = eps(y_n)/4 * S_n onto R^m."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError
from ..seqspace import BlockDecomposition
from .cover import BallCover


@dataclass(frozen=True)
class BlockSurjections:
    """``blocks[c]`` holds the m guarded positions (0-based) of block c and
    ball n uses block ``color[n]``. Overlapping balls never share a block."""

    m: int
    dim: int
    blocks: tuple[np.ndarray, ...]
    color: np.ndarray
    scale: np.ndarray
    strategy: str

    def S(self, n: int) -> np.ndarray:
        out = np.zeros((self.m, self.dim))
        out[np.arange(self.m), self.blocks[self.color[n]]] = 1.0
        return out

    def T(self, n: int) -> np.ndarray:
        return self.scale[n] * self.S(n)

    def apply(self, n: int, v: np.ndarray) -> np.ndarray:
        return self.scale[n] * v[self.blocks[self.color[n]]]

    def block_indices(self, n: int) -> np.ndarray:
        """1-based basis labels of I_n."""
        return self.blocks[self.color[n]] + 1


def _greedy_colors(neigh: list[np.ndarray]) -> np.ndarray:
    color = np.full(len(neigh), -1)
    for k, nb in enumerate(neigh):
        used = set(color[nb][color[nb] >= 0].tolist())
        c = 0
        while c in used:
            c += 1
        color[k] = c
    return color


def block_operators(m: int, cover: BallCover, decomp: BlockDecomposition,
                    guarded: str = "guarded") -> BlockSurjections:
    """Disjoint blocks per ball when the guarded block has room for all of
    them; otherwise one block per color of the ball-overlap graph."""
    P = decomp.positions(guarded)
    n = len(cover)
    if n * m <= len(P):
        color = np.arange(n)
        strategy = "disjoint"
    else:
        color = _greedy_colors(cover.overlaps())
        strategy = "coloring"
    k = int(color.max()) + 1
    if k * m > len(P):
        raise CapacityError(f"{k} blocks of size {m} exceed the {len(P)} guarded indices")
    blocks = tuple(P[c * m:(c + 1) * m] for c in range(k))
    return BlockSurjections(m, decomp.dim, blocks, color, cover.eps_at / 4.0, strategy)
