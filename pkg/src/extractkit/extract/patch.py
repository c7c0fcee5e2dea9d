"""Sequential extraction of a finite point set X0 inside a window U, sorted
by membership in the companion sets X1..Xn so that X_i \\ X0 stays in V_i."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import BudgetError, CoverError
from ..seqspace import BlockDecomposition, SparseVec
from .graph import TAU_SET, GraphExtraction, GraphSpec

MAX_PIECES = 5


@dataclass(frozen=True)
class Ball:
    center: SparseVec
    radius: float

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.linalg.norm(x - self.center.to_dense()) < self.radius)

    def clearance(self, x: np.ndarray) -> float:
        return self.radius - float(np.linalg.norm(x - self.center.to_dense()))


@dataclass(frozen=True)
class PatchPiece:
    """Closed set X (a finite point cloud) with nested open sets X in W in V."""

    points: tuple[SparseVec, ...]
    inner: Ball
    outer: Ball


@dataclass(frozen=True)
class CoverPatch:
    """pieces[0] carries X0, the set to extract inside ``window``."""

    pieces: Sequence[PatchPiece]
    window: Ball
    eps: float
    decomp: BlockDecomposition = field(default_factory=BlockDecomposition.standard)
    budgets: Sequence[float] | None = None

    def __post_init__(self):
        n = len(self.pieces) - 1
        if n < 0 or n > MAX_PIECES:
            raise CoverError(f"need between 1 and {MAX_PIECES + 1} pieces, got {n + 1}")
        for k, p in enumerate(self.pieces):
            for z in p.points:
                d = z.to_dense()
                if not (p.inner.contains(d) and p.outer.contains(d)):
                    raise CoverError(f"piece {k}: sample not inside its open sets")
            gap = float(np.linalg.norm((p.inner.center - p.outer.center).to_dense()))
            if gap + p.inner.radius > p.outer.radius:
                raise CoverError(f"piece {k}: inner ball not inside outer ball")
        if self.budgets is not None and len(self.budgets) != 2**n:
            raise BudgetError(f"need {2 ** n} budgets, got {len(self.budgets)}")

    def stage_budgets(self) -> list[float]:
        n = len(self.pieces) - 1
        return list(self.budgets) if self.budgets is not None else [self.eps / 2**n] * 2**n


def _member(x: np.ndarray, cloud: np.ndarray) -> bool:
    return len(cloud) > 0 and bool(np.linalg.norm(cloud - x, axis=1).min() <= TAU_SET)


class PatchedExtraction:
    """h = h_{2^n} o ... o h_1 with one single-point extraction per point of X0 in U."""

    def __init__(self, cp: CoverPatch):
        self.cp = cp
        n = len(cp.pieces) - 1
        clouds = [np.array([z.to_dense() for z in p.points]).reshape(-1, cp.decomp.dim)
                  for p in cp.pieces]
        self.clouds = clouds
        everything = np.vstack(clouds)
        budgets = cp.stage_budgets()
        # pattern S = companions containing the point; pieces with larger S come first
        patterns = sorted({frozenset(i for i in range(1, n + 1) if _member(x, clouds[i]))
                           for x in clouds[0]}, key=lambda S: (-len(S), sorted(S)))
        slot = {S: m for m, S in enumerate(patterns)}
        self.stages: list[list[GraphExtraction]] = [[] for _ in patterns]
        self.stage_budget = [0.0] * len(patterns)
        for x in clouds[0]:
            if not cp.window.contains(x):
                continue
            S = frozenset(i for i in range(1, n + 1) if _member(x, clouds[i]))
            m = slot[S]
            budget = budgets[min(m, len(budgets) - 1)]
            balls = [cp.window, cp.pieces[0].outer] + [cp.pieces[i].outer for i in S]
            room = min(b.clearance(x) for b in balls)
            others = np.linalg.norm(everything - x, axis=1)
            others = others[others > TAU_SET]
            if len(others):
                room = min(room, others.min() / 2)
            if room <= 0:
                raise CoverError("point of X0 sits on the boundary of its region")
            self.stages[m].append(self._single(x, room / 2, budget))
            self.stage_budget[m] = budget
        self.total_budget = math.fsum(self.stage_budget)

    def _single(self, x: np.ndarray, r: float, budget: float) -> GraphExtraction:
        prod = self.cp.decomp.product(["extraction"])
        v = SparseVec.from_dense(x, self.cp.decomp.dim)
        x1 = prod.project(v, "E1")
        x2 = prod.project(v, "E2")
        spec = GraphSpec(self.cp.decomp, [(x1, x2)], x1, r, x2, r, min(budget, 1.0))
        return GraphExtraction(spec)

    def __call__(self, x: SparseVec) -> SparseVec:
        for stage in self.stages:
            for g in stage:
                x = g.inverse(x)
        return x

    def inverse(self, y: SparseVec) -> SparseVec:
        for stage in reversed(self.stages):
            for g in reversed(stage):
                y = g.forward(y)
        return y

    def check(self, corpus: Sequence[SparseVec]) -> dict:
        """Displacement, injectivity and companion-membership scan on a corpus."""
        outs, worst = [], 0.0
        for x in corpus:
            y = self(x)
            worst = max(worst, float(np.linalg.norm((y - x).to_dense())))
            outs.append(y.to_dense())
        if worst > self.total_budget:
            raise BudgetError(f"displacement {worst:.3e} exceeds budget {self.total_budget:.3e}")
        arr = np.array(outs)
        collisions = 0
        for k in range(len(arr)):
            d = np.linalg.norm(arr[k + 1:] - arr[k], axis=1)
            collisions += int((d <= 1e-9).sum())
        violations = 0
        for i, piece in enumerate(self.cp.pieces[1:], start=1):
            for z in piece.points:
                if _member(z.to_dense(), self.clouds[0]):
                    continue
                if not piece.outer.contains(self(z).to_dense()):
                    violations += 1
        return {"max_displacement": worst, "budget": self.total_budget,
                "collisions": collisions, "membership_violations": violations}


def patch_covers(cp: CoverPatch) -> PatchedExtraction:
    return PatchedExtraction(cp)

