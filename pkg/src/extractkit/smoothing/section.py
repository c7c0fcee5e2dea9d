"""Subspace argmin sections and the suppression-basis gradient check."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import DomainError, OptimizationError
from ..seqspace import SparseVec
from .approximant import TAU_RANK

Norm = Callable[[np.ndarray], float]


def _dense(w) -> np.ndarray:
    return w.to_dense() if isinstance(w, SparseVec) else np.asarray(w, dtype=float)


def graph_section(w, target: Sequence[int], norm: Norm, tol: float = 1e-10,
                  max_iter: int = 10_000) -> np.ndarray:
    """argmin over v supported on ``target`` (0-based positions) of norm(w + v).

    Coordinate descent with golden-section line searches; a move is kept only
    if it strictly lowers the objective, so an optimal start stays put.
    """
    x = _dense(w).copy()
    base = x.copy()
    target = np.asarray(target, dtype=int)
    best = norm(x)
    scale = max(1.0, float(np.abs(x).max()))
    for _ in range(max_iter):
        moved = 0.0
        for i in target:
            def line(t, i=i):
                y = x.copy()
                y[i] += t
                return norm(y)

            res = minimize_scalar(line, bracket=(-scale, scale), method="golden",
                                  options={"xtol": tol})
            if res.fun < best:
                x[i] += res.x
                best = res.fun
                moved = max(moved, abs(res.x))
        if moved <= tol:
            return x[target] - base[target]
    raise OptimizationError(f"coordinate descent did not settle in {max_iter} sweeps")


def weighted_l4(weights: Sequence[float]) -> tuple[Norm, Callable[[np.ndarray], np.ndarray]]:
    """(sum c_i x_i^4)^(1/4) on the first len(weights) coordinates, with gradient."""
    c = np.asarray(weights, dtype=float)
    k = len(c)

    def norm(x: np.ndarray) -> float:
        return float((c * x[:k] ** 4).sum() ** 0.25)

    def grad(x: np.ndarray) -> np.ndarray:
        n = norm(x)
        g = np.zeros_like(x, dtype=float)
        g[:k] = c * x[:k] ** 3 / n**3
        return g

    return norm, grad


def fd_gradient(norm: Norm, x: np.ndarray, h: float = 1e-7) -> np.ndarray:
    g = np.zeros_like(x, dtype=float)
    for i in range(len(x)):
        e = np.zeros_like(x, dtype=float)
        e[i] = h
        g[i] = (norm(x + e) - norm(x - e)) / (2 * h)
    return g


def suppression_check(norm: Norm, j0: int, w, grad: Callable | None = None,
                      tau: float = TAU_RANK) -> bool:
    """True iff the norm gradient at w sees coordinate j0 (0-based) with
    |<J(w), e_j0>| >= tau |w_j0|. Returns False when w_j0 = 0."""
    x = _dense(w)
    if not np.any(x):
        raise DomainError("the norm gradient is undefined at 0")
    if x[j0] == 0.0:
        return False
    J = grad(x) if grad is not None else fd_gradient(norm, x)
    return bool(abs(J[j0]) >= tau * abs(x[j0]))


def l2_norm_pair() -> tuple[Norm, Callable[[np.ndarray], np.ndarray]]:
    return (lambda x: float(np.linalg.norm(x))), (lambda x: x / np.linalg.norm(x))
