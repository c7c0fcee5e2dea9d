"""g = phi o h: the approximant composed with an extraction of its critical set.

Critical points of phi have zero coordinates on the extraction block, so the
critical set lies in E1 x {0} with E1 = data + guarded. The map h deletes it
with the extraction scheme run on a tube of constant radius around E1 x {0},
keyed on the Gram determinant of the Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ExtractKitError, OracleError
from ..extract.convex import ConvexBodyDiffeo
from ..extract.scheme import DenseScheme
from ..gauges import GaugeKit
from ..seqspace import BlockDecomposition, SparseVec
from .approximant import TAU_RANK, Approximant, critical_certificate, sigma_min
from .cover import BallCover, as_rows, build_ball_cover
from .operators import block_operators
from .partition import PartitionOfUnity

IDENTITY_MARGIN = 1.5
FD_STEP = 1e-7


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ExtractKitError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


@dataclass(frozen=True)
class PipelineConfig:
    dim: int = 64
    m: int = 2
    seed: int = 0
    tau_rank: float = TAU_RANK
    r_max: float = 1.0
    lipschitz_probes: int = 4


class CriticalExtraction:
    """h: E -> E minus the critical set of phi, moving points less than 2 * tube."""

    def __init__(self, approx: Approximant, decomp: BlockDecomposition, tube: float, gram_ref: float):
        self.approx = approx
        self.decomp = decomp
        self.ext = decomp.positions("extraction")
        self.tube = tube
        self.kappa = gram_ref / (IDENTITY_MARGIN * tube)
        kit = GaugeKit.build(decomp, "extraction", ["extraction"])
        self.scheme = DenseScheme(kit, self.ext + 1)
        self.body = ConvexBodyDiffeo(lambda z: float(np.linalg.norm(z)), self.scheme.omega)

    def gram(self, x1: np.ndarray) -> float:
        J = self.approx.eval(x1)[1]
        return float(np.linalg.det(J @ J.T))

    def _parts(self, x: np.ndarray):
        x1 = x.copy()
        x1[self.ext] = 0.0
        return x1, x[self.ext]

    def psi(self, x1: np.ndarray) -> float:
        return self.gram(x1) / (self.kappa * self.tube)

    def rho(self, x: np.ndarray) -> float:
        """Scheme gauge at x; h is the identity near points with rho > 1."""
        x1, x2 = self._parts(x)
        if np.linalg.norm(x2) >= self.tube:
            return math.inf
        w = self.body.forward(x2 / self.tube)
        return self.scheme.rho(self.psi(x1), w)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x1, x2 = self._parts(x)
        if np.linalg.norm(x2) >= self.tube:
            return x
        w = self.body.forward(x2 / self.tube)
        w2, _ = self.scheme.inverse(self.psi(x1), w)
        out = x.copy()
        out[self.ext] = self.tube * self.body.inverse(w2)
        return out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        if self.rho(x) >= IDENTITY_MARGIN:
            return np.eye(len(x))
        D = len(x)
        J = np.empty((D, D))
        for i in range(D):
            e = np.zeros(D)
            e[i] = FD_STEP
            J[:, i] = (self(x + e) - self(x - e)) / (2 * FD_STEP)
        return J


@dataclass
class SampleRecord:
    x: dict
    err: float
    eps: float
    phi_err: float
    sigma_min: float
    verdict: str
    guard: bool
    displacement: float
    in_cover: bool
    active: list
    jacobian: dict


@dataclass
class PipelineReport:
    samples: list[SampleRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def summary(self) -> dict:
        s = self.samples
        return {
            "n": len(s),
            "max_err_ratio": max((r.err / r.eps for r in s), default=0.0),
            "max_phi_ratio": max((r.phi_err / r.eps for r in s), default=0.0),
            "min_sigma": min((r.sigma_min for r in s), default=math.inf),
            "non_surjective": sum(r.verdict != "surjective" for r in s),
            "outside_cover": sum(not r.in_cover for r in s),
        }

    def to_json(self) -> dict:
        return {"samples": [asdict(r) for r in self.samples], "config": self.config,
                "summary": self.summary()}

    def rows(self) -> list[list]:
        return [[i, r.err, r.eps, r.sigma_min, r.verdict] for i, r in enumerate(self.samples)]


class Pipeline:
    def __init__(self, approx: Approximant, h: CriticalExtraction, lipschitz: float):
        self.approx = approx
        self.h = h
        self.lipschitz = lipschitz

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.approx.value(self.h(x))

    def eval(self, x: np.ndarray):
        """(g(x), Dg(x), h(x), active set at h(x))."""
        y = self.h(x)
        val, J, active = self.approx.eval(y)
        return val, J @ self.h.jacobian(x), y, active


def _lipschitz(approx: Approximant, X: np.ndarray, rng: np.random.Generator, probes: int) -> float:
    L = 0.0
    for x in X:
        L = max(L, float(np.linalg.norm(approx.eval(x)[1], 2)))
        for _ in range(probes):
            d = rng.standard_normal(len(x))
            d *= 0.5 * approx.cover.radii.min() / np.linalg.norm(d)
            try:
                L = max(L, float(np.linalg.norm(approx.eval(x + d)[1], 2)))
            except ExtractKitError:
                pass
    return L


def _sparse_jacobian(J: np.ndarray) -> dict:
    cols = np.flatnonzero(np.any(J != 0.0, axis=0))
    return {"columns": (cols + 1).tolist(), "matrix": J[:, cols].tolist()}


def compose_pipeline(f: Callable, eps: Callable, corpus: Sequence,
                     config: PipelineConfig | None = None,
                     decomp: BlockDecomposition | None = None) -> tuple[Pipeline, PipelineReport]:
    config = config or PipelineConfig()
    X = as_rows(corpus)
    decomp = decomp or BlockDecomposition.standard(X.shape[1])
    rng = np.random.default_rng(config.seed)

    cover: BallCover = _stage("cover", build_ball_cover, f, eps, X, decomp, config.r_max, seed=config.seed)
    pu = PartitionOfUnity(cover)
    ops = _stage("operators", block_operators, config.m, cover, decomp)
    approx = Approximant(f, cover, pu, ops)

    # phi oscillates at most eps(z)/4 on B(z, delta_z) with delta_z = eps(z) / (8L)
    L = max(_stage("lipschitz", _lipschitz, approx, X, rng, config.lipschitz_probes), 1e-12)
    eps_x = np.asarray(eps(X), dtype=float)
    delta = eps_x / (8 * 2 * L)  # factor 2 covers the sampled Lipschitz estimate
    tube = float(delta.min()) / 4
    gram_ref = (float(eps_x.min()) / 16) ** (2 * config.m)
    h = CriticalExtraction(approx, decomp, tube, gram_ref)
    g = Pipeline(approx, h, L)

    fx = np.atleast_2d(f(X))
    report = PipelineReport(config={**asdict(config), "lipschitz": L, "tube": tube,
                                    "balls": len(cover), "operator_strategy": ops.strategy})
    for k, x in enumerate(X):
        phi_val = _stage("approximant", approx.value, x)
        val, J, y, active = _stage("composition", g.eval, x)
        disp = float(np.linalg.norm(y - x))
        v = critical_certificate(J, y, decomp, active, config.tau_rank)
        report.samples.append(SampleRecord(
            x=SparseVec.from_dense(x).to_json(),
            err=float(np.linalg.norm(val - fx[k])),
            eps=float(eps_x[k]),
            phi_err=float(np.linalg.norm(phi_val - fx[k])),
            sigma_min=v.sigma_min,
            verdict=v.verdict,
            guard=v.guard,
            displacement=disp,
            in_cover=bool(disp < delta[k]),
            active=[int(i) for i in active],
            jacobian=_sparse_jacobian(J),
        ))
    return g, report


def upgrade_smoothness(phi: Callable, oracle: Callable, eps: Callable, corpus: Sequence,
                       floor: float = 1e-8) -> Callable:
    """Accept a smoother g = oracle(x) if, at every corpus point,
    |phi - g| and |Dphi - Dg| stay below eta = min(eps/2, sigma_min(Dphi)/2).

    ``phi`` and ``oracle`` return (value, Jacobian). The strict inequality
    keeps Dg inside the open ball of surjective operators around Dphi.
    """
    X = as_rows(corpus)
    eps_x = np.asarray(eps(X), dtype=float)
    for k, x in enumerate(X):
        pv, pJ = phi(x)
        gv, gJ = oracle(x)
        r = sigma_min(pJ) / 2
        eta = min(eps_x[k] / 2, r)
        if eta < floor:
            raise OracleError(f"sample {k}: certified radius {eta:.2e} below floor {floor:.0e}")
        dv = float(np.linalg.norm(np.asarray(gv) - np.asarray(pv)))
        dJ = float(np.linalg.norm(np.asarray(gJ) - np.asarray(pJ), 2))
        if not (dv < eta and dJ < eta):
            raise OracleError(f"sample {k}: oracle moved value by {dv:.2e} and derivative by "
                              f"{dJ:.2e}, allowed {eta:.2e}")
    return oracle


def negative_demo(dim: int = 64, step: float = 1e-3, half_width: float = 1.5, eps: float = 1.0 / 3,
                  m: int = 2, tau_rank: float = TAU_RANK, seed: int = 0) -> dict:
    """Approximate x -> (|x_1|, ..., |x_m|) with constant eps along the e_1 line.

    The first output component of any such approximant must turn around near
    the origin, so its derivative along e_1 vanishes somewhere in between even
    though the full Jacobian stays surjective.
    """
    t = np.arange(-half_width, half_width + step / 2, step)
    X = np.zeros((len(t), dim))
    X[:, 0] = t

    def f(Y):
        return np.abs(np.atleast_2d(Y)[:, :m])

    def eps_fn(Y):
        return np.full(len(np.atleast_2d(Y)), eps)

    decomp = BlockDecomposition.standard(dim)
    cover = _stage("cover", build_ball_cover, f, eps_fn, X, decomp, seed=seed)
    approx = Approximant(f, cover, PartitionOfUnity(cover), _stage("operators", block_operators, m, cover, decomp))
    d1 = np.empty(len(t))
    smin = np.empty(len(t))
    err = np.empty(len(t))
    for k, x in enumerate(X):
        val, J, _ = approx.eval(x)
        d1[k] = J[0, 0]
        smin[k] = sigma_min(J)
        err[k] = np.linalg.norm(val - f(x)[0])
    # single-ball plateaus have d1 = 0 exactly; compare consecutive nonzero signs
    nz = np.flatnonzero(np.abs(d1) > tau_rank)
    turn = np.flatnonzero(np.sign(d1[nz[:-1]]) != np.sign(d1[nz[1:]]))
    interior = [int(nz[i]) for i in turn]
    return {
        "grid": len(t),
        "balls": len(cover),
        "sign_changes": [float(t[i]) for i in interior],
        "stationary_point": float(t[interior[0]]) if interior else None,
        "min_sigma": float(smin.min()),
        "all_surjective": bool(smin.min() >= tau_rank),
        "max_err_ratio": float(err.max() / eps),
        "obstruction": bool(interior) and bool(smin.min() >= tau_rank),
    }
