"""Extraction of the part of a sampled graph lying in a window U.

The pipeline flattens the graph onto E1 x {0}, rescales a thin tube around
the zero section onto the omega body, and runs the extraction scheme there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ExcludedSetError, ExtractKitError, WindowConsistencyError
from ..gauges import GaugeKit, SmoothStep
from ..seqspace import BlockDecomposition, ProductPoint, SparseVec
from .convex import ConvexBodyDiffeo
from .flatten import FlattenMaps, PicardTrace, ProductWindow, Staircase, TwinPhi, TwinSchedule
from .scheme import DenseScheme
from .shepard import SoftDistance, extend_function, probe_corpus, shepard_approximants

TAU_SET = 1e-9
TUBE_FACTOR = 0.45


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ExtractKitError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


@dataclass(frozen=True)
class FlatWindow:
    """W = {|x1 - c1| < r1} x {|y| < r2} in flattened coordinates."""

    c1: np.ndarray
    r1: float
    r2: float

    def contains(self, x1: np.ndarray, y: np.ndarray) -> bool:
        return bool(np.linalg.norm(x1 - self.c1) < self.r1 and np.linalg.norm(y) < self.r2)

    def dist_complement(self, x1: np.ndarray) -> float:
        """Distance from (x1, 0) to the complement of W (0 outside)."""
        return max(0.0, min(self.r1 - float(np.linalg.norm(x1 - self.c1)), self.r2))


class _CenterSmoothNorm:
    """|x| for |x| >= kappa, smoothed near 0 so it stays C-infinity and >= |x|."""

    def __init__(self, kappa: float):
        self.kappa = kappa
        self.step = SmoothStep(0.0, 1.0)

    def __call__(self, x: np.ndarray) -> float:
        s = float(np.dot(x, x)) / self.kappa**2
        if s >= 1.0:
            return math.sqrt(s) * self.kappa
        return self.kappa * math.sqrt(s + 1.0 - float(self.step(s)))


class TubeWindow:
    """Tube radius phi(x1) and the smoothed squared distance eta(x1) to X1.

    phi = 0.45 softmin(delta/2, r1 - |x1 - c1|~, r2) lies strictly between
    G/4 and G/2 where G = min(delta/2, dist((x1, 0), E \\ W)).
    """

    def __init__(self, nodes: np.ndarray, window: FlatWindow, delta: float):
        self.nodes = nodes
        self.window = window
        self.delta = delta
        self.norm = _CenterSmoothNorm(0.05 * window.r1)
        self.soft = SoftDistance(nodes)

    def G(self, x1: np.ndarray) -> float:
        return min(self.delta / 2, self.window.dist_complement(x1))

    def phi(self, x1: np.ndarray) -> float:
        a = self.window.r1 - self.norm(x1 - self.window.c1)
        if a <= 0.0:
            return 0.0
        args = np.array([self.delta / 2, a, self.window.r2])
        m = args.min()
        return float(TUBE_FACTOR * m * ((m / args) ** 8).sum() ** (-1 / 8))

    def eta(self, x1: np.ndarray) -> float:
        return self.soft(x1) ** 2

    def verify(self, corpus: np.ndarray, k2: int, rng: np.random.Generator, per_point: int = 4) -> None:
        """Random tube points above each corpus point must lie in W."""
        for x1 in corpus:
            p = self.phi(x1)
            g = self.G(x1)
            if p == 0.0:
                if g > 0.0:
                    raise WindowConsistencyError("tube radius vanishes inside the window shadow")
                continue
            if not 0.25 * g < p < 0.5 * g:
                raise WindowConsistencyError(f"tube radius {p:.3e} outside (G/4, G/2), G={g:.3e}")
            d = rng.standard_normal((per_point, k2))
            d *= (p * rng.uniform(0, 1, per_point) / np.linalg.norm(d, axis=1))[:, None]
            for y in d:
                if not self.window.contains(x1, y):
                    raise WindowConsistencyError("tube sample escapes the window")


def tube_window(nodes: np.ndarray, window: FlatWindow, delta: float) -> TubeWindow:
    return TubeWindow(np.atleast_2d(np.asarray(nodes, dtype=float)), window, delta)


@dataclass(frozen=True)
class GraphSpec:
    """Sampled graph X = {(x1, f(x1))} over block E1 and a product window U.

    ``second`` names the blocks of ``decomp`` forming E2; it must include the
    extraction block. ``samples`` holds (x1, f(x1)) SparseVec pairs and the
    window centers are SparseVecs as well.
    """

    decomp: BlockDecomposition
    samples: Sequence[tuple[SparseVec, SparseVec]]
    c1: SparseVec
    r1: float
    c2: SparseVec
    r2: float
    delta: float
    second: tuple[str, ...] = ("extraction",)
    extraction: str = "extraction"
    seed: int = 0
    product: BlockDecomposition = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise WindowConsistencyError("delta must be positive")
        if self.extraction not in self.second:
            raise WindowConsistencyError("E2 must contain the extraction block")
        prod = self.decomp.product(list(self.second))
        e2 = set(prod.blocks["E2"])
        for x1, v in self.samples:
            if set(x1.support) & e2 or set(v.support) - e2:
                raise WindowConsistencyError("sample pair does not respect the block split")
        object.__setattr__(self, "product", prod)


class GraphExtraction:
    """forward: E \\ (X \\ U) -> E \\ X, inverse: E \\ X -> E \\ (X \\ U).

    The inverse is phi-map^-1 o g o h, with g the rescaled extraction scheme;
    forward inverts each stage. Both are the identity off U.
    """

    def __init__(self, spec: GraphSpec, n_approx: int = 13):
        self.spec = spec
        prod = spec.product
        self.p1 = prod.positions("E1")
        self.p2 = prod.positions("E2")
        dim = spec.decomp.dim
        X = np.array([x.to_dense()[self.p1] for x, _ in spec.samples])
        V = np.array([v.to_dense()[self.p2] for _, v in spec.samples])
        self.nodes, self.values = X, V
        c1 = spec.c1.to_dense()[self.p1]
        c2 = spec.c2.to_dense()[self.p2]
        self.U = ProductWindow(c1, spec.r1, c2, spec.r2)
        rng = np.random.default_rng(spec.seed)

        eps_f = spec.delta / 2
        fbar = extend_function(list(zip(X, V)))
        corpus = probe_corpus(X, rng)
        approx = _stage("smooth-extension", shepard_approximants, fbar, corpus, n_approx)
        F = _stage("staircase", Staircase, fbar, approx, SoftDistance(X), 1.0, corpus)
        twin = _stage("twin-functions", TwinPhi, fbar, TwinSchedule(eps_f), self.U)
        self.fbar = fbar
        self.flat = FlattenMaps(F, twin, eps_f)

        # F stays within the measured approximant error of fbar; doubled as margin
        M = float(np.max(np.linalg.norm(V - c2, axis=1))) + 2 * max(approx.errors)
        if spec.r2 - M <= 0:
            raise WindowConsistencyError("window too thin to contain the flattened graph",
                                         stage="tube-window")
        self.W = FlatWindow(c1, spec.r1, spec.r2 - M)
        self.delta_g = eps_f / 2
        self.tube = tube_window(X, self.W, self.delta_g)
        _stage("tube-window", self.tube.verify, np.vstack([X, corpus[: 4 * len(X)]]), len(self.p2), rng)

        e2_names = list(spec.second)
        self.kit = GaugeKit.build(spec.decomp, spec.extraction, e2_names)
        self.scheme = DenseScheme(self.kit, self.p2 + 1)
        self.body = ConvexBodyDiffeo(lambda z: float(np.linalg.norm(z)), self.scheme.omega)
        self.dim = dim
        self.last_trace: PicardTrace | None = None

    # dense helpers
    def split(self, x: SparseVec) -> tuple[np.ndarray, np.ndarray]:
        d = x.to_dense()
        return d[self.p1].copy(), d[self.p2].copy()

    def join(self, x1: np.ndarray, x2: np.ndarray) -> SparseVec:
        out = np.zeros(self.dim)
        out[self.p1] = x1
        out[self.p2] = x2
        return SparseVec.from_dense(out, self.dim)

    def on_graph(self, x1: np.ndarray, x2: np.ndarray) -> bool:
        d = np.linalg.norm(self.nodes - x1, axis=1)
        i = int(np.argmin(d))
        return bool(d[i] <= TAU_SET and np.linalg.norm(x2 - self.values[i]) <= TAU_SET)

    def psi(self, x1: np.ndarray, phi_t: float) -> float:
        return self.tube.eta(x1) / phi_t

    # inner extraction g on flattened coordinates
    def g(self, x1: np.ndarray, y: np.ndarray) -> np.ndarray:
        pt = self.tube.phi(x1)
        if pt == 0.0 or np.linalg.norm(y) >= pt:
            return y
        w = self.body.forward(y / pt)
        w2, _ = self.scheme.forward(self.psi(x1, pt), w)
        return pt * self.body.inverse(w2)

    def g_inverse(self, x1: np.ndarray, y: np.ndarray) -> np.ndarray:
        pt = self.tube.phi(x1)
        if pt == 0.0 or np.linalg.norm(y) >= pt:
            return y
        w = self.body.forward(y / pt)
        w2, _ = self.scheme.inverse(self.psi(x1, pt), w)
        return pt * self.body.inverse(w2)

    def in_tube(self, x1: np.ndarray, y: np.ndarray) -> bool:
        pt = self.tube.phi(x1)
        return bool(pt > 0.0 and np.linalg.norm(y) < pt)

    def forward_dense(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        if not self.U.contains(x1, x2):
            if self.on_graph(x1, x2):
                raise ExcludedSetError("retained graph point is outside the domain", stage="graph-extraction")
            return x2
        y = self.flat.forward(x1, x2, "phi")
        y2 = _stage("scheme", self.g_inverse, x1, y)
        self.last_trace = PicardTrace()
        return _stage("flatten", self.flat.inverse, x1, y2, "h", self.last_trace)

    def inverse_dense(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        if not self.U.contains(x1, x2):
            if self.on_graph(x1, x2):
                raise ExcludedSetError("graph point has no preimage", stage="graph-extraction")
            return x2
        y = self.flat.forward(x1, x2, "h")
        y2 = _stage("scheme", self.g, x1, y)
        self.last_trace = PicardTrace()
        return _stage("flatten", self.flat.inverse, x1, y2, "phi", self.last_trace)

    def forward(self, p: SparseVec | ProductPoint) -> SparseVec:
        v = p.join() if isinstance(p, ProductPoint) else p
        x1, x2 = self.split(v)
        return self.join(x1, self.forward_dense(x1, x2))

    def inverse(self, q: SparseVec | ProductPoint) -> SparseVec:
        v = q.join() if isinstance(q, ProductPoint) else q
        x1, x2 = self.split(v)
        return self.join(x1, self.inverse_dense(x1, x2))


def graph_extraction(spec: GraphSpec) -> GraphExtraction:
    return GraphExtraction(spec)
