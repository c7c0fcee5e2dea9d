"""Demo workloads and sampled invariant suites shared by the CLI."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import ExcludedSetError, ExtractKitError
from .extract import (ExtractionScheme, GraphExtraction, GraphSpec, PicardTrace,
                      solve_fixed_point_full, FixedPointProblem)
from .gauges import GaugeKit, SmoothStep
from .seqspace import BlockDecomposition, ProductPoint, SparseVec, algebra, inner, l2_norm, random_sparse
from .smoothing import (PartitionOfUnity, build_ball_cover, l2_norm_pair, suppression_check)


def abs_map(m: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    def f(X):
        return np.abs(np.atleast_2d(X)[:, :m])
    return f


def linear_eps(base: float = 0.1) -> Callable[[np.ndarray], np.ndarray]:
    def eps(X):
        return base * (1 + np.linalg.norm(np.atleast_2d(X), axis=1))
    return eps


def data_corpus(decomp: BlockDecomposition, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    data = decomp.blocks["data"]
    return np.array([random_sparse(rng, data, decomp.dim).to_dense() for _ in range(n)])


# extract-point

def point_trajectory(dim: int = 64, t_grid=None) -> list[dict]:
    """Delete the origin with psi = 0: the scheme moves a point of gauge t by gamma(t)."""
    decomp = BlockDecomposition.standard(dim)
    kit = GaugeKit.build(decomp)
    s = ExtractionScheme(lambda x1: 0.0, kit, decomp.product(["extraction"]))
    anchor = kit.curve.anchors[0]
    w = kit.omega.weight(anchor)
    ts = np.round(np.arange(0.05, 2.0001, 0.05), 10) if t_grid is None else t_grid
    rows = []
    for t in ts:
        p = ProductPoint.split(SparseVec.basis(anchor, dim, float(t) / w), s.decomp)
        q = s.forward(p)
        back = s.inverse(q)
        g = kit.curve(float(t))
        rows.append({
            "t": float(t),
            "rho": s.rho(p),
            "gamma_norm": l2_norm(g),
            "gamma_omega": kit.omega(g),
            "gamma_support": len(g.support),
            "displacement": l2_norm(q.join() - p.join()),
            "roundtrip": l2_norm(back.join() - p.join()),
        })
    return rows


# extract-graph and flatten

def graph_samples(decomp: BlockDecomposition, n: int, seed: int):
    rng = np.random.default_rng(seed)
    data, ext = decomp.blocks["data"], decomp.blocks["extraction"]
    out = []
    for _ in range(n):
        x1 = SparseVec({data[0]: float(rng.uniform(-.5, .5)), data[1]: float(rng.uniform(-.5, .5))},
                       decomp.dim)
        v = SparseVec({ext[0]: float(rng.uniform(-.2, .2)), ext[1]: float(rng.uniform(-.2, .2))},
                      decomp.dim)
        out.append((x1, v))
    return out


def graph_demo(dim: int = 64, delta: float = 0.1, n_samples: int = 8, n_probe: int = 200,
               seed: int = 1) -> tuple[GraphExtraction, list[dict]]:
    decomp = BlockDecomposition.standard(dim)
    samples = graph_samples(decomp, n_samples, seed)
    zero = SparseVec.zero(dim)
    G = GraphExtraction(GraphSpec(decomp, samples, zero, 0.4, zero, 1.0, delta, seed=seed))
    rng = np.random.default_rng(seed + 1)
    inside = [x1 + v for x1, v in samples if G.U.contains(*G.split(x1 + v))] or [x1 + v for x1, v in samples]
    axes = np.array(sorted({i - 1 for x1, v in samples for i in x1.support + v.support}))
    rows = []
    for k in range(n_probe):
        d = np.zeros(dim)
        d[axes] = delta / 4 * rng.standard_normal(len(axes))
        p = inside[k % len(inside)] + SparseVec.from_dense(d)
        q = G.forward(p)
        back = G.inverse(q)
        rows.append({
            "sample_id": k,
            "displacement": l2_norm(q - p),
            "roundtrip": l2_norm(back - p),
            "in_window": G.U.contains(*G.split(p)),
        })
    return G, rows


def flatten_table(G: GraphExtraction, n: int = 200, seed: int = 0) -> list[dict]:
    """Clause checks for the flattening pair built inside a graph extraction."""
    rng = np.random.default_rng(seed)
    fl, U = G.flat, G.U
    d1, d2 = len(G.p1), len(G.p2)
    m1 = np.any(G.nodes != 0, axis=0)
    m2 = np.any(G.values != 0, axis=0)
    b1 = fl.twin.s.b[0]
    pts = []
    for k in range(n):
        a = G.nodes[k % len(G.nodes)].copy()
        if k % 2:
            # near the window edge, where the two twins part ways
            u = np.zeros(d1)
            u[m1] = rng.standard_normal(int(m1.sum()))
            a = U.c1 + (U.r1 - rng.uniform(0, 2 * b1)) * u / np.linalg.norm(u)
        else:
            a[m1] += 0.02 * rng.standard_normal(int(m1.sum()))
        # offsets from the graph spread across the bands where phi moves
        v = np.zeros(d2)
        v[m2] = rng.standard_normal(int(m2.sum()))
        b = G.fbar(a) + b1 * 4.0 ** -rng.uniform(-0.5, 4) * v / np.linalg.norm(v)
        pts.append((a, b))
    outside = [(U.c1 + 2 * U.r1 * rng.standard_normal(d1), U.c2 + 2 * U.r2 * rng.standard_normal(d2))
               for _ in range(n)]
    outside = [p for p in outside if not U.contains(*p)]

    flat = max((float(np.linalg.norm(fl.forward(x, v))) for x, v in zip(G.nodes, G.values)
                if U.contains(x, v)), default=0.0)
    same = all(np.array_equal(fl.forward(a, b, "h"), fl.forward(a, b, "phi")) for a, b in outside)
    inv_gap = max(float(np.linalg.norm(fl.inverse(a, b, "h") - fl.inverse(a, b, "phi")))
                  for a, b in pts)
    ratios, rt = [], 0.0
    for a, b in pts:
        tr = PicardTrace()
        z = fl.inverse(a, b, "h", tr)
        ratios += tr.ratios
        rt = max(rt, float(np.linalg.norm(fl.forward(a, z) - b)))
    h = 1e-7
    dF = d2phi = 0.0
    for (a, b), r in zip(pts, rng.uniform(h, 1.2, n)):
        dF = max(dF, float(np.linalg.norm(fl.F(r + h, a) - fl.F(r - h, a))) / (2 * h))
        d2phi = max(d2phi, float(np.linalg.norm(fl.twin.grad2(a, b))))
    return [
        {"clause": "flatten.graph-to-zero-section", "value": flat, "bound": 1e-8, "ok": flat <= 1e-8},
        {"clause": "flatten.twin-agree-off-window", "value": float(not same), "bound": 0.0, "ok": same},
        {"clause": "flatten.twin-inverse-gap", "value": inv_gap, "bound": fl.eps, "ok": inv_gap <= fl.eps},
        {"clause": "flatten.picard-ratio", "value": max(ratios, default=0.0), "bound": 0.5,
         "ok": max(ratios, default=0.0) <= 0.5},
        {"clause": "flatten.staircase-r-derivative", "value": dF, "bound": 0.5 + 1e-6, "ok": dF <= 0.5 + 1e-6},
        {"clause": "flatten.phi-fiber-gradient", "value": d2phi, "bound": 0.5 + 1e-5,
         "ok": d2phi <= 0.5 + 1e-5},
        {"clause": "flatten.inverse-roundtrip", "value": rt, "bound": 1e-8, "ok": rt <= 1e-8},
    ]


# invariants

def _suite(checks: dict[str, bool]) -> dict:
    checks = {k: bool(v) for k, v in checks.items()}
    return {"passed": all(checks.values()), "checks": checks}


def invariant_suites(dim: int = 32, seed: int = 0, n: int = 100, tau_fp: float = 1e-10,
                     tau_rank: float = 1e-6) -> dict[str, dict]:
    rng = np.random.default_rng(seed)
    decomp = BlockDecomposition.standard(dim)
    allidx = range(1, dim + 1)
    out = {}

    vs = [random_sparse(rng, allidx, dim) for _ in range(n)]
    ok_lin = ok_sym = ok_json = True
    for v, w in zip(vs, vs[1:]):
        a = float(rng.standard_normal())
        ok_lin &= bool(np.allclose(algebra(a, v, w).to_dense(), a * v.to_dense() + w.to_dense(),
                                   atol=1e-14))
        ok_sym &= inner(v, w) == inner(w, v)
        ok_json &= SparseVec.from_json(v.dumps(), dim) == v
    out["seqspace"] = _suite({"algebra": ok_lin, "inner-symmetric": ok_sym, "json-roundtrip": ok_json})

    kit = GaugeKit.build(decomp)
    st = SmoothStep(0.5, 1.0)
    ts = rng.uniform(0, 1.5, n)
    plateaus = all((st(t) == 0.0) if t <= 0.5 else (st(t) == 1.0) if t >= 1 else 0 <= st(t) <= 1
                   for t in ts)
    om_bound = all(kit.omega(v) <= 0.25 * l2_norm(v) + 1e-15 for v in vs)
    dead = all(not kit.curve(float(t)).support for t in rng.uniform(1, 3, n))
    dl = True
    for _ in range(n):
        a, b = sorted(rng.uniform(1e-4, 2, 2))
        dl &= kit.omega(kit.curve(a) - kit.curve(b)) <= 0.5 * (b - a) + 1e-12
    sq = kit.square
    homog = all(math.isclose(sq.mu(2 * a, 2 * b), 2 * sq.mu(a, b), rel_tol=1e-10)
                for a, b in rng.uniform(-1, 1, (n, 2)))
    out["gauges"] = _suite({"smoothstep-plateaus": plateaus, "omega-bound": om_bound,
                            "curve-vanishes": dead, "curve-omega-lipschitz": dl,
                            "square-homogeneous": homog})

    s = ExtractionScheme(lambda x1: l2_norm(x1), kit, decomp.product(["extraction"]), tau_fp=tau_fp)
    e1 = list(decomp.blocks["data"]) + list(decomp.blocks["guarded"])
    rt = 0.0
    res_ok = True
    for _ in range(n):
        x1 = random_sparse(rng, e1, dim, radius=0.5)
        x2 = random_sparse(rng, decomp.blocks["extraction"], dim, radius=0.5)
        p = ProductPoint(x1, x2)
        try:
            q = s.forward(p)
        except ExcludedSetError:
            continue
        rt = max(rt, l2_norm(s.inverse(q).join() - p.join()))
        psi = l2_norm(x1)
        r = s.rho(p)
        if r < 1:
            F = s._dense.fixed_point_map(psi, s._y(q.x2))
            res = solve_fixed_point_full(FixedPointProblem(F, (0.0, 1.0), tau_fp))
            res_ok &= res.residual <= tau_fp
    out["extract"] = _suite({"scheme-roundtrip": rt <= 1e-8, "fixed-point-residual": bool(res_ok)})

    t = np.linspace(-1, 1, 201)
    X = np.zeros((len(t), dim))
    X[:, 0] = t
    cover = build_ball_cover(abs_map(1), lambda Y: np.full(len(np.atleast_2d(Y)), 0.5), X, decomp)
    pu = PartitionOfUnity(cover)
    pts = X[rng.integers(0, len(t), n)] + 1e-3 * rng.standard_normal((n, dim))
    norm_ok = grad_ok = vanish_ok = True
    for x in pts:
        try:
            stt = pu.state(x)
        except ExtractKitError:
            continue
        norm_ok &= abs(stt.weights.sum() - 1) <= 1e-12
        grad_ok &= bool(np.abs(stt.grads.sum(axis=0)).max() <= 1e-6)
        vanish_ok &= all(not np.any(g) for b, g in zip(stt.bumps, stt.bump_grads) if b == 0.0)
    l2, l2g = l2_norm_pair()
    supp = all(suppression_check(l2, 0, w, l2g, tau_rank) for w in rng.standard_normal((n, 4)) + 0.1)
    out["smoothing"] = _suite({"partition-sum": bool(norm_ok), "partition-gradient-sum": bool(grad_ok),
                               "bump-vanishing": bool(vanish_ok), "suppression-l2": supp})
    return out
