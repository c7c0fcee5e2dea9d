"""Acceptance criteria 1-10 at their stated tolerances."""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from extractkit.demos import abs_map, data_corpus, flatten_table, graph_demo, graph_samples, linear_eps
from extractkit.extract import (Ball, CoverPatch, DenseScheme, ExtractionScheme, FixedPointProblem,
                                GraphExtraction, GraphSpec, PatchPiece, patch_covers, solve_fixed_point_full)
from extractkit.gauges import GaugeKit
from extractkit.seqspace import BlockDecomposition, ProductPoint, SparseVec, l2_norm, random_sparse
from extractkit.smoothing import PartitionOfUnity, PipelineConfig, build_ball_cover, compose_pipeline, negative_demo

DIM = 64
BASE = BlockDecomposition.standard(DIM)
KIT = GaugeKit.build(BASE)
SQ = KIT.square


@pytest.mark.criterion(1)
def test_deleting_curve(criterion):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = -math.inf
    for a, b in np.sort(rng.uniform(1e-4, 2, (10_000, 2)), axis=1):
        worst = max(worst, KIT.omega(KIT.curve(a) - KIT.curve(b)) - 0.5 * (b - a))
    dead = all(not KIT.curve(float(t)).support for t in rng.uniform(1, 10, 1000))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12 and dead and not KIT.curve(1.0).support
    assert elapsed < 5
    criterion(f"max excess {worst:.2e}, {elapsed:.2f}s")


@pytest.mark.criterion(2)
def test_smooth_square(criterion):
    rng = np.random.default_rng(2)
    for x, y in rng.uniform(-3, 3, (10_000, 2)):
        m = SQ.mu(x, y)
        ax, ay = abs(x), abs(y)
        assert max(ax, ay) <= m + 1e-10 and m <= ax + ay + 1e-10
        assert m <= 2 * max(ax, ay) + 1e-10
        if 2 * ay <= ax:
            assert m == ax
        if 2 * ax <= ay:
            assert m == ay
        assert SQ.mu(x, rng.uniform(0, 1) * y) <= m + 1e-10
        assert math.isclose(SQ.mu(-x, -y), m, rel_tol=0, abs_tol=1e-15)
    h, gerr = 1e-7, 0.0
    for x, y in rng.uniform(-2, 2, (10_000, 2)):
        if min(abs(x), abs(y)) < 1e-3:
            continue
        gx, gy = SQ.grad(x, y)
        fx = (SQ.mu(x + h, y) - SQ.mu(x - h, y)) / (2 * h)
        fy = (SQ.mu(x, y + h) - SQ.mu(x, y - h)) / (2 * h)
        gerr = max(gerr, abs(gx - fx), abs(gy - fy))
    assert gerr <= 1e-6
    criterion(f"gradient vs FD {gerr:.2e}")


def _grid_cell_root(F, n=10**6, lo=0.0, hi=1.0):
    """Root of G = a - F(a) on the n-cell uniform grid, linear in the final cell.

    G is strictly increasing, so its one sign change is found by bisection
    over grid indices; the cell is the one an exhaustive scan returns."""
    a = np.linspace(lo, hi, n + 1)
    G = lambda k: a[k] - F(float(a[k]))
    i, j = 0, n
    if G(i) >= 0:
        return lo
    while j - i > 1:
        k = (i + j) // 2
        if G(k) < 0:
            i = k
        else:
            j = k
    gi, gj = G(i), G(j)
    return a[i] - gi * (a[j] - a[i]) / (gj - gi)


def _exhaustive_cell(F, n=10**6):
    a = np.linspace(0.0, 1.0, n + 1)
    g = a - np.fromiter((F(float(t)) for t in a), float, n + 1)
    k = int(np.flatnonzero(g >= 0)[0]) - 1
    return a[k] - g[k] * (a[k + 1] - a[k]) / (g[k + 1] - g[k])


@pytest.mark.criterion(3)
def test_fixed_point(criterion):
    rng = np.random.default_rng(3)
    ext = np.array(BASE.blocks["extraction"])
    s = DenseScheme(KIT, ext)
    problems = []
    while len(problems) < 1000:
        psi = float(rng.uniform(0, 0.9))
        y = np.zeros(len(ext))
        k = rng.choice(len(ext), 3, replace=False)
        y[k] = rng.uniform(-0.5, 0.5, 3)
        if s.rho(psi, y) < 1:
            problems.append(s.fixed_point_map(psi, y))
    res_worst = gap_worst = brent_worst = 0.0
    for F in problems:
        r = solve_fixed_point_full(FixedPointProblem(F, (0.0, 1.0), 1e-10))
        res_worst = max(res_worst, r.residual)
        gap_worst = max(gap_worst, abs(r.alpha - _grid_cell_root(F)))
        brent_worst = max(brent_worst, abs(r.alpha - brentq(lambda a: a - F(a), 0.0, 1.0, xtol=1e-14)))
    scan_worst = max(abs(_grid_cell_root(F) - _exhaustive_cell(F)) for F in problems[:3])
    limit = abs(KIT.omega(KIT.curve(1e-12) * -1.0) - 1 / (4 * math.sqrt(15)))
    assert res_worst <= 1e-10 and gap_worst <= 1e-8 and brent_worst <= 1e-8
    assert scan_worst <= 1e-12 and limit <= 1e-10
    criterion(f"residual {res_worst:.1e}, grid gap {gap_worst:.1e}, F(0+) err {limit:.1e}")


@pytest.mark.criterion(4)
def test_scheme_bijectivity(criterion):
    rng = np.random.default_rng(4)
    dec = BASE.product(["extraction"])
    s = ExtractionScheme(lambda x1: l2_norm(x1), KIT, dec)
    E1, E2 = dec.blocks["E1"], dec.blocks["E2"]
    t0 = time.perf_counter()
    worst = 0.0
    fixed = 0
    for _ in range(1000):
        # half the draws are large enough to land on rho >= 1
        r = 0.6 if _ % 2 else 2.0
        p = ProductPoint(random_sparse(rng, E1, DIM, radius=r), random_sparse(rng, E2, DIM, radius=r))
        q = s.forward(p)
        assert q.x1 == p.x1
        worst = max(worst, l2_norm(s.inverse(q).join() - p.join()))
        q2 = ProductPoint(random_sparse(rng, E1, DIM, radius=0.6), random_sparse(rng, E2, DIM, radius=0.6))
        p2 = s.inverse(q2)
        assert p2.x1 == q2.x1
        worst = max(worst, l2_norm(s.forward(p2).join() - q2.join()))
        if s.rho(p) >= 1:
            fixed += 1
            assert q == p and s.inverse(p) == p
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-8 and elapsed < 30 and fixed > 0
    criterion(f"roundtrip {worst:.1e}, {fixed} points on rho >= 1, {elapsed:.1f}s")


@pytest.mark.criterion(5)
@pytest.mark.parametrize("delta", [0.1, 0.5])
def test_flattening(criterion, delta):
    G, _ = graph_demo(DIM, delta, n_probe=0)
    rows = {r["clause"]: r for r in flatten_table(G, n=1000)}
    assert all(r["ok"] for r in rows.values()), rows
    criterion(f"delta={delta}: " + ", ".join(f"{k.split('.')[1]}={r['value']:.1e}" for k, r in rows.items()))


@pytest.mark.criterion(6)
@pytest.mark.parametrize("delta", [0.1, 0.5])
def test_graph_displacement(criterion, delta):
    G, rows = graph_demo(DIM, delta, n_probe=500)
    rng = np.random.default_rng(6)
    disp = max(r["displacement"] for r in rows)
    rt = max(r["roundtrip"] for r in rows)
    off = 0
    for x1 in G.nodes:
        for _ in range(20):
            y = rng.standard_normal(len(G.p2))
            y *= (G.tube.phi(x1) + rng.uniform(0, 0.5)) / np.linalg.norm(y)
            assert np.array_equal(G.g(x1, y), y) and np.array_equal(G.g_inverse(x1, y), y)
            off += 1
    for _ in range(200):
        p = SparseVec.from_dense(rng.standard_normal(DIM))
        if not G.U.contains(*G.split(p)):
            assert G.forward(p) == p and G.inverse(p) == p
    assert disp <= delta and rt <= 1e-7
    criterion(f"delta={delta}: max displacement {disp:.3e}, roundtrip {rt:.1e}")


def _vec(head):
    d = np.zeros(DIM)
    d[: len(head)] = head
    return SparseVec.from_dense(d)


@pytest.mark.criterion(7)
def test_finite_patching(criterion):
    rng = np.random.default_rng(7)
    cloud = lambda c, k: tuple(_vec(np.asarray(c) + 0.1 * rng.standard_normal(8)) for _ in range(k))
    c0, c1, c2 = np.zeros(8), np.eye(8)[0] * 0.3, -np.eye(8)[0] * 0.3
    X0 = cloud(c0, 5)
    X1 = cloud(c1, 4) + X0[:2]
    X2 = cloud(c2, 4) + X0[2:3]
    ball = lambda c, r: Ball(_vec(c), r)
    cp = CoverPatch([PatchPiece(X0, ball(c0, 0.6), ball(c0, 0.8)),
                     PatchPiece(X1, ball(c1, 0.6), ball(c1, 0.8)),
                     PatchPiece(X2, ball(c2, 0.6), ball(c2, 0.8))], ball(c0, 0.35), 0.2)
    P = patch_covers(cp)
    corpus = [_vec(0.2 * rng.standard_normal(8)) for _ in range(300)]
    # probes just off each point of X0 along the extraction block, where the moves happen
    ext = np.array(BASE.positions("extraction"))
    for z in X0:
        for scale in (1e-4, 1e-3, 1e-2):
            d = np.zeros(DIM)
            d[ext[:2]] = scale * rng.standard_normal(2)
            corpus.append(z + SparseVec.from_dense(d))
    extra = [z for p in cp.pieces[1:] for z in p.points if not any(z == w for w in X0)]
    rep = P.check(corpus + extra)
    assert rep["max_displacement"] <= rep["budget"] <= sum(cp.stage_budgets())
    assert rep["collisions"] == 0 and rep["membership_violations"] == 0
    assert rep["max_displacement"] > 0
    criterion(f"displacement {rep['max_displacement']:.3e} <= {rep['budget']:.3e}, no collisions")


@pytest.mark.criterion(8)
def test_end_to_end(criterion):
    X = data_corpus(BASE, 1000, seed=0)
    t0 = time.perf_counter()
    g, report = compose_pipeline(abs_map(2), linear_eps(0.1), X, PipelineConfig(dim=DIM), BASE)
    elapsed = time.perf_counter() - t0
    s = report.summary()
    # corpus points become ball centers where phi = f, so also probe off center
    f, eps = abs_map(2), linear_eps(0.1)
    cover = g.approx.cover
    data = BASE.positions("data")
    rng = np.random.default_rng(8)
    off_phi = off_err = 0.0
    off_sigma = math.inf
    for x in X[:200]:
        n = int(np.argmin(cover.sq_dists(x)))
        d = np.zeros(DIM)
        d[data] = rng.standard_normal(len(data))
        y = x + 0.4 * cover.radii[n] * d / np.linalg.norm(d)
        e = eps(y)[0]
        val, J, _, _ = g.eval(y)
        off_phi = max(off_phi, np.linalg.norm(g.approx.value(y) - f(y)[0]) / e)
        off_err = max(off_err, np.linalg.norm(val - f(y)[0]) / e)
        off_sigma = min(off_sigma, float(np.linalg.svd(J, compute_uv=False)[-1]))
    assert off_phi <= 0.5 and off_err <= 1 and off_sigma >= 1e-6
    assert s["n"] == 1000
    assert s["max_phi_ratio"] <= 0.5 and s["max_err_ratio"] <= 1
    assert s["min_sigma"] >= 1e-6 and s["non_surjective"] == 0 and s["outside_cover"] == 0
    assert elapsed < 180
    criterion(f"err/eps {s['max_err_ratio']:.2e}, phi/eps {s['max_phi_ratio']:.2e}, "
              f"min sigma {s['min_sigma']:.3e}, {elapsed:.1f}s; off-center err/eps {off_err:.2e}, "
              f"phi/eps {off_phi:.2e}, min sigma {off_sigma:.3e}")


@pytest.mark.criterion(9)
def test_partition_suite(criterion):
    rng = np.random.default_rng(9)
    t = np.linspace(-1, 1, 401)
    X = np.zeros((len(t), DIM))
    X[:, 0] = t
    cover = build_ball_cover(abs_map(1), lambda Y: np.full(len(np.atleast_2d(Y)), 0.5), X, BASE)
    pu = PartitionOfUnity(cover)
    pts = X[rng.integers(0, len(t), 1000)]
    pts[:, :2] += rng.uniform(-1, 1, (1000, 2)) * 0.3 * cover.radii.min()
    h = 1e-7
    s_err = g_err = 0.0
    zeros = 0
    for x in pts:
        st = pu.state(x)
        s_err = max(s_err, abs(st.weights.sum() - 1))
        # finite differences of the summed weights over the moving axes
        for d in range(2):
            e = np.zeros(DIM)
            e[d] = h
            fd = (pu(x + e)[1].sum() - pu(x - e)[1].sum()) / (2 * h)
            g_err = max(g_err, abs(fd), abs(st.grads[:, d].sum()))
        for b, gb in zip(st.bumps, st.bump_grads):
            if b == 0.0:
                zeros += 1
                assert not np.any(gb)
    assert s_err <= 1e-12 and g_err <= 1e-6
    criterion(f"sum err {s_err:.1e}, grad-sum {g_err:.1e}, {zeros} vanishing bumps checked")


@pytest.mark.criterion(10)
def test_negative_demo(criterion):
    res = negative_demo(DIM, step=1e-3, eps=1 / 3)
    t = res["stationary_point"]
    assert res["sign_changes"] and t is not None and -1.5 < t < 1.5
    assert res["all_surjective"] and res["min_sigma"] >= 1e-6 and res["max_err_ratio"] <= 1
    assert res["obstruction"]
    criterion(f"stationary point near t={t:.3f}, min sigma {res['min_sigma']:.3e}")
