import numpy as np
import pytest
from hypothesis import given, strategies as st

from extractkit.errors import DomainError
from extractkit.seqspace import BlockDecomposition, SparseVec
from extractkit.smoothing import (BallCover, PartitionOfUnity, block_operators, build_ball_cover,
                                  critical_certificate, graph_section, l2_norm_pair,
                                  suppression_check, weighted_l4)
from extractkit.smoothing.approximant import Approximant, approximant_eval, guard_predicate, sigma_min
from extractkit.smoothing.section import fd_gradient

DIM = 32
DEC = BlockDecomposition.standard(DIM)


def absf(X):
    return np.abs(np.atleast_2d(X)[:, :2])


def eps_fn(X):
    return 0.1 * (1 + np.linalg.norm(np.atleast_2d(X), axis=1))


@pytest.fixture(scope="module")
def approx():
    rng = np.random.default_rng(3)
    X = np.zeros((300, DIM))
    X[:, [0, 1]] = rng.uniform(-0.5, 0.5, (300, 2))
    cover = build_ball_cover(absf, eps_fn, X, DEC)
    ops = block_operators(2, cover, DEC)
    return Approximant(absf, cover, PartitionOfUnity(cover), ops), X


def test_single_ball_formula():
    cover = BallCover(np.zeros((1, DIM)), np.array([1.0]), np.array([0.2]))
    ops = block_operators(2, cover, DEC)
    x = np.zeros(DIM)
    x[[0, 3, 7]] = [0.1, 0.2, -0.3]
    val, J = approximant_eval(absf, cover, PartitionOfUnity(cover), ops, x)
    np.testing.assert_array_equal(val, absf(np.zeros(DIM))[0] + ops.T(0) @ x)
    np.testing.assert_array_equal(J, ops.T(0))
    assert np.linalg.matrix_rank(J) == 2


def test_phi_within_half_eps(approx):
    a, X = approx
    for x in X:
        assert np.linalg.norm(a.value(x) - absf(x)[0]) <= eps_fn(x)[0] / 2


def test_jacobian_matches_fd(approx):
    a, X = approx
    rng = np.random.default_rng(0)
    h = 1e-7
    r = a.cover.radii.min()
    for x in X[:100]:
        d = rng.standard_normal(DIM)
        x = x + 0.4 * r * d / np.linalg.norm(d)
        J = a.eval(x)[1]
        fd = np.empty_like(J)
        for i in range(DIM):
            e = np.zeros(DIM)
            e[i] = h
            fd[:, i] = (a.value(x + e) - a.value(x - e)) / (2 * h)
        assert np.abs(fd - J).max() <= 1e-5


def test_guarded_coordinate_surjective(approx):
    a, X = approx
    x = X[0].copy()
    x[DEC.positions("guarded")[0]] = 0.2 * a.cover.radii.min()
    val, J, active = a.eval(x)
    v = critical_certificate(J, x, DEC, active)
    assert v.verdict == "surjective"


def test_guard_predicate():
    x = np.zeros(DIM)
    x[DEC.positions("data")[:3]] = 1.0
    x[DEC.positions("guarded")[:2]] = -2.0
    assert not guard_predicate(x, DEC)
    x[DEC.positions("extraction")[0]] = 1e-9
    assert guard_predicate(x, DEC)


@pytest.mark.parametrize("s,verdict", [(1e-3, "surjective"), (1e-6, "surjective"),
                                       (5e-7, "inconclusive"), (1e-7, "inconclusive"),
                                       (5e-8, "critical"), (0.0, "critical")])
def test_verdict_bands(s, verdict):
    J = np.zeros((2, DIM))
    J[0, 0], J[1, 1] = 1.0, s
    v = critical_certificate(J, np.zeros(DIM), DEC)
    assert v.verdict == verdict and v.sigma_min == pytest.approx(s, abs=1e-18)
    assert v.to_json()["verdict"] == verdict


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=6, max_size=6))
def test_l2_section_is_zero(coords):
    w = np.zeros(12)
    w[:6] = coords
    l2, _ = l2_norm_pair()
    v = graph_section(w, [6, 7, 8], l2)
    assert np.array_equal(v, np.zeros(3))


def test_weighted_l4_section_zero():
    norm, _ = weighted_l4([1.0, 2.0, 3.0, 4.0])
    v = graph_section(np.array([0.3, -0.7, 0.0, 0.0]), [2, 3], norm)
    assert np.abs(v).max() <= 1e-8


# every row touches the target pair, so the minimum is not degenerate
SHEAR = np.array([[1.0, 0.2, 0.5, -0.3], [0.1, 1.0, 0.4, 0.6],
                  [0.6, -0.4, 1.0, 0.2], [0.3, 0.5, -0.2, 1.0]])
WEIGHTS = np.array([1.0, 2.0, 0.5, 3.0])


def sheared_l4(x):
    return float((WEIGHTS * (SHEAR @ x[:4]) ** 4).sum() ** 0.25)


def grid_argmin(w):
    """Two-level grid scan over the last two coordinates."""
    def scan(c, half, n):
        g = np.linspace(-half, half, n)
        A, B = np.meshgrid(c[0] + g, c[1] + g, indexing="ij")
        P = np.zeros(A.shape + (4,))
        P[..., 0], P[..., 1] = w[0], w[1]
        P[..., 2], P[..., 3] = w[2] + A, w[3] + B
        vals = (WEIGHTS * np.einsum("ij,abj->abi", SHEAR, P) ** 4).sum(axis=-1)
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        return np.array([A[i, j], B[i, j]])

    c = scan(np.zeros(2), 2.0, 2001)
    c = scan(c, 4e-3, 801)
    return scan(c, 2e-5, 201)


def test_sheared_l4_matches_grid_scan():
    rng = np.random.default_rng(5)
    for _ in range(5):
        w = np.zeros(4)
        w[:2] = rng.uniform(-1, 1, 2)
        v = graph_section(w, [2, 3], sheared_l4)
        assert np.abs(v - grid_argmin(w)).max() <= 1e-4


def test_section_continuity():
    rng = np.random.default_rng(6)
    for _ in range(10):
        w = np.zeros(4)
        w[:2] = rng.uniform(-1, 1, 2)
        d = np.zeros(4)
        d[:2] = rng.standard_normal(2)
        d *= 1e-3 / np.linalg.norm(d)
        gap = np.linalg.norm(graph_section(w, [2, 3], sheared_l4) - graph_section(w + d, [2, 3], sheared_l4))
        assert gap <= 10 * 1e-3**0.5


def test_suppression_l2_closed_form():
    l2, grad = l2_norm_pair()
    w = SparseVec({1: 1.0, 2: 1.0}, 4)
    assert suppression_check(l2, 0, w, grad)
    assert grad(w.to_dense())[0] == pytest.approx(2**-0.5)


def test_suppression_not_applicable():
    l2, grad = l2_norm_pair()
    assert suppression_check(l2, 2, np.array([1.0, 1.0, 0.0, 0.0]), grad) is False


def test_suppression_zero_vector():
    l2, grad = l2_norm_pair()
    with pytest.raises(DomainError):
        suppression_check(l2, 0, np.zeros(4), grad)


def test_suppression_weighted_l4_fd():
    rng = np.random.default_rng(8)
    norm, grad = weighted_l4([1.0, 2.0, 3.0, 4.0])
    for _ in range(1000):
        w = rng.uniform(-1, 1, 4)
        j0 = int(rng.integers(0, 4))
        if w[j0] == 0.0:
            continue
        assert suppression_check(norm, j0, w)  # finite-difference gradient


def test_weighted_l4_gradient_matches_fd():
    norm, grad = weighted_l4([1.0, 2.0, 3.0, 4.0])
    rng = np.random.default_rng(9)
    for w in rng.uniform(-1, 1, (50, 4)):
        np.testing.assert_allclose(grad(w), fd_gradient(norm, w), atol=1e-6)


def test_sigma_min():
    assert sigma_min(np.diag([3.0, 0.5])) == pytest.approx(0.5)
