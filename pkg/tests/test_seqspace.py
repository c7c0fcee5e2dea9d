import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from extractkit.errors import DomainError, EquatorProximityError, TruncationError
from extractkit.seqspace import (BlockDecomposition, ProductPoint, SparseVec, algebra, inner,
                                 l2_norm, lift_to_sphere, random_sparse, tangent_slope)

DIM = 64
coef = st.floats(-1e3, 1e3, allow_nan=False)
entries = st.dictionaries(st.integers(1, DIM), coef, max_size=20)
vecs = entries.map(lambda d: SparseVec(d, DIM))


def test_zero_entries_are_dropped():
    v = SparseVec({1: 0.0, 2: 3.0, 5: -0.0}, DIM)
    assert v.support == (2,)
    assert SparseVec([(3, 1.0), (3, -1.0)], DIM) == SparseVec.zero(DIM)


def test_truncation_rejected():
    with pytest.raises(TruncationError):
        SparseVec({DIM + 1: 1.0}, DIM)
    with pytest.raises(TruncationError):
        SparseVec.from_dense(np.r_[np.zeros(DIM), 1.0], DIM)
    with pytest.raises(TruncationError):
        algebra(1.0, SparseVec.zero(8), SparseVec.zero(16))


@given(vecs, vecs)
def test_a_zero_returns_w(v, w):
    assert algebra(0.0, v, w) == w


@pytest.mark.parametrize("k", [1, 17, DIM])
def test_basis_norm(k):
    assert l2_norm(SparseVec.basis(k, DIM)) == 1.0


def test_dense_oracle(rng):
    for _ in range(50):
        v = random_sparse(rng, range(1, DIM + 1), DIM, support=(20, 20), radius=5)
        w = random_sparse(rng, range(1, DIM + 1), DIM, support=(20, 20), radius=5)
        a = float(rng.standard_normal())
        dv, dw = v.to_dense(), w.to_dense()
        assert np.allclose(algebra(a, v, w).to_dense(), a * dv + dw, atol=1e-14, rtol=0)
        assert abs(inner(v, w) - dv @ dw) <= 1e-14 * max(1, abs(dv @ dw))
        assert abs(l2_norm(v) - np.linalg.norm(dv)) <= 1e-14


@given(vecs, vecs)
def test_cauchy_schwarz(v, w):
    assert abs(inner(v, w)) <= l2_norm(v) * l2_norm(w) * (1 + 1e-12) + 1e-300


@given(vecs)
def test_json_roundtrip(v):
    obj = json.loads(v.dumps())
    assert [i for i, _ in obj["entries"]] == sorted(v.support)
    assert SparseVec.from_json(obj, DIM) == v


def test_standard_blocks_partition():
    d = BlockDecomposition.standard(DIM)
    assert d.blocks["data"][:4] == (1, 2, 5, 6)
    assert d.blocks["extraction"][:2] == (3, 7)
    assert d.blocks["guarded"][:2] == (4, 8)
    assert sorted(i for b in d.blocks.values() for i in b) == list(range(1, DIM + 1))
    with pytest.raises(DomainError):
        BlockDecomposition({"a": (1, 2), "b": (2, 3)}, 3)
    with pytest.raises(DomainError):
        BlockDecomposition({"a": (1,)}, 2)


@given(vecs, st.sampled_from(["data", "extraction", "guarded"]))
def test_projection_idempotent_and_contractive(v, name):
    d = BlockDecomposition.standard(DIM)
    p = d.project(v, name)
    assert d.project(p, name) == p
    assert l2_norm(p) <= l2_norm(v)


@given(vecs)
def test_product_split_join(v):
    d = BlockDecomposition.standard(DIM).product(["extraction"])
    p = ProductPoint.split(v, d)
    assert p.join() == v
    assert set(p.x2.support) <= set(d.blocks["E2"])


def test_product_point_rejects_overlap():
    with pytest.raises(DomainError):
        ProductPoint(SparseVec({1: 1.0}), SparseVec({1: 2.0}))


def test_lift_examples():
    y = lift_to_sphere(SparseVec.zero(DIM))
    assert y.t == 1.0
    y = lift_to_sphere(SparseVec({1: 0.6}, DIM))
    assert math.isclose(y.t, 0.8, rel_tol=0, abs_tol=1e-15)
    with pytest.raises(EquatorProximityError):
        lift_to_sphere(SparseVec({1: 0.999}, DIM))


def test_lift_on_sphere(rng):
    for _ in range(100):
        u = random_sparse(rng, range(1, DIM + 1), DIM, radius=0.99)
        y = lift_to_sphere(u)
        assert abs(l2_norm(y.u) ** 2 + y.t**2 - 1) <= 1e-14
        assert y.u == u


def test_tangent_slope_examples():
    pole = lift_to_sphere(SparseVec.zero(DIM))
    assert tangent_slope(pole, SparseVec({3: 2.0}, DIM)) == 0.0
    y = lift_to_sphere(SparseVec({1: 0.6}, DIM))
    assert tangent_slope(y, SparseVec({2: 1.0}, DIM)) == 0.0
    # central difference of s(u) = sqrt(1 - |u|^2) along e1
    h = 1e-6
    fd = (math.sqrt(1 - (0.6 + h) ** 2) - math.sqrt(1 - (0.6 - h) ** 2)) / (2 * h)
    assert abs(tangent_slope(y, SparseVec({1: 1.0}, DIM)) - fd) < 1e-8
    assert abs(fd + 0.75) < 1e-8


@given(vecs, vecs, coef)
def test_tangent_slope_linear(w, w2, a):
    y = lift_to_sphere(SparseVec({1: 0.3, 4: -0.5}, DIM))
    lhs = tangent_slope(y, algebra(a, w, w2))
    rhs = a * tangent_slope(y, w) + tangent_slope(y, w2)
    assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(a) * l2_norm(w) + l2_norm(w2))
