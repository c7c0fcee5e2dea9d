"""Finitely supported vectors standing in for elements of l2.

Indices are 1-based basis labels capped by a truncation dimension ``dim``.
Numerical kernels elsewhere work on dense arrays where position ``i - 1``
holds the coefficient of ``e_i``; ``to_dense``/``from_dense`` convert.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, EquatorProximityError, TruncationError

DEFAULT_DIM = 64
DEFAULT_T_MIN = 0.1
TAU_NORM = 1e-12


def _check_index(i: int, dim: int) -> None:
    if i < 1 or i > dim:
        raise TruncationError(f"index {i} outside 1..{dim}")


@dataclass(frozen=True, eq=False)
class SparseVec:
    """Coefficient map index -> value with zeros dropped."""

    entries: Mapping[int, float]
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        raw = self.entries.items() if isinstance(self.entries, Mapping) else self.entries
        clean: dict[int, float] = {}
        for i, v in raw:
            i = int(i)
            _check_index(i, self.dim)
            v = float(v)
            if v != 0.0:
                clean[i] = clean.get(i, 0.0) + v
                if clean[i] == 0.0:
                    del clean[i]
        object.__setattr__(self, "entries", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def zero(cls, dim: int = DEFAULT_DIM) -> "SparseVec":
        return cls({}, dim)

    @classmethod
    def basis(cls, k: int, dim: int = DEFAULT_DIM, scale: float = 1.0) -> "SparseVec":
        return cls({k: scale}, dim)

    @classmethod
    def from_dense(cls, arr: np.ndarray, dim: int | None = None) -> "SparseVec":
        arr = np.asarray(arr, dtype=float)
        dim = len(arr) if dim is None else dim
        if len(arr) > dim:
            nz = np.flatnonzero(arr[dim:])
            if len(nz):
                raise TruncationError(f"index {dim + nz[0] + 1} outside 1..{dim}")
        nz = np.flatnonzero(arr)
        return cls({int(i) + 1: float(arr[i]) for i in nz}, dim)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, v in self.entries.items():
            out[i - 1] = v
        return out

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.entries)

    def __getitem__(self, i: int) -> float:
        return self.entries.get(i, 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return self.dim == other.dim and dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash((self.dim, tuple(self.entries.items())))

    def __repr__(self) -> str:
        return f"SparseVec({dict(self.entries)}, dim={self.dim})"

    def __add__(self, other: "SparseVec") -> "SparseVec":
        return algebra(1.0, self, other)

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return algebra(-1.0, other, self)

    def __neg__(self) -> "SparseVec":
        return self * -1.0

    def __mul__(self, a: float) -> "SparseVec":
        return SparseVec({i: a * v for i, v in self.entries.items()}, self.dim)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"entries": [[i, v] for i, v in self.entries.items()]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict | str, dim: int = DEFAULT_DIM) -> "SparseVec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls([(int(i), float(v)) for i, v in obj["entries"]], dim)


def _common_dim(v: SparseVec, w: SparseVec) -> int:
    if v.dim != w.dim:
        raise TruncationError(f"dimension mismatch {v.dim} != {w.dim}")
    return v.dim


def algebra(a: float, v: SparseVec, w: SparseVec) -> SparseVec:
    """Return a*v + w."""
    dim = _common_dim(v, w)
    out = dict(w.entries)
    if a != 0.0:
        for i, x in v.entries.items():
            out[i] = out.get(i, 0.0) + a * x
    return SparseVec(out, dim)


def inner(v: SparseVec, w: SparseVec) -> float:
    _common_dim(v, w)
    if len(v) > len(w):
        v, w = w, v
    return math.fsum(x * w[i] for i, x in v.entries.items())


def l2_norm(v: SparseVec) -> float:
    # hypot rescales internally, so tiny or huge entries neither underflow nor overflow
    return math.hypot(*v.entries.values())


@dataclass(frozen=True)
class BlockDecomposition:
    """Named disjoint index blocks partitioning 1..dim."""

    blocks: Mapping[str, tuple[int, ...]]
    dim: int = DEFAULT_DIM
    _owner: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        owner: dict[int, str] = {}
        frozen = {}
        for name, idx in self.blocks.items():
            idx = tuple(sorted(int(i) for i in idx))
            for i in idx:
                _check_index(i, self.dim)
                if i in owner:
                    raise DomainError(f"index {i} in blocks {owner[i]!r} and {name!r}")
                owner[i] = name
            frozen[name] = idx
        missing = set(range(1, self.dim + 1)) - set(owner)
        if missing:
            raise DomainError(f"indices {sorted(missing)[:5]}... not covered by any block")
        object.__setattr__(self, "blocks", MappingProxyType(frozen))
        object.__setattr__(self, "_owner", owner)

    @classmethod
    def standard(cls, dim: int = DEFAULT_DIM) -> "BlockDecomposition":
        """Data on indices 1,2 mod 4, extraction on 3 mod 4, guarded on 0 mod 4."""
        if dim % 4:
            raise DomainError("standard layout needs dim divisible by 4")
        r = range(1, dim + 1)
        return cls(
            {
                "data": tuple(i for i in r if i % 4 in (1, 2)),
                "extraction": tuple(i for i in r if i % 4 == 3),
                "guarded": tuple(i for i in r if i % 4 == 0),
            },
            dim,
        )

    def block_of(self, i: int) -> str:
        return self._owner[i]

    def positions(self, name: str) -> np.ndarray:
        return np.asarray(self.blocks[name], dtype=int) - 1

    def project(self, v: SparseVec, name: str) -> SparseVec:
        keep = set(self.blocks[name])
        return SparseVec({i: x for i, x in v.entries.items() if i in keep}, self.dim)

    def merge(self, groups: Mapping[str, Sequence[str]]) -> "BlockDecomposition":
        """Coarser decomposition whose blocks are unions of named blocks."""
        return BlockDecomposition(
            {g: tuple(i for n in names for i in self.blocks[n]) for g, names in groups.items()},
            self.dim,
        )

    def product(self, second: Sequence[str]) -> "BlockDecomposition":
        """Two-block split E1 (everything else) and E2 (the named blocks)."""
        first = [n for n in self.blocks if n not in second]
        return self.merge({"E1": first, "E2": list(second)})


@dataclass(frozen=True)
class ProductPoint:
    """(x1, x2) with disjoint supports."""

    x1: SparseVec
    x2: SparseVec

    def __post_init__(self):
        _common_dim(self.x1, self.x2)
        if set(self.x1.support) & set(self.x2.support):
            raise DomainError("product components share support")

    @classmethod
    def split(cls, v: SparseVec, decomp: BlockDecomposition) -> "ProductPoint":
        return cls(decomp.project(v, "E1"), decomp.project(v, "E2"))

    def join(self) -> SparseVec:
        return self.x1 + self.x2

    def to_json(self) -> dict:
        return {"x1": self.x1.to_json(), "x2": self.x2.to_json()}


@dataclass(frozen=True)
class SpherePoint:
    """Point (u, t) on the upper unit sphere with t kept away from the equator."""

    u: SparseVec
    t: float
    t_min: float = DEFAULT_T_MIN

    def __post_init__(self):
        if self.t < self.t_min:
            raise EquatorProximityError(f"t={self.t} below margin {self.t_min}")
        if abs(l2_norm(self.u) ** 2 + self.t**2 - 1.0) > 1e-9:
            raise DomainError("point not on the unit sphere")


def lift_to_sphere(u: SparseVec, t_min: float = DEFAULT_T_MIN) -> SpherePoint:
    n2 = math.fsum(x * x for x in u.entries.values())
    if n2 >= 1.0 or math.sqrt(1.0 - n2) < t_min:
        raise EquatorProximityError(f"|u|^2={n2} leaves t below {t_min}")
    return SpherePoint(u, math.sqrt(1.0 - n2), t_min)


def chart_inverse(y: SpherePoint) -> SparseVec:
    return y.u


def tangent_slope(y: SpherePoint, w: SparseVec) -> float:
    """Slope -<u, w>/t of the height function along w."""
    return -inner(y.u, w) / y.t


def random_sparse(
    rng: np.random.Generator,
    indices: Sequence[int],
    dim: int,
    support: tuple[int, int] = (5, 20),
    radius: float = 0.9,
) -> SparseVec:
    """Normal coefficients on a random support, rescaled to norm U(0, radius)."""
    k = int(rng.integers(support[0], support[1] + 1))
    k = min(k, len(indices))
    idx = rng.choice(np.asarray(indices), size=k, replace=False)
    vals = rng.standard_normal(k)
    vals *= radius * rng.uniform(0.05, 1.0) / np.linalg.norm(vals)
    return SparseVec(dict(zip((int(i) for i in idx), vals)), dim)
