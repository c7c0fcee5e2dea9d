import numpy as np
import pytest
from hypothesis import settings

from extractkit.seqspace import BlockDecomposition, SparseVec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

DIM = 64


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def decomp():
    return BlockDecomposition.standard(DIM)


def dense_vec(values, dim=DIM):
    arr = np.zeros(dim)
    arr[: len(values)] = values
    return SparseVec.from_dense(arr)


ACCEPTANCE: dict[int, list[str]] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""
    n = request.node.get_closest_marker("criterion").args[0]
    lines = ACCEPTANCE.setdefault(n, [])
    k = len(lines)
    lines.append(f"criterion {n:2d}: FAIL  {request.node.name}")

    def done(detail: str) -> None:
        lines[k] = f"criterion {n:2d}: PASS  {detail}"
    return done


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for n in sorted(ACCEPTANCE):
            for line in ACCEPTANCE[n]:
                terminalreporter.write_line(line)
