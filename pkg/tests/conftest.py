import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bigtan.finsler import FAMILIES, FinslerStructure, sample_base_point, sample_fiber_vector, sample_sphere  # noqa: E402
from bigtan.legendre import CartanDual  # noqa: E402


@pytest.fixture(params=FAMILIES)
def family(request):
    return request.param


@pytest.fixture
def structure(family):
    return FinslerStructure(family, 2)


@pytest.fixture
def dual(structure):
    return CartanDual(structure)


def sample_points(s, count, seed=0):
    """Seeded (x, y, p) triples for property tests."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x = sample_base_point(rng, s.dim)
        out.append((x, sample_fiber_vector(rng, s, x), sample_sphere(rng, s.dim)))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
