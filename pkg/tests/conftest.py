import cmath
import math

import numpy as np
import pytest

from wpadd.lattice import Lattice

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def square():
    return Lattice.from_half_periods(1, 1j)


@pytest.fixture(scope="session")
def hexagonal():
    return Lattice.from_half_periods(1, cmath.exp(1j * math.pi / 3))


@pytest.fixture(scope="session")
def generic():
    return Lattice.from_half_periods(1, 0.3 + 1.1j)


@pytest.fixture(scope="session", params=["square", "hexagonal", "generic"])
def lattice(request):
    return request.getfixturevalue(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cell_point(rng, lat, margin=0.1):
    """Uniform point of the fundamental cell at least margin * shortest from the poles."""
    from wpadd.lattice import nearest_lattice_distance

    while True:
        a, b = rng.random(2)
        z = complex(a * 2 * lat.omega1 + b * 2 * lat.omega2)
        if nearest_lattice_distance(z, lat) > margin * lat.shortest_vector_length:
            return z


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
