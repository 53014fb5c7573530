import numpy as np
import pytest

from robin_shapes import kernels
from robin_shapes.geometry import square_with_slit, unit_square
from robin_shapes.mesh import triangulate


def _available_backends():
    names = ["numpy"]
    try:
        kernels.backend("numba")
        names.append("numba")
    except ImportError:
        pass
    return names


@pytest.fixture(params=_available_backends())
def backend(request):
    return kernels.backend(request.param)


@pytest.fixture(scope="session")
def square_mesh():
    return triangulate(unit_square(), 0.1)


@pytest.fixture(scope="session")
def slit_mesh():
    return triangulate(square_with_slit(), 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
