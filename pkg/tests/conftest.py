import numpy as np
import pytest

from todastokes.manifold import ManifoldPoint, perturbed_point


@pytest.fixture(scope="session")
def pt_half():
    """Special point v = 0, e^u = 1/2 (no discrete canonical coordinates)."""
    return ManifoldPoint.special(0.0, 0.5)


@pytest.fixture(scope="session")
def pt_four():
    """Special point v = 0, e^u = 4 (outer critical points +-2i)."""
    return ManifoldPoint.special(0.0, 4.0)


@pytest.fixture(scope="session")
def pt_pert():
    return perturbed_point()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
