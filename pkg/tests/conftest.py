import numpy as np
import pytest

from fiberloop import FiberSpec, make_grid


@pytest.fixture(scope="session")
def fiber():
    return FiberSpec()


@pytest.fixture(scope="session")
def small_grid():
    """Cheap grid for solver tests: 64 ps window, 62.5 fs resolution."""
    return make_grid(1024, 64.0, 1550.0)


@pytest.fixture(scope="session")
def fine_grid():
    """Resolves the Raman oscillation reasonably (dt = 15.6 fs)."""
    return make_grid(4096, 64.0, 1550.0)


@pytest.fixture(autouse=True)
def _seeded():
    np.random.seed(0)
