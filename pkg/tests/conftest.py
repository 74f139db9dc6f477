"""Shared fixtures: small grids and reference fields reused across files."""

import numpy as np
import pytest

from eikinetic import GridSpec, gen_constant, gen_rotational_2d, gen_vortex


@pytest.fixture(scope="session")
def grid2():
    """65x65 grid on [-1,1]^2, h = 1/32."""
    h = 1.0 / 32.0
    return GridSpec((65, 65), (h, h), (-1.0, -1.0))


@pytest.fixture(scope="session")
def grid3():
    """33^3 grid on [-1.5,1.5]^3, h = 3/32."""
    h = 3.0 / 32.0
    return GridSpec((33, 33, 33), (h, h, h), (-1.5, -1.5, -1.5))


@pytest.fixture(scope="session")
def vortex2(grid2):
    return gen_vortex(grid2, (0.0, 0.0))


@pytest.fixture(scope="session")
def vortex3(grid3):
    return gen_vortex(grid3, (0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def constant3(grid3):
    return gen_constant(grid3, (3.0, 1.0, -2.0))


@pytest.fixture(scope="session")
def rotational2(grid2):
    return gen_rotational_2d(grid2, (0.0, 0.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
