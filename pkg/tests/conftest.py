import numpy as np
import pytest

from hypercell import direction as dn
from hypercell import geom


@pytest.fixture
def square():
    return geom.Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])


@pytest.fixture
def ball():
    return geom.Ball([0, 0], 1.0)


@pytest.fixture
def stadium():
    return geom.BallSum([[-1, 0], [1, 0]], 1.0)


@pytest.fixture
def cube():
    return geom.Polytope([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)])


@pytest.fixture
def iso():
    return dn.Isotropic(2)


@pytest.fixture
def facet_atoms():
    return dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)
