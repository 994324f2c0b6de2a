import numpy as np
import pytest

from conebesov import geometry


@pytest.fixture(scope="session")
def octant():
    return geometry.octant()


@pytest.fixture(scope="session")
def fichera():
    return geometry.fichera_complement()


@pytest.fixture(scope="session")
def lshape():
    return geometry.l_shape()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
