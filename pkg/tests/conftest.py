import pytest

from torus_geometry import build_geometry
from utils import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def unit_torus():
    """8^4, 格距 1/8, v = 1, k = 0"""
    return build_geometry((8, 8, 8, 8), (0.125,) * 4, 0.0)


@pytest.fixture
def small_torus():
    """4^4, v = 1, 较慢的泛函检查用"""
    return build_geometry((4, 4, 4, 4), (0.25,) * 4, 0.0)


@pytest.fixture
def negative_torus():
    """6^4, v = 1, k = -1"""
    return build_geometry((6, 6, 6, 6), (1.0 / 6,) * 4, -1.0)
