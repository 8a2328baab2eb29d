import pytest

from lnc.network import build_geometric_graph

UNIT = 1.05


def _net(positions, r=UNIT):
    return build_geometric_graph(positions, r)


@pytest.fixture
def single_edge():
    return _net([(0.0, 0.0), (1.0, 0.0)])


@pytest.fixture
def two_disjoint():
    return _net([(0.0, 0.0), (1.0, 0.0), (5.0, 0.0), (6.0, 0.0)])


@pytest.fixture
def path3():
    return _net([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])


@pytest.fixture
def path4():
    return _net([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])


@pytest.fixture
def triangle():
    return _net([(0.0, 0.0), (1.0, 0.0), (0.5, 0.86)])


@pytest.fixture
def star3():
    return _net([(0.0, 0.0), (1.0, 0.0), (-0.5, 0.85), (-0.5, -0.85)])


def tiny_corpus():
    """The six named small networks used for optimality cross-checks."""
    return {
        "single_edge": _net([(0.0, 0.0), (1.0, 0.0)]),
        "two_disjoint": _net([(0.0, 0.0), (1.0, 0.0), (5.0, 0.0), (6.0, 0.0)]),
        "path3": _net([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
        "triangle": _net([(0.0, 0.0), (1.0, 0.0), (0.5, 0.86)]),
        "star3": _net([(0.0, 0.0), (1.0, 0.0), (-0.5, 0.85), (-0.5, -0.85)]),
        "path4": _net([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]),
    }


def dumbbell():
    """Two tight four-sensor blobs joined by a three-sensor bridge; the
    instance used for the paired consensus comparison."""
    positions = (
        [(0.0, 0.0), (1.0, 0.0), (0.5, 0.85), (0.5, -0.85)]
        + [(2.3, 0.0), (3.6, 0.0), (4.9, 0.0)]
        + [(6.2, 0.0), (7.2, 0.0), (6.7, 0.85), (6.7, -0.85)]
    )
    return build_geometric_graph(positions, 1.35)


DUMBBELL_CENTERS = ((0.6, 0.0), (6.6, 0.0))
DUMBBELL_R = 4.6
