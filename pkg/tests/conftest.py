import numpy as np
import pytest

from minseis.netio import Graph
from minseis.seis import EpidemicParams


def make_graph(n, edges, community=None):
    edges = tuple((min(u, v), max(u, v)) for u, v in edges)
    if community is None:
        community = (1,) * n
    return Graph(n, edges, tuple(community))


@pytest.fixture
def path4():
    # 1 - 2 - 3 - 4, edge ids 1, 2, 3 in that order
    return make_graph(4, [(1, 2), (2, 3), (3, 4)])


@pytest.fixture
def small_graph():
    # two triangles joined by a bridge, two communities
    return make_graph(6, [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)],
                      community=(1, 1, 1, 2, 2, 2))


def certain(seeds, **kw):
    """Parameters under which every draw succeeds."""
    kw.setdefault("horizon", 30)
    kw.setdefault("replications", 3)
    return EpidemicParams(frozenset(seeds), chi=1.0, phi=1.0, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
