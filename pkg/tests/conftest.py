import pytest

from flowmech import Edge, Request, UfpInstance, prenormalized


def single_edge(capacity, requests):
    """Two-vertex instance with one directed edge and the given (d, v) requests."""
    reqs = tuple(Request(f"r{i}", 0, 1, d, v) for i, (d, v) in enumerate(requests))
    return UfpInstance(True, 2, (Edge(0, 1, float(capacity)),), reqs)


@pytest.fixture
def bottleneck_instance():
    """Two requests forced through a shared capacity-1 edge; r1 outbids r2."""
    edges = (Edge(0, 1, 20.0), Edge(1, 2, 1.0), Edge(2, 3, 20.0))
    reqs = (Request("r1", 0, 3, 1.0, 5.0), Request("r2", 0, 3, 1.0, 3.0))
    return prenormalized(UfpInstance(True, 4, edges, reqs))
