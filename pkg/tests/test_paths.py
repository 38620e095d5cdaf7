import math
import random

import pytest

from flowmech import Edge, Request, UfpInstance, enumerate_paths, shortest_path
from flowmech.benchgen import gen_random


def _pair_instance(directed, edges):
    return UfpInstance(directed, max(max(e[0], e[1]) for e in edges) + 1,
                       tuple(Edge(a, b, 1.0) for a, b in edges),
                       (Request("r", 0, 1, 1.0, 1.0),))


def test_parallel_edges_pick_cheaper():
    inst = _pair_instance(True, [(0, 1), (0, 1)])
    p = shortest_path(inst, [1.0, 0.5], 0, 1)
    assert p.edges == (1,)
    assert p.length == 0.5


def test_disconnected_returns_none():
    inst = UfpInstance(True, 3, (Edge(1, 2, 1.0),), (Request("r", 0, 2, 1.0, 1.0),))
    assert shortest_path(inst, [1.0], 0, 2) is None


def test_direction_respected_vs_undirected():
    directed = _pair_instance(True, [(1, 0)])
    assert shortest_path(directed, [1.0], 0, 1) is None
    undirected = _pair_instance(False, [(1, 0)])
    p = shortest_path(undirected, [1.0], 0, 1)
    assert p is not None and p.edges == (0,) and p.length == 1.0


def test_rejects_bad_weights():
    inst = _pair_instance(True, [(0, 1)])
    with pytest.raises(ValueError):
        shortest_path(inst, [-1.0], 0, 1)
    with pytest.raises(ValueError):
        shortest_path(inst, [math.inf], 0, 1)
    with pytest.raises(ValueError):
        shortest_path(inst, [1.0, 1.0], 0, 1)


def test_path_is_simple_and_length_consistent():
    rng = random.Random(0)
    for k in range(60):
        n = rng.randint(3, 8)
        inst = gen_random(n, rng.randint(n - 1, n + 5), 2, 2.0, seed=k)
        ws = [rng.uniform(0.0, 3.0) for _ in inst.edges]
        r = inst.requests[0]
        p = shortest_path(inst, ws, r.source, r.target)
        assert p is not None
        visited = [r.source]
        v = r.source
        for e in p.edges:
            tail, head, _ = inst.edges[e]
            v = head if tail == v else tail
            assert v not in visited
            visited.append(v)
        assert v == r.target
        assert p.length == pytest.approx(sum(ws[e] for e in p.edges), rel=1e-15)


def test_matches_exhaustive_enumeration():
    rng = random.Random(1)
    for k in range(80):
        n = rng.randint(3, 8)
        inst = gen_random(n, rng.randint(n - 1, n + 4), 2, 2.0, seed=1000 + k)
        r = inst.requests[0]
        if rng.random() < 0.5:
            ws = [float(rng.randint(0, 6)) for _ in inst.edges]
            rel = 0.0
        else:
            ws = [rng.uniform(0.0, 4.0) for _ in inst.edges]
            rel = 1e-12
        p = shortest_path(inst, ws, r.source, r.target)
        best = min(pp.length for pp in
                   enumerate_paths(inst, r.source, r.target, 10000, weights=ws))
        if rel == 0.0:
            assert p.length == best
        else:
            assert p.length == pytest.approx(best, rel=rel)


def test_monotone_response_to_weight_increase():
    rng = random.Random(2)
    for k in range(40):
        n = rng.randint(3, 7)
        inst = gen_random(n, rng.randint(n - 1, n + 4), 2, 2.0, seed=2000 + k)
        r = inst.requests[0]
        ws = [rng.uniform(0.1, 2.0) for _ in inst.edges]
        base = shortest_path(inst, ws, r.source, r.target).length
        bump = rng.randrange(len(ws))
        ws[bump] += rng.uniform(0.0, 5.0)
        assert shortest_path(inst, ws, r.source, r.target).length >= base


def test_deterministic_tie_break_stable():
    # diamond with two equal-length routes; the settled-order rule must pick
    # the same one every run
    inst = UfpInstance(True, 4,
                       (Edge(0, 1, 1.0), Edge(0, 2, 1.0), Edge(1, 3, 1.0), Edge(2, 3, 1.0)),
                       (Request("r", 0, 3, 1.0, 1.0),))
    first = shortest_path(inst, [1.0] * 4, 0, 3)
    for _ in range(5):
        assert shortest_path(inst, [1.0] * 4, 0, 3) == first
