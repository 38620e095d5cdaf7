import math

import pytest

from flowmech import (Edge, InstanceSemanticError, InstanceSyntaxError,
                      Request, UfpInstance, normalize, parse_muca_instance,
                      parse_ufp_instance, prenormalized,
                      serialize_muca_instance, serialize_ufp_instance)
from flowmech.benchgen import gen_random, gen_random_muca

MINIMAL = """
{"directed": true, "vertices": 2,
 "edges": [{"tail": 0, "head": 1, "capacity": 3.5}],
 "requests": [{"id": "a", "source": 0, "target": 1, "demand": 1.0, "value": 2.0}]}
"""


def test_parse_minimal_document():
    inst = parse_ufp_instance(MINIMAL)
    assert inst.vertex_count == 2
    assert inst.edge_count == 1
    assert len(inst.requests) == 1
    assert inst.edges[0] == Edge(0, 1, 3.5)
    assert inst.requests[0] == Request("a", 0, 1, 1.0, 2.0)


def test_parse_rejects_nonpositive_capacity():
    bad = MINIMAL.replace("3.5", "0")
    with pytest.raises(InstanceSemanticError, match="capacity must be positive"):
        parse_ufp_instance(bad)


def test_parse_rejects_self_request():
    bad = MINIMAL.replace('"target": 1', '"target": 0')
    with pytest.raises(InstanceSemanticError, match="target equals source"):
        parse_ufp_instance(bad)


def test_parse_rejects_bad_vertex_and_self_loop():
    with pytest.raises(InstanceSemanticError, match="unknown vertex"):
        parse_ufp_instance(MINIMAL.replace('"head": 1', '"head": 7'))
    loop = MINIMAL.replace('"head": 1', '"head": 0')
    with pytest.raises(InstanceSemanticError, match="self-loop"):
        parse_ufp_instance(loop)


def test_parse_rejects_unknown_keys_and_syntax():
    with pytest.raises(InstanceSemanticError, match="unknown keys"):
        parse_ufp_instance(MINIMAL.replace('"directed"', '"extra": 1, "directed"'))
    with pytest.raises(InstanceSyntaxError) as err:
        parse_ufp_instance("{not json")
    assert err.value.position is not None


def test_parse_rejects_duplicate_request_ids():
    doc = MINIMAL.replace(
        '[{"id": "a", "source": 0, "target": 1, "demand": 1.0, "value": 2.0}]',
        '[{"id": "a", "source": 0, "target": 1, "demand": 1.0, "value": 2.0},'
        ' {"id": "a", "source": 0, "target": 1, "demand": 0.5, "value": 1.0}]')
    with pytest.raises(InstanceSemanticError, match="duplicate"):
        parse_ufp_instance(doc)


def test_round_trip_ufp():
    inst = gen_random(6, 9, 5, 4.0, seed=42)
    again = parse_ufp_instance(serialize_ufp_instance(inst))
    assert again == inst


def test_round_trip_muca():
    inst = gen_random_muca(5, 6, 3, seed=7)
    again = parse_muca_instance(serialize_muca_instance(inst))
    assert again == inst


def test_normalize_divides_by_max_demand():
    inst = UfpInstance(True, 2, (Edge(0, 1, 8.0), Edge(0, 1, 12.0)),
                       (Request("a", 0, 1, 2.0, 1.0), Request("b", 0, 1, 4.0, 1.0)))
    n = normalize(inst)
    assert [r.demand for r in n.inner.requests] == [0.5, 1.0]
    assert [e.capacity for e in n.inner.edges] == [2.0, 3.0]
    assert n.bound == 2.0
    assert n.scale == 4.0
    assert n.feasible_bound


def test_normalize_identity_when_max_demand_one():
    inst = parse_ufp_instance(MINIMAL)
    n = normalize(inst)
    assert n.inner == inst
    assert n.scale == 1.0


def test_normalize_flags_bound_below_one():
    inst = UfpInstance(True, 2, (Edge(0, 1, 1.0),),
                       (Request("a", 0, 1, 5.0, 1.0),))
    n = normalize(inst)
    assert n.bound == pytest.approx(0.2)
    assert not n.feasible_bound  # flagged, not fatal


def test_normalize_idempotent():
    inst = gen_random(5, 7, 6, 3.0, demand_range=(0.25, 0.8), seed=3)
    once = normalize(inst)
    twice = normalize(once.inner)
    assert twice.inner == once.inner
    assert twice.scale == 1.0


def test_normalize_preserves_demand_capacity_ratios():
    inst = gen_random(5, 7, 6, 3.0, demand_range=(0.1, 1.0), seed=11)
    n = normalize(inst)
    for r, rn in zip(inst.requests, n.inner.requests):
        for e, en in zip(inst.edges, n.inner.edges):
            assert rn.demand / en.capacity == pytest.approx(r.demand / e.capacity,
                                                            rel=1e-15)


def test_prenormalized_rejects_large_demands():
    inst = UfpInstance(True, 2, (Edge(0, 1, 4.0),), (Request("a", 0, 1, 2.0, 1.0),))
    with pytest.raises(InstanceSemanticError):
        prenormalized(inst)


def test_muca_parse_and_validation():
    text = """
    {"items": [{"id": "a", "multiplicity": 3}],
     "requests": [{"id": "r", "bundle": ["a"], "value": 1.5}]}
    """
    inst = parse_muca_instance(text)
    assert inst.bound == 3
    assert inst.requests[0].bundle == frozenset({"a"})
    with pytest.raises(InstanceSemanticError, match="nonempty"):
        parse_muca_instance(text.replace('["a"]', "[]"))
    with pytest.raises(InstanceSemanticError, match="unknown item"):
        parse_muca_instance(text.replace('["a"]', '["zz"]'))


def test_parallel_edges_kept_distinct():
    inst = UfpInstance(True, 2, (Edge(0, 1, 1.0), Edge(0, 1, 2.0)),
                       (Request("a", 0, 1, 1.0, 1.0),))
    assert inst.edge_count == 2
    assert inst.edges[0].capacity != inst.edges[1].capacity


def test_with_request_replaces_only_the_target():
    n = normalize(gen_random(4, 5, 3, 2.0, seed=1))
    changed = n.with_request("r1", value=99.0)
    assert changed.inner.requests[1].value == 99.0
    assert changed.inner.requests[0] == n.inner.requests[0]
    assert changed.bound == n.bound and changed.scale == n.scale
    assert math.isclose(changed.inner.requests[1].demand,
                        n.inner.requests[1].demand)
