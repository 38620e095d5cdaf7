import math
import random

import pytest

from flowmech import (InfeasibleBoundError, Request, brute_force_opt_ufp,
                      check_ufp_allocation, dual_certificate, edge_weight,
                      epsilon_max, gen_directed_lb, gen_random, normalize,
                      prenormalized, solve_ufp)
from conftest import single_edge


# --- edge pricing -------------------------------------------------------------

def test_edge_weight_initial():
    assert edge_weight(0.0, 10.0, 0.1, 10.0) == 0.1


def test_edge_weight_full_load():
    # load == capacity: price is e^(eps*B)/c
    for c in (1.0, 4.0, 25.0):
        assert edge_weight(c, c, 0.1, 20.0) == pytest.approx(math.e ** 2 / c, rel=1e-12)


def test_edge_weight_updates_compose_in_exponent_space():
    # routing 0.5 twice equals routing 1.0 once
    half = 0.5 + 0.5
    assert edge_weight(half, 1.0, 0.3, 7.0) == edge_weight(1.0, 1.0, 0.3, 7.0)


def test_edge_weight_rejects_bad_args():
    with pytest.raises(ValueError):
        edge_weight(1.0, 0.0, 0.1, 2.0)
    with pytest.raises(ValueError):
        edge_weight(-1.0, 1.0, 0.1, 2.0)


# --- solve examples -----------------------------------------------------------

def test_single_request_allocates():
    ninst = prenormalized(single_edge(10.0, [(1.0, 5.0)]))
    sol = solve_ufp(ninst, 0.1)
    assert sol.primal_value == 5.0
    assert sol.exit_reason == "list-empty"
    assert [rid for rid, _ in sol.allocation] == ["r0"]
    assert sol.resolved


def test_directed_lb_small_walks_into_the_trap():
    inst = gen_directed_lb(1, 2)
    sol = solve_ufp(prenormalized(inst), 0.1)
    assert sol.primal_value == 1.0
    assert sol.exit_reason == "weight-threshold"
    # the one winner is s1's request, routed via the middle vertex shared
    # with s2, which strands s2 entirely
    (rid, path), = sol.allocation
    assert rid == "s1#0"
    opt, _ = brute_force_opt_ufp(inst)
    assert opt == 2.0


def test_random_instance_within_certified_factor():
    inst = gen_random(4, 6, 3, 6.0, seed=5)
    ninst = prenormalized(inst)
    sol = solve_ufp(ninst, 0.1)
    opt, _ = brute_force_opt_ufp(inst)
    bound = (1 + 0.6) * math.e / (math.e - 1)
    assert sol.primal_value > 0
    assert opt / sol.primal_value <= bound
    assert sol.dual_certificate / sol.primal_value <= bound


def test_refuses_bound_below_one():
    inst = single_edge(0.5, [(1.0, 1.0)])
    with pytest.raises(InfeasibleBoundError):
        solve_ufp(prenormalized(inst), 0.1)


def test_rejects_bad_epsilon():
    ninst = prenormalized(single_edge(2.0, [(1.0, 1.0)]))
    for eps in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            solve_ufp(ninst, eps)


def test_unroutable_request_dropped_with_warning():
    from flowmech import Edge, UfpInstance
    inst = UfpInstance(True, 3, (Edge(0, 1, 2.0),),
                       (Request("ok", 0, 1, 1.0, 1.0), Request("lost", 0, 2, 1.0, 1.0)))
    sol = solve_ufp(prenormalized(inst), 0.1)
    assert sol.primal_value == 1.0
    assert sol.exit_reason == "list-empty"
    assert len(sol.warnings) == 1 and "lost" in sol.warnings[0]
    assert sol.resolved


def test_empty_request_list():
    from flowmech import Edge, UfpInstance
    inst = UfpInstance(True, 2, (Edge(0, 1, 2.0),), ())
    sol = solve_ufp(prenormalized(inst), 0.1)
    assert sol.primal_value == 0.0
    assert sol.dual_certificate == 0.0
    assert sol.exit_reason == "list-empty"


# --- trace and certificate ----------------------------------------------------

def test_certificate_bounds_single_request_run():
    ninst = prenormalized(single_edge(10.0, [(1.0, 5.0)]))
    sol = solve_ufp(ninst, 0.1)
    # the no-load state alone certifies price_total/score = 1/0.02 = 50;
    # all requests got routed, so the primal value is the tight bound
    first = sol.trace[0]
    assert first.score == pytest.approx(0.02, rel=1e-12)
    assert math.exp(math.log(1.0) - first.log_score) == pytest.approx(50.0, rel=1e-9)
    assert sol.dual_certificate == 5.0
    assert sol.dual_certificate <= 50.0
    assert sol.dual_certificate >= sol.primal_value


def test_certificate_equals_primal_when_everything_routed():
    inst = gen_random(5, 8, 4, 30.0, seed=9)
    sol = solve_ufp(prenormalized(inst), 0.1)
    assert sol.exit_reason == "list-empty"
    opt, _ = brute_force_opt_ufp(inst)
    assert sol.primal_value == pytest.approx(opt)
    assert sol.dual_certificate == pytest.approx(sol.primal_value)


def test_trace_invariants_on_random_runs():
    rng = random.Random(17)
    for k in range(60):
        n = rng.randint(3, 9)
        inst = gen_random(n, rng.randint(n - 1, n + 5), rng.randint(1, 10),
                          rng.uniform(1.0, 25.0), seed=rng.randrange(10 ** 6))
        sol = solve_ufp(prenormalized(inst), rng.choice([0.05, 0.1, 0.5, 1.0]))
        prev_score = -math.inf
        prev_total = -math.inf
        for rec in sol.trace:
            assert rec.covered_value == rec.primal_value
            assert rec.score >= prev_score - 1e-15
            assert rec.log_price_total >= prev_total - 1e-12
            prev_score = rec.score
            prev_total = rec.log_price_total
        assert sol.dual_certificate >= sol.primal_value


def test_dual_certificate_recomputable_from_trace():
    inst = gen_random(5, 7, 6, 3.0, seed=23)
    ninst = prenormalized(inst)
    sol = solve_ufp(ninst, 0.1)
    assert dual_certificate(sol.trace, ninst, 0.1) == sol.dual_certificate


def test_exit_reason_matches_threshold_state():
    # saturating exit implies the stopping quantity was genuinely exceeded
    ninst = prenormalized(single_edge(2.0, [(1.0, 3.0), (1.0, 2.0), (1.0, 1.0)]))
    sol = solve_ufp(ninst, 0.1)
    assert sol.exit_reason == "weight-threshold"
    assert sol.primal_value == 5.0  # the two best fit
    last = sol.trace[-1]
    assert last.log_price_total > 0.1 * (2.0 - 1.0) - 1e-12


def test_feasibility_never_violated_even_at_bound_one():
    rng = random.Random(31)
    for k in range(50):
        n = rng.randint(3, 8)
        inst = gen_random(n, rng.randint(n - 1, n + 4), rng.randint(1, 12),
                          1.0, seed=rng.randrange(10 ** 6))
        sol = solve_ufp(prenormalized(inst), 0.1)
        assert not check_ufp_allocation(inst, list(sol.allocation))


# --- monotonicity -------------------------------------------------------------

def test_monotone_in_demand_and_value():
    rng = random.Random(41)
    for k in range(40):
        n = rng.randint(3, 7)
        inst = gen_random(n, rng.randint(n - 1, n + 4), rng.randint(2, 8),
                          rng.uniform(1.0, 10.0), seed=rng.randrange(10 ** 6))
        ninst = prenormalized(inst)
        sol = solve_ufp(ninst, 0.1)
        if not sol.allocation:
            continue
        rid = rng.choice([r for r, _ in sol.allocation])
        r = inst.requests[inst.request_index(rid)]
        lower_d = ninst.with_request(rid, demand=r.demand * rng.uniform(0.1, 1.0))
        assert rid in solve_ufp(lower_d, 0.1).allocated_ids()
        higher_v = ninst.with_request(rid, value=r.value * rng.uniform(1.0, 10.0))
        assert rid in solve_ufp(higher_v, 0.1).allocated_ids()


def test_exactness_each_winner_routed_once_with_full_demand():
    inst = gen_random(6, 9, 8, 2.0, seed=77)
    sol = solve_ufp(prenormalized(inst), 0.1)
    ids = [rid for rid, _ in sol.allocation]
    assert len(ids) == len(set(ids))
    for rid, path in sol.allocation:
        r = inst.requests[inst.request_index(rid)]
        assert path.source == r.source and path.target == r.target


def test_determinism_bitwise():
    inst = gen_random(7, 11, 9, 3.0, seed=4)
    ninst = normalize(inst)
    a = solve_ufp(ninst, 0.1)
    b = solve_ufp(ninst, 0.1)
    assert a == b


def test_epsilon_max_formula():
    assert epsilon_max(1, 5.0) == 0.0
    assert epsilon_max(100, 100.0) == pytest.approx(math.sqrt(math.log(100) / 100))
    with pytest.raises(ValueError):
        epsilon_max(0, 1.0)
