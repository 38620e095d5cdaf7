import math
import random

import pytest

from flowmech import (InfeasibleBoundError, brute_force_opt_repeat,
                      check_ufp_allocation, gen_random, prenormalized,
                      repeat_dual_certificate, solve_ufp, solve_ufp_repeat)
from conftest import single_edge


def test_single_request_fills_the_edge():
    # one unit request on a capacity-20 edge: the greedy keeps routing it
    # until the edge is exactly full
    ninst = prenormalized(single_edge(20.0, [(1.0, 1.0)]))
    sol = solve_ufp_repeat(ninst, 0.1)
    assert sol.iterations == 20
    assert sol.primal_value == 20.0
    ((rid, edges, count),) = sol.allocation
    assert rid == "r0" and edges == (0,) and count == 20
    assert sol.exit_reason == "weight-threshold"
    # the stopping quantity was crossed en route (exponent reaches eps*B > eps*(B-1))
    assert not all(rec.threshold_ok for rec in sol.trace)
    # certificate is tight here: optimum is exactly the capacity
    assert sol.dual_certificate == pytest.approx(sol.primal_value)


def test_empty_request_list():
    from flowmech import Edge, UfpInstance
    inst = UfpInstance(True, 2, (Edge(0, 1, 3.0),), ())
    sol = solve_ufp_repeat(prenormalized(inst), 0.1)
    assert sol.primal_value == 0.0
    assert sol.exit_reason == "list-empty"
    assert sol.iterations == 0


def test_all_disconnected_exits_list_empty():
    from flowmech import Edge, Request, UfpInstance
    inst = UfpInstance(True, 3, (Edge(0, 1, 2.0),), (Request("r", 2, 1, 1.0, 1.0),))
    sol = solve_ufp_repeat(prenormalized(inst), 0.1)
    assert sol.exit_reason == "list-empty"
    assert sol.iterations == 0
    assert len(sol.warnings) == 1


def test_refuses_bound_below_one():
    with pytest.raises(InfeasibleBoundError):
        solve_ufp_repeat(prenormalized(single_edge(0.9, [(1.0, 1.0)])), 0.1)


def test_certificate_weak_duality_and_match():
    rng = random.Random(2)
    for k in range(30):
        n = rng.randint(3, 6)
        inst = gen_random(n, rng.randint(n - 1, n + 3), rng.randint(1, 4),
                          rng.uniform(1.0, 10.0), demand_range=(0.4, 1.0),
                          seed=rng.randrange(10 ** 6))
        ninst = prenormalized(inst)
        sol = solve_ufp_repeat(ninst, 0.1)
        assert sol.dual_certificate >= sol.primal_value
        assert repeat_dual_certificate(sol.trace, ninst, 0.1) == sol.dual_certificate


def test_certificate_bounds_capped_oracle():
    inst = single_edge(4.0, [(1.0, 2.0), (0.5, 0.6)])
    ninst = prenormalized(inst)
    sol = solve_ufp_repeat(ninst, 0.1)
    opt, witness, capped = brute_force_opt_repeat(inst, max_total_copies=10)
    assert not capped
    assert sol.dual_certificate >= opt - 1e-9
    assert opt >= sol.primal_value - 1e-9


def test_feasibility_and_iteration_bound():
    rng = random.Random(3)
    for k in range(30):
        n = rng.randint(3, 6)
        inst = gen_random(n, rng.randint(n - 1, n + 3), rng.randint(1, 5),
                          rng.uniform(1.0, 15.0), demand_range=(0.3, 1.0),
                          seed=rng.randrange(10 ** 6))
        sol = solve_ufp_repeat(prenormalized(inst), 0.1)
        entries = list(sol.allocation)
        assert not check_ufp_allocation(inst, entries, allow_repeats=True)
        c_max = max(e.capacity for e in inst.edges)
        d_min = min(r.demand for r in inst.requests)
        assert sol.iterations <= math.ceil(len(inst.edges) * c_max / d_min) + 1


def test_more_freedom_never_hurts_the_greedy():
    # allowing repeats can only raise the greedy's take
    rng = random.Random(4)
    for k in range(40):
        n = rng.randint(3, 6)
        inst = gen_random(n, rng.randint(n - 1, n + 3), rng.randint(1, 5),
                          rng.uniform(1.0, 12.0), demand_range=(0.4, 1.0),
                          seed=rng.randrange(10 ** 6))
        ninst = prenormalized(inst)
        single = solve_ufp(ninst, 0.1)
        repeat = solve_ufp_repeat(ninst, 0.1)
        assert repeat.primal_value >= single.primal_value - 1e-9


def test_determinism():
    inst = gen_random(5, 8, 4, 6.0, seed=8)
    ninst = prenormalized(inst)
    assert solve_ufp_repeat(ninst, 0.1) == solve_ufp_repeat(ninst, 0.1)
