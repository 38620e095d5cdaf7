"""Greedy pricing solver for unsplittable flow with repetitions.

Identical selection rule to the single-shot routing solver, but requests are
never retired: the same request may be routed again and again (possibly over
different paths), and the profit is linear in the number of routings.  The
run ends when no request has a usable path; the number of iterations is
bounded by m * c_max / d_min since every routing consumes at least d_min of
some edge's capacity.

The covering dual here has no per-request variables, so the certificate is
the minimum over traced states of price_total/score alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import NormalizedInstance
from .paths import (GraphIndex, distances_to_target,
                    distances_to_target_capacitated, path_to_target,
                    reachable_to)
from .pricing import PriceLedger
from .ufp import (EXIT_LIST_EMPTY, EXIT_WEIGHT_THRESHOLD, IterationRecord,
                  SolverInvariantError, _certificate_candidates, _check_epsilon,
                  _finalize_certificate)


@dataclass(frozen=True)
class RepeatSolution:
    """Routing multiset: (request id, path edge indices, count) entries.

    Counts are >= 1; the same request may appear with several distinct paths.
    Paths are stored as bare edge-index tuples because an aggregated entry
    has no single selection-time length.
    """

    allocation: tuple[tuple[str, tuple[int, ...], int], ...]
    primal_value: float
    dual_certificate: float
    trace: tuple[IterationRecord, ...]
    exit_reason: str
    epsilon: float
    bound: float
    warnings: tuple[str, ...]
    iterations: int


def solve_ufp_repeat(inst: NormalizedInstance, epsilon: float) -> RepeatSolution:
    """Run the repetition solver.  Requires bound >= 1 and epsilon in (0, 1]."""
    _check_epsilon(epsilon)
    inst.require_feasible_bound()
    graph = inst.inner
    index = GraphIndex(graph)
    ledger = PriceLedger([e.capacity for e in graph.edges], epsilon, inst.bound)

    reach: dict[int, list[bool]] = {}
    pending: list[int] = []
    warnings: list[str] = []
    for i, r in enumerate(graph.requests):
        if r.target not in reach:
            reach[r.target] = reachable_to(index, r.target)
        if reach[r.target][r.source]:
            pending.append(i)
        else:
            warnings.append(f"request {r.id!r} dropped: no path from vertex "
                            f"{r.source} to vertex {r.target}")

    # every routing consumes >= d_min of some edge; cap the loop defensively
    if pending:
        d_min = min(graph.requests[i].demand for i in pending)
        c_max = max(e.capacity for e in graph.edges)
        max_iterations = math.ceil(len(graph.edges) * c_max / d_min) + 1
    else:
        max_iterations = 0

    records: list[IterationRecord] = []
    counts: dict[tuple[str, tuple[int, ...]], int] = {}
    primal = 0.0
    exit_reason = EXIT_LIST_EMPTY

    while True:
        if not pending:
            exit_reason = EXIT_LIST_EMPTY
            break
        threshold_ok = ledger.threshold_ok
        groups: dict[tuple[int, float], list[int]] = {}
        for i in pending:
            r = graph.requests[i]
            groups.setdefault((r.target, r.demand), []).append(i)
        best: tuple[float, int] | None = None
        best_key = None
        trees = {}
        for key, members in groups.items():
            target, demand = key
            dist, succ = distances_to_target_capacitated(
                index, ledger.weights, target, ledger.loads, ledger.caps, demand)
            trees[key] = (dist, succ)
            for i in members:
                r = graph.requests[i]
                d = dist[r.source]
                if math.isinf(d):
                    continue
                cand = ((r.demand / r.value) * d, i)
                if best is None or cand < best:
                    best = cand
                    best_key = key
        if best is None:
            exit_reason = EXIT_WEIGHT_THRESHOLD
            break
        if len(records) >= max_iterations:
            raise SolverInvariantError(
                f"iteration count exceeded m*c_max/d_min = {max_iterations}")
        score, i = best
        r = graph.requests[i]
        dist, succ = trees[best_key]
        path = path_to_target(index, ledger.weights, succ, r.source, r.target)
        log_score = (math.log(r.demand) - math.log(r.value)
                     + math.log(dist[r.source]) + ledger.shift)
        true_score = score if ledger.shift == 0.0 else math.exp(log_score)
        ledger.route(path.edges, r.demand)
        counts[(r.id, path.edges)] = counts.get((r.id, path.edges), 0) + 1
        primal += r.value
        records.append(IterationRecord(
            iteration=len(records) + 1,
            request_id=r.id,
            path=path.edges,
            demand=r.demand,
            score=true_score,
            log_score=log_score,
            price_total=ledger.price_total(),
            log_price_total=ledger.log_price_total(),
            covered_value=0.0,
            primal_value=primal,
            threshold_ok=threshold_ok,
        ))

    certificate = repeat_dual_certificate(records, inst, epsilon)
    allocation = [(rid, edges, count) for (rid, edges), count in counts.items()]

    return RepeatSolution(
        allocation=tuple(allocation),
        primal_value=primal,
        dual_certificate=certificate,
        trace=tuple(records),
        exit_reason=exit_reason,
        epsilon=epsilon,
        bound=inst.bound,
        warnings=tuple(warnings),
        iterations=len(records),
    )


def repeat_dual_certificate(trace, inst: NormalizedInstance, epsilon: float) -> float:
    """min over traced states of price_total/score; bounds the repetition LP.

    The repetition dual has edge prices only, so there is no covered-value
    term.  As for the single-shot certificate, only states where the stopping
    quantity still held are used, and the winning state is re-verified.
    """
    _check_epsilon(epsilon)
    records = list(trace)
    if not records:
        return 0.0
    candidates = _certificate_candidates(records, math.log(len(inst.inner.edges)),
                                         with_covered=False)
    best_value, best_state = min(candidates, key=lambda c: (c[0], c[1]))
    _verify_repeat_state(best_state, records, inst, epsilon)
    return _finalize_certificate(best_value, records[-1].primal_value)


def _verify_repeat_state(state: int, records, inst: NormalizedInstance, epsilon: float):
    if epsilon * inst.bound > 600.0:
        return
    graph = inst.inner
    index = GraphIndex(graph)
    ledger = PriceLedger([e.capacity for e in graph.edges], epsilon, inst.bound)
    for rec in records[:state]:
        ledger.route(rec.path, rec.demand)
    log_score = records[state].log_score
    scaled = [math.exp(x - log_score) / c for x, c in zip(ledger.expo, ledger.caps)]
    dist_cache: dict[int, list[float]] = {}
    for r in graph.requests:
        if r.target not in dist_cache:
            dist_cache[r.target], _ = distances_to_target(index, scaled, r.target)
        d = dist_cache[r.target][r.source]
        if math.isinf(d):
            continue  # disconnected request: no covering constraints
        if r.demand * d < r.value - 1e-9:
            raise SolverInvariantError(
                f"scaled dual at state {state} violates request {r.id!r}")
