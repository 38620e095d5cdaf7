"""Greedy primal-dual solver for bounded unsplittable flow.

Each iteration routes the pending request that minimizes
(demand/value) * (length of its cheapest usable path) under the exponential
congestion prices, then reprices the chosen path multiplicatively.  A path is
usable only if every edge fits the request's full demand, so the output is
feasible by construction, and routing a request allocates exactly its demand
on exactly one path.

The run continues until no pending request has a usable path.  The classic
stopping quantity sum(capacity * price) <= exp(eps*(B-1)) is tracked per
iteration: while it holds, every edge provably has at least one unit of
residual capacity, so the restricted search coincides with the unrestricted
one and the traced states yield valid scaled dual solutions; the dual
certificate is extracted from exactly those states.  Exhaustion with pending
connected requests implies the threshold has been crossed, which is the
"weight-threshold" exit; the "list-empty" exit means every routable request
was allocated (and the output is then optimal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import NormalizedInstance
from .paths import (GraphIndex, Path, distances_to_target,
                    distances_to_target_capacitated, path_to_target,
                    reachable_to)
from .pricing import PriceLedger, edge_weight  # noqa: F401  (re-exported)

EXIT_LIST_EMPTY = "list-empty"
EXIT_WEIGHT_THRESHOLD = "weight-threshold"


class SolverInvariantError(RuntimeError):
    """A traced dual state failed re-verification; indicates a solver bug."""


@dataclass(frozen=True)
class IterationRecord:
    """One routing step plus the dual-side bookkeeping after it.

    ``score`` is the selection score (demand/value)*length of the chosen path
    at selection time; ``threshold_ok`` reports whether the pre-iteration
    stopping quantity still respected exp(eps*(B-1)).  ``price_total`` is
    sum(capacity * price) after the repricing; ``covered_value`` sums the
    dual covering variables (one per selected request, set to its value) and
    always equals ``primal_value``.
    """

    iteration: int
    request_id: str
    path: tuple[int, ...]
    demand: float
    score: float
    log_score: float
    price_total: float
    log_price_total: float
    covered_value: float
    primal_value: float
    threshold_ok: bool


@dataclass(frozen=True)
class UfpSolution:
    allocation: tuple[tuple[str, Path], ...]
    primal_value: float
    dual_certificate: float
    trace: tuple[IterationRecord, ...]
    exit_reason: str
    epsilon: float
    bound: float
    warnings: tuple[str, ...]
    resolved: bool  # every request either allocated or disconnected

    def allocated_ids(self) -> set:
        return {rid for rid, _ in self.allocation}


def _check_epsilon(epsilon: float):
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon!r}")


def epsilon_max(edge_count: int, bound: float) -> float:
    """Smallest accuracy parameter for which the certificate ratio bound applies.

    The approximation guarantee needs B >= ln(m)/eps^2, i.e. eps >=
    sqrt(ln(m)/B); below this value the guarantee is void (the solver still
    runs and its certificate is still a valid bound on the optimum).
    """
    if edge_count < 1:
        raise ValueError("edge count must be positive")
    if bound <= 0:
        raise ValueError("bound must be positive")
    return math.sqrt(math.log(edge_count) / bound)


def guarantee_holds(edge_count: int, bound: float, epsilon: float) -> bool:
    return bound * epsilon * epsilon >= math.log(edge_count)


def solve_ufp(inst: NormalizedInstance, epsilon: float) -> UfpSolution:
    """Run the greedy pricing solver on a normalized instance.

    Requires bound >= 1 (refused otherwise: with B < 1 the largest demand
    fits no edge, voiding the feasibility argument) and epsilon in (0, 1].
    Deterministic: score ties break by request instance order, path ties by
    the documented search order.
    """
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

    records: list[IterationRecord] = []
    allocation: list[tuple[str, Path]] = []
    z_values: dict[str, float] = {}
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
                    continue  # blocked for now; loads only grow, so it stays blocked
                cand = ((r.demand / r.value) * d, i)
                if best is None or cand < best:
                    best = cand
                    best_key = key
        if best is None:
            exit_reason = EXIT_WEIGHT_THRESHOLD
            break
        score, i = best
        r = graph.requests[i]
        dist, succ = trees[best_key]
        path = path_to_target(index, ledger.weights, succ, r.source, r.target)
        log_score = (math.log(r.demand) - math.log(r.value)
                     + math.log(dist[r.source]) + ledger.shift)
        true_score = score if ledger.shift == 0.0 else math.exp(log_score)
        ledger.route(path.edges, r.demand)
        pending.remove(i)
        allocation.append((r.id, path))
        z_values[r.id] = r.value
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
            covered_value=sum(z_values.values()),
            primal_value=primal,
            threshold_ok=threshold_ok,
        ))

    certificate = dual_certificate(records, inst, epsilon)
    return UfpSolution(
        allocation=tuple(allocation),
        primal_value=primal,
        dual_certificate=certificate,
        trace=tuple(records),
        exit_reason=exit_reason,
        epsilon=epsilon,
        bound=inst.bound,
        warnings=tuple(warnings),
        resolved=len(allocation) + len(warnings) == len(graph.requests),
    )


# --- dual certificate ---------------------------------------------------------


def _finalize_certificate(value: float, primal: float) -> float:
    """Guard weak duality against floating-point noise.

    The certificate upper-bounds the optimum, which is at least the primal
    value, so a certificate a hair below the primal is evaluation noise from
    the exp/log round trips; snap it up.  A larger violation is a bug.
    """
    if value >= primal:
        return value
    if value >= primal - max(1e-9, 1e-9 * abs(primal)):
        return primal
    raise SolverInvariantError(
        f"certificate {value!r} fell below the primal value {primal!r}")


def _certificate_candidates(records, initial_log_total: float, with_covered: bool):
    """(upper bound, state index) pairs from the trace.

    State j is the moment after j routings.  Its bound is
    price_total(j)/score(j) + covered(j), valid whenever score(j) — the
    score selected by the next routing — was computed while every edge still
    had a unit of residual headroom.  State 0 (no loads) is always valid.
    """
    cands = []
    if not records:
        return cands
    first = records[0]
    diff = initial_log_total - first.log_score
    cands.append((math.exp(diff) if diff < 709.0 else math.inf, 0))
    for j in range(1, len(records)):
        nxt = records[j]
        if not nxt.threshold_ok:
            break  # the stopping quantity only grows; later states stay invalid
        prev = records[j - 1]
        diff = prev.log_price_total - nxt.log_score
        bound = math.exp(diff) if diff < 709.0 else math.inf
        if with_covered:
            bound += prev.covered_value
        cands.append((bound, j))
    return cands


def dual_certificate(trace, inst: NormalizedInstance, epsilon: float) -> float:
    """Upper bound on the fractional optimum extracted from a solver trace.

    Takes the minimum over traced states of price_total/score + covered
    value, each of which scales the traced prices into a feasible solution of
    the covering dual; when the run allocated every routable request, the
    primal value itself is a matching bound (the output is then optimal).
    The winning state is re-verified with an independent feasibility check
    before the value is returned.

    Works for an empty trace only when the instance has no routable request
    (the bound is then 0).
    """
    _check_epsilon(epsilon)
    records = list(trace)
    graph = inst.inner
    m = len(graph.edges)

    allocated = {rec.request_id for rec in records}
    index = GraphIndex(graph)
    reach_cache: dict[int, list[bool]] = {}
    unroutable = set()
    for r in graph.requests:
        if r.target not in reach_cache:
            reach_cache[r.target] = reachable_to(index, r.target)
        if not reach_cache[r.target][r.source]:
            unroutable.add(r.id)
    resolved = all(r.id in allocated or r.id in unroutable for r in graph.requests)

    primal = records[-1].primal_value if records else 0.0
    candidates = _certificate_candidates(records, math.log(m), with_covered=True)
    if resolved:
        candidates.append((primal, -1))
    if not candidates:
        if any(r.id not in unroutable for r in graph.requests):
            raise ValueError("empty trace for an instance with routable requests")
        return 0.0

    best_value, best_state = min(candidates, key=lambda c: (c[0], c[1]))
    _verify_state(best_state, records, inst, index, epsilon, unroutable,
                  with_covered=True)
    return _finalize_certificate(best_value, primal)


def _verify_state(state: int, records, inst: NormalizedInstance, index: GraphIndex,
                  epsilon: float, unroutable: set, with_covered: bool):
    """Independent feasibility check of the scaled dual at a traced state.

    Terminal state (-1): the zero price vector with covering variables on the
    allocated requests is feasible iff every non-allocated request is
    disconnected, which the caller established.  Positive states: replay the
    loads, scale prices by 1/score, and check every request's constraint at
    its cheapest path under the scaled prices.  Skipped at extreme pricing
    scales where raw prices cannot be represented.
    """
    if state == -1:
        return
    if epsilon * inst.bound > 600.0:
        return
    graph = inst.inner
    ledger = PriceLedger([e.capacity for e in graph.edges], epsilon, inst.bound)
    for rec in records[:state]:
        ledger.route(rec.path, rec.demand)
    log_score = records[state].log_score
    scaled = [math.exp(x - log_score) / c for x, c in zip(ledger.expo, ledger.caps)]
    covered = {rec.request_id: True for rec in records[:state]} if with_covered else {}
    slack = 1e-9
    dist_cache: dict[int, list[float]] = {}
    for r in graph.requests:
        if r.id in covered or r.id in unroutable:
            continue
        if r.target not in dist_cache:
            dist_cache[r.target], _ = distances_to_target(index, scaled, r.target)
        lhs = r.demand * dist_cache[r.target][r.source]
        if lhs < r.value - slack:
            raise SolverInvariantError(
                f"scaled dual at state {state} violates request {r.id!r}: "
                f"{lhs!r} < {r.value!r}")
