"""Greedy primal-dual winner determination for multi-unit bundle markets.

The bundle specialization of the routing solver: demands are fixed item
bundles (no path search), every routed copy takes one unit of each item in
the bundle, and the selection score is (1/value) * sum of item prices.
Selection ties break by request instance order; item sums are accumulated in
sorted item order so runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import BundleRequest, MucaInstance
from .pricing import PriceLedger
from .ufp import (EXIT_LIST_EMPTY, EXIT_WEIGHT_THRESHOLD, SolverInvariantError,
                  _certificate_candidates, _check_epsilon, _finalize_certificate)


@dataclass(frozen=True)
class MucaIterationRecord:
    """Routing-trace record with the winning bundle in place of a path."""

    iteration: int
    request_id: str
    bundle: tuple[str, ...]
    score: float
    log_score: float
    price_total: float
    log_price_total: float
    covered_value: float
    primal_value: float
    threshold_ok: bool


@dataclass(frozen=True)
class MucaSolution:
    winners: tuple[str, ...]
    primal_value: float
    dual_certificate: float
    trace: tuple[MucaIterationRecord, ...]
    exit_reason: str
    epsilon: float
    bound: int
    resolved: bool


def bundle_score(request: BundleRequest, item_prices) -> float:
    """(1/value) * sum of the prices of the bundle's items.

    ``item_prices`` maps item id to its current price.  Items are summed in
    sorted order for reproducibility.
    """
    total = 0.0
    for u in sorted(request.bundle):
        total += item_prices[u]
    return total / request.value


def solve_muca(inst: MucaInstance, epsilon: float) -> MucaSolution:
    """Run the greedy bundle solver.  The multiplicity bound is always >= 1."""
    _check_epsilon(epsilon)
    bound = float(inst.bound)
    item_index = {it.id: k for k, it in enumerate(inst.items)}
    caps = [float(it.multiplicity) for it in inst.items]
    ledger = PriceLedger(caps, epsilon, bound)
    # per-request item indices, sorted so price sums are order-stable
    bundles = [tuple(sorted(item_index[u] for u in r.bundle)) for r in inst.requests]

    pending = list(range(len(inst.requests)))
    records: list[MucaIterationRecord] = []
    winners: list[str] = []
    z_values: dict[str, float] = {}
    primal = 0.0
    exit_reason = EXIT_LIST_EMPTY

    while True:
        if not pending:
            exit_reason = EXIT_LIST_EMPTY
            break
        threshold_ok = ledger.threshold_ok
        weights = ledger.weights
        loads = ledger.loads
        best: tuple[float, int] | None = None
        for i in pending:
            fits = True
            total = 0.0
            for k in bundles[i]:
                if loads[k] + 1.0 > caps[k]:
                    fits = False
                    break
                total += weights[k]
            if not fits:
                continue
            cand = (total / inst.requests[i].value, i)
            if best is None or cand < best:
                best = cand
        if best is None:
            exit_reason = EXIT_WEIGHT_THRESHOLD
            break
        score, i = best
        r = inst.requests[i]
        log_score = math.log(score) + ledger.shift
        true_score = score if ledger.shift == 0.0 else math.exp(log_score)
        ledger.route(bundles[i], 1.0)
        pending.remove(i)
        winners.append(r.id)
        z_values[r.id] = r.value
        primal += r.value
        records.append(MucaIterationRecord(
            iteration=len(records) + 1,
            request_id=r.id,
            bundle=tuple(sorted(r.bundle)),
            score=true_score,
            log_score=log_score,
            price_total=ledger.price_total(),
            log_price_total=ledger.log_price_total(),
            covered_value=sum(z_values.values()),
            primal_value=primal,
            threshold_ok=threshold_ok,
        ))

    certificate = muca_dual_certificate(records, inst, epsilon)
    return MucaSolution(
        winners=tuple(winners),
        primal_value=primal,
        dual_certificate=certificate,
        trace=tuple(records),
        exit_reason=exit_reason,
        epsilon=epsilon,
        bound=inst.bound,
        resolved=len(winners) == len(inst.requests),
    )


def muca_dual_certificate(trace, inst: MucaInstance, epsilon: float) -> float:
    """Upper bound on the fractional optimum from a bundle-solver trace.

    Same construction as the routing certificate; the covering dual here has
    one price per item and the binding constraint of a request is its bundle
    sum, so re-verification is a direct summation.
    """
    _check_epsilon(epsilon)
    records = list(trace)
    primal = records[-1].primal_value if records else 0.0
    resolved = len(records) == len(inst.requests)
    candidates = _certificate_candidates(records, math.log(len(inst.items)),
                                         with_covered=True)
    if resolved:
        candidates.append((primal, -1))
    if not candidates:
        if inst.requests:
            raise ValueError("empty trace for an instance with requests")
        return 0.0
    best_value, best_state = min(candidates, key=lambda c: (c[0], c[1]))
    _verify_muca_state(best_state, records, inst, epsilon)
    return _finalize_certificate(best_value, primal)


def _verify_muca_state(state: int, records, inst: MucaInstance, epsilon: float):
    if state == -1:
        return
    if epsilon * inst.bound > 600.0:
        return
    item_index = {it.id: k for k, it in enumerate(inst.items)}
    caps = [float(it.multiplicity) for it in inst.items]
    ledger = PriceLedger(caps, epsilon, float(inst.bound))
    for rec in records[:state]:
        ledger.route(tuple(item_index[u] for u in rec.bundle), 1.0)
    log_score = records[state].log_score
    scaled = [math.exp(x - log_score) / c for x, c in zip(ledger.expo, ledger.caps)]
    covered = {rec.request_id for rec in records[:state]}
    for r in inst.requests:
        if r.id in covered:
            continue
        lhs = sum(scaled[item_index[u]] for u in sorted(r.bundle))
        if lhs < r.value - 1e-9:
            raise SolverInvariantError(
                f"scaled dual at state {state} violates request {r.id!r}: "
                f"{lhs!r} < {r.value!r}")
