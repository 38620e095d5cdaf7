"""Critical-value payments on top of the greedy solvers.

The solvers keep a winner winning when it reports a lower demand or a higher
value, so each winner has a single threshold report below which it loses.
Charging that threshold (found here by bisection over the reported value,
re-running the full solver per probe) makes truthful reporting a dominant
strategy; `utility_audit` checks that empirically on a misreport grid.

Payments are value-critical thresholds at the reported demand; this is the
standard critical-value rule for single-minded agents, applied per instance
with all other reports fixed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .model import MucaInstance, NormalizedInstance
from .muca import solve_muca
from .ufp import solve_ufp

BISECTION_BUDGET = 64


def worker_count() -> int:
    """Parallelism cap from FLOWMECH_THREADS (0 = auto, unset = serial)."""
    raw = os.environ.get("FLOWMECH_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def _request_of(inst, request_id: str):
    if isinstance(inst, NormalizedInstance):
        return inst.inner.requests[inst.inner.request_index(request_id)]
    return inst.requests[inst.request_index(request_id)]


def _solve(inst, epsilon: float):
    if isinstance(inst, NormalizedInstance):
        return solve_ufp(inst, epsilon)
    if isinstance(inst, MucaInstance):
        return solve_muca(inst, epsilon)
    raise TypeError(f"unsupported instance type {type(inst).__name__}")


def _winner_ids(inst, epsilon: float) -> set:
    sol = _solve(inst, epsilon)
    if isinstance(inst, NormalizedInstance):
        return sol.allocated_ids()
    return set(sol.winners)


def _wins_with_value(inst, epsilon: float, request_id: str, value: float) -> bool:
    return request_id in _winner_ids(inst.with_request(request_id, value=value), epsilon)


def critical_payment(inst, epsilon: float, request_id: str,
                     tolerance: float | None = None) -> float:
    """Infimum reported value at which the request stays allocated.

    Bisects over the reported value in [0, v] with everything else fixed;
    value-monotonicity makes the win/lose boundary a single threshold, so
    bisection is sound.  Returns 0.0 when the request is not a winner at its
    current report.  Default tolerance: 1e-6 times the reported value, with
    a budget of 64 probes.
    """
    r = _request_of(inst, request_id)
    if tolerance is None:
        tolerance = 1e-6 * r.value
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if request_id not in _winner_ids(inst, epsilon):
        return 0.0
    lo, hi = 0.0, r.value
    for _ in range(BISECTION_BUDGET):
        if hi - lo <= tolerance:
            break
        mid = 0.5 * (lo + hi)
        if _wins_with_value(inst, epsilon, request_id, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PaymentProfile:
    """Critical-value payment per winner; absent requests pay 0."""

    payments: tuple[tuple[str, float], ...]
    tolerance: float

    def payment_for(self, request_id: str) -> float:
        for rid, p in self.payments:
            if rid == request_id:
                return p
        return 0.0


def run_mechanism(inst, epsilon: float, tolerance: float | None = None):
    """Solve the truthfully-reported instance and price every winner.

    Returns (solution, PaymentProfile).  Winner payments are independent
    bisections and run on a thread pool when FLOWMECH_THREADS asks for it;
    the profile lists winners in instance order either way.
    """
    sol = _solve(inst, epsilon)
    winner_ids = sol.allocated_ids() if isinstance(inst, NormalizedInstance) else set(sol.winners)
    requests = inst.inner.requests if isinstance(inst, NormalizedInstance) else inst.requests
    winners = [r.id for r in requests if r.id in winner_ids]
    workers = min(worker_count(), max(1, len(winners)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            thetas = list(pool.map(
                lambda rid: critical_payment(inst, epsilon, rid, tolerance), winners))
    else:
        thetas = [critical_payment(inst, epsilon, rid, tolerance) for rid in winners]
    effective = tolerance if tolerance is not None else 0.0
    return sol, PaymentProfile(tuple(zip(winners, thetas)), effective)


@dataclass(frozen=True)
class AuditReport:
    request_id: str
    truthful_utility: float
    best_gain: float
    best_report: tuple[float, float | None] | None  # (value, demand or None)
    reports_evaluated: int


def utility_audit(inst, epsilon: float, request_id: str, value_grid,
                  demand_grid=None, tolerance: float | None = None) -> AuditReport:
    """True utility of every misreport on the grid versus truthful reporting.

    For each grid report the allocation and the critical-value payment are
    recomputed in the misreported world; the agent's true utility is its true
    value minus the payment when allocated (demand misreports must be at
    least the true demand, so an allocation always serves the true need) and
    0 otherwise.  Reports a nonpositive best_gain (up to bisection noise)
    when the mechanism is truthful for this agent.

    The payment after a winning value-misreport does not depend on the
    reported value itself (the threshold is a function of the other reports
    and the reported demand), so one bisection per distinct reported demand
    is enough.
    """
    r = _request_of(inst, request_id)
    if tolerance is None:
        tolerance = 1e-6 * r.value
    if demand_grid is not None and not isinstance(inst, NormalizedInstance):
        raise TypeError("demand misreports only apply to routing instances")
    truthful_theta = critical_payment(inst, epsilon, request_id, tolerance)
    truthful_wins = request_id in _winner_ids(inst, epsilon)
    truthful_utility = (r.value - truthful_theta) if truthful_wins else 0.0

    demands = [None] if demand_grid is None else [None] + list(demand_grid)
    theta_by_demand: dict = {None: truthful_theta if truthful_wins else None}
    best_gain = 0.0
    best_report = None
    evaluated = 0
    for d in demands:
        if d is not None:
            if d < r.demand:
                raise ValueError(f"demand misreport {d!r} below true demand {r.demand!r}")
            if d > 1.0:
                raise ValueError(f"demand misreport {d!r} exceeds the unit scale")
        for v in value_grid:
            if v <= 0:
                raise ValueError("value reports must be positive")
            evaluated += 1
            world = (inst.with_request(request_id, value=v) if d is None
                     else inst.with_request(request_id, value=v, demand=d))
            if request_id not in _winner_ids(world, epsilon):
                utility = 0.0
            else:
                if theta_by_demand.get(d) is None:
                    theta_by_demand[d] = critical_payment(world, epsilon, request_id,
                                                          tolerance)
                utility = r.value - theta_by_demand[d]
            gain = utility - truthful_utility
            if gain > best_gain:
                best_gain = gain
                best_report = (v, d)
    return AuditReport(request_id, truthful_utility, best_gain, best_report, evaluated)
