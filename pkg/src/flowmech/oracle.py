"""Desk-scale ground truth: exhaustive optima, path enumeration, dual checks.

Everything here is deliberately independent of the greedy solvers: optima
come from pruned exhaustive search over subsets and path choices, and dual
feasibility is checked against cheapest paths recomputed from scratch.
Limits guard the exponential blowup; exceeding one raises `OracleLimitError`
("instance too large for oracle") rather than silently truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import MucaInstance, UfpInstance
from .paths import GraphIndex, Path, shortest_path


class OracleLimitError(RuntimeError):
    """Instance too large for exhaustive verification."""


@dataclass(frozen=True)
class DualAssignment:
    """A candidate solution of the covering dual.

    ``y`` is one price per edge (routing) or per item in instance order
    (market); ``z`` maps request ids to covering values and is None for the
    repetition dual, which has no per-request variables.
    """

    y: tuple[float, ...]
    z: dict | None = None

    def __post_init__(self):
        for k, v in enumerate(self.y):
            if v < 0:
                raise ValueError(f"dual price {k} is negative")
        if self.z is not None:
            for rid, v in self.z.items():
                if v < 0:
                    raise ValueError(f"dual cover for {rid!r} is negative")


FEASIBILITY_SLACK = 1e-9


def enumerate_paths(inst: UfpInstance, s: int, t: int, max_paths: int = 1000,
                    weights=None) -> list[Path]:
    """All simple s-t paths, in deterministic depth-first edge-index order.

    Lengths are computed under ``weights`` (unit weights by default).
    Raises OracleLimitError when more than ``max_paths`` paths exist.
    """
    if s == t:
        raise ValueError("source equals target")
    ws = [1.0] * len(inst.edges) if weights is None else list(weights)
    index = GraphIndex(inst)
    out = index.out_arcs
    paths: list[Path] = []
    edge_stack: list[int] = []
    on_path = [False] * inst.vertex_count
    on_path[s] = True

    def walk(v: int):
        if v == t:
            if len(paths) >= max_paths:
                raise OracleLimitError(
                    f"instance too large for oracle: more than {max_paths} "
                    f"simple paths from {s} to {t}")
            length = 0.0
            for k in edge_stack:
                length += ws[k]
            paths.append(Path(tuple(edge_stack), s, t, length))
            return
        for u, k in out[v]:
            if on_path[u]:
                continue
            on_path[u] = True
            edge_stack.append(k)
            walk(u)
            edge_stack.pop()
            on_path[u] = False

    walk(s)
    return paths


def brute_force_opt_ufp(inst: UfpInstance, max_requests: int = 10,
                        max_paths: int = 20):
    """Exact optimum over request subsets and path choices.

    Returns (optimal value, witness) where the witness is a tuple of
    (request id, Path) pairs achieving the value.  Exhaustive with
    value-bound pruning; deterministic (keeps the first best found).
    """
    if len(inst.requests) > max_requests:
        raise OracleLimitError(
            f"instance too large for oracle: {len(inst.requests)} requests "
            f"(limit {max_requests})")
    options: list[list[Path]] = []
    for r in inst.requests:
        options.append(enumerate_paths(inst, r.source, r.target, max_paths))
    suffix_value = [0.0] * (len(inst.requests) + 1)
    for i in range(len(inst.requests) - 1, -1, -1):
        suffix_value[i] = suffix_value[i + 1] + inst.requests[i].value

    residual = [e.capacity for e in inst.edges]
    chosen: list[tuple[int, Path]] = []
    best_value = 0.0
    best_witness: tuple = ()

    def search(i: int, value: float):
        nonlocal best_value, best_witness
        if value + suffix_value[i] <= best_value and i > 0:
            return
        if i == len(inst.requests):
            if value > best_value:
                best_value = value
                best_witness = tuple((inst.requests[k].id, p) for k, p in chosen)
            return
        r = inst.requests[i]
        for p in options[i]:
            if all(residual[k] >= r.demand - FEASIBILITY_SLACK for k in p.edges):
                for k in p.edges:
                    residual[k] -= r.demand
                chosen.append((i, p))
                search(i + 1, value + r.value)
                chosen.pop()
                for k in p.edges:
                    residual[k] += r.demand
        search(i + 1, value)

    search(0, 0.0)
    return best_value, best_witness


def brute_force_opt_muca(inst: MucaInstance, max_requests: int = 25):
    """Exact optimum for the bundle market; returns (value, winner id tuple).

    Requests with identical bundle and value are grouped and enumerated by
    count, which keeps the benchmark families (many copies of few types)
    tractable.
    """
    if len(inst.requests) > max_requests:
        raise OracleLimitError(
            f"instance too large for oracle: {len(inst.requests)} requests "
            f"(limit {max_requests})")
    item_index = {it.id: k for k, it in enumerate(inst.items)}
    classes: list[tuple[tuple[int, ...], float, list[str]]] = []
    by_key: dict = {}
    for r in inst.requests:
        key = (tuple(sorted(item_index[u] for u in r.bundle)), r.value)
        if key in by_key:
            classes[by_key[key]][2].append(r.id)
        else:
            by_key[key] = len(classes)
            classes.append((key[0], key[1], [r.id]))

    suffix_value = [0.0] * (len(classes) + 1)
    for i in range(len(classes) - 1, -1, -1):
        suffix_value[i] = suffix_value[i + 1] + classes[i][1] * len(classes[i][2])

    residual = [it.multiplicity for it in inst.items]
    counts = [0] * len(classes)
    best_value = 0.0
    best_counts: tuple = tuple(counts)

    def search(i: int, value: float):
        nonlocal best_value, best_counts
        if value + suffix_value[i] <= best_value and i > 0:
            return
        if i == len(classes):
            if value > best_value:
                best_value = value
                best_counts = tuple(counts)
            return
        items, _value, ids = classes[i]
        fit = min((residual[k] for k in items), default=0)
        top = min(len(ids), fit)
        for c in range(top, -1, -1):
            for k in items:
                residual[k] -= c
            counts[i] = c
            search(i + 1, value + c * _value)
            counts[i] = 0
            for k in items:
                residual[k] += c
        return

    search(0, 0.0)
    winners = []
    for i, c in enumerate(best_counts):
        winners.extend(classes[i][2][:c])
    return best_value, tuple(winners)


def brute_force_opt_repeat(inst: UfpInstance, max_total_copies: int,
                           max_requests: int = 10, max_paths: int = 20):
    """Exact optimum when requests may repeat, up to ``max_total_copies``.

    Returns (value, witness, capped) where the witness is a tuple of
    (request id, edge tuple, count) entries.  ``capped`` is True when the
    best solution uses the full copy budget, i.e. a larger budget might do
    better; choose the budget at least floor(sum(capacity)/min demand) for
    exactness on tiny instances.
    """
    if len(inst.requests) > max_requests:
        raise OracleLimitError(
            f"instance too large for oracle: {len(inst.requests)} requests "
            f"(limit {max_requests})")
    pairs: list[tuple[int, Path]] = []
    for i, r in enumerate(inst.requests):
        for p in enumerate_paths(inst, r.source, r.target, max_paths):
            pairs.append((i, p))
    max_value = max((r.value for r in inst.requests), default=0.0)

    residual = [e.capacity for e in inst.edges]
    counts = [0] * len(pairs)
    best_value = 0.0
    best_counts: tuple = tuple(counts)
    best_total = 0

    def search(i: int, value: float, used: int):
        nonlocal best_value, best_counts, best_total
        if value + (max_total_copies - used) * max_value <= best_value and i > 0:
            return
        if i == len(pairs):
            if value > best_value:
                best_value = value
                best_counts = tuple(counts)
                best_total = used
            return
        req_i, p = pairs[i]
        d = inst.requests[req_i].demand
        fit = max_total_copies - used
        for k in p.edges:
            fit = min(fit, int((residual[k] + FEASIBILITY_SLACK) // d))
        for c in range(fit, -1, -1):
            for k in p.edges:
                residual[k] -= c * d
            counts[i] = c
            search(i + 1, value + c * inst.requests[req_i].value, used + c)
            counts[i] = 0
            for k in p.edges:
                residual[k] += c * d
        return

    search(0, 0.0, 0)
    witness = tuple((inst.requests[pairs[i][0]].id, pairs[i][1].edges, c)
                    for i, c in enumerate(best_counts) if c > 0)
    return best_value, witness, best_total == max_total_copies


def check_dual_feasible(inst: UfpInstance, dual: DualAssignment,
                        slack: float = FEASIBILITY_SLACK) -> list:
    """Violated covering constraints of a routing dual, empty if feasible.

    For every request the binding constraint is at its cheapest path under
    the prices, which dominates all its paths; requests with no path have no
    constraints.  Returns (request id, shortfall) pairs.
    """
    violations = []
    for r in inst.requests:
        z = 0.0 if dual.z is None else dual.z.get(r.id, 0.0)
        sp = shortest_path(inst, dual.y, r.source, r.target)
        if sp is None:
            continue
        lhs = z + r.demand * sp.length
        if lhs < r.value - slack:
            violations.append((r.id, r.value - lhs))
    return violations


def check_dual_feasible_muca(inst: MucaInstance, dual: DualAssignment,
                             slack: float = FEASIBILITY_SLACK) -> list:
    """Violated covering constraints of a market dual, empty if feasible."""
    item_index = {it.id: k for k, it in enumerate(inst.items)}
    violations = []
    for r in inst.requests:
        z = 0.0 if dual.z is None else dual.z.get(r.id, 0.0)
        lhs = z + sum(dual.y[item_index[u]] for u in sorted(r.bundle))
        if lhs < r.value - slack:
            violations.append((r.id, r.value - lhs))
    return violations


# --- allocation checking (shared by oracle self-tests, CLI verify, suites) ----


def check_ufp_allocation(inst: UfpInstance, entries, *,
                         allow_repeats: bool = False,
                         slack: float = FEASIBILITY_SLACK) -> list[str]:
    """Problems with a proposed allocation; empty list means feasible.

    ``entries`` holds (request id, edge index tuple) pairs, or (request id,
    edge tuple, count) triples when ``allow_repeats``.  Checks: known ids,
    each request at most once (unless repeats are allowed), edge tuples form
    a walk from the request's source to its target, and loads respect
    capacities within ``slack``.
    """
    problems = []
    by_id = {r.id: r for r in inst.requests}
    loads = [0.0] * len(inst.edges)
    seen = set()
    for entry in entries:
        if allow_repeats:
            rid, edges, count = entry
        else:
            rid, edges = entry[0], entry[1]
            edges = edges.edges if isinstance(edges, Path) else edges
            count = 1
        if rid not in by_id:
            problems.append(f"unknown request {rid!r}")
            continue
        if not allow_repeats:
            if rid in seen:
                problems.append(f"request {rid!r} allocated more than once")
                continue
            seen.add(rid)
        if count < 1:
            problems.append(f"request {rid!r} has count {count}")
            continue
        r = by_id[rid]
        v = r.source
        ok = True
        for k in edges:
            if not (0 <= k < len(inst.edges)):
                problems.append(f"request {rid!r}: edge index {k} out of range")
                ok = False
                break
            e = inst.edges[k]
            if e.tail == v:
                v = e.head
            elif not inst.directed and e.head == v:
                v = e.tail
            else:
                problems.append(f"request {rid!r}: edge {k} does not extend the walk")
                ok = False
                break
        if ok and v != r.target:
            problems.append(f"request {rid!r}: walk ends at {v}, not {r.target}")
            ok = False
        if ok:
            for k in edges:
                loads[k] += count * r.demand
    for k, load in enumerate(loads):
        if load > inst.edges[k].capacity + slack:
            problems.append(f"edge {k} overloaded: {load!r} > {inst.edges[k].capacity!r}")
    return problems


def check_muca_allocation(inst: MucaInstance, winner_ids) -> list[str]:
    """Problems with a proposed winner set; empty list means feasible."""
    problems = []
    by_id = {r.id: r for r in inst.requests}
    used: dict = {}
    seen = set()
    for rid in winner_ids:
        if rid not in by_id:
            problems.append(f"unknown request {rid!r}")
            continue
        if rid in seen:
            problems.append(f"request {rid!r} allocated more than once")
            continue
        seen.add(rid)
        for u in by_id[rid].bundle:
            used[u] = used.get(u, 0) + 1
    mult = inst.multiplicity_of()
    for u in sorted(used):
        if used[u] > mult[u]:
            problems.append(f"item {u!r} oversubscribed: {used[u]} > {mult[u]}")
    return problems
