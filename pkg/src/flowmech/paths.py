"""Single-pair and single-target shortest paths under nonnegative edge weights.

A label-setting (Dijkstra) search suffices because edge weights are always
nonnegative here; each vertex is finalized once, so returned walks are
vertex-simple even with zero-weight edges.

Tie-breaking is deterministic and documented: vertices are settled in
(distance, vertex id) order and a vertex's predecessor is set by the first
strictly improving relaxation, with adjacency lists scanned in edge-index
order.  Among equal-length paths this favors the path reachable through the
lowest-id settled vertex, which benchmark generators rely on.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .model import UfpInstance


@dataclass(frozen=True)
class Path:
    """A simple path as an ordered list of edge indices."""

    edges: tuple[int, ...]
    source: int
    target: int
    length: float


class GraphIndex:
    """Adjacency lists for an instance, built once and reused across queries.

    ``out_arcs[v]`` holds (neighbor, edge index) pairs for arcs leaving ``v``;
    ``in_arcs[v]`` for arcs entering ``v``.  Undirected edges appear in both
    directions of both lists.  Lists are in edge-index order.
    """

    def __init__(self, inst: UfpInstance):
        self.inst = inst
        n = inst.vertex_count
        self.out_arcs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.in_arcs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for k, e in enumerate(inst.edges):
            self.out_arcs[e.tail].append((e.head, k))
            self.in_arcs[e.head].append((e.tail, k))
            if not inst.directed:
                self.out_arcs[e.head].append((e.tail, k))
                self.in_arcs[e.tail].append((e.head, k))


def _check_weights(inst: UfpInstance, weights) -> list[float]:
    ws = list(weights)
    if len(ws) != len(inst.edges):
        raise ValueError(f"expected {len(inst.edges)} weights, got {len(ws)}")
    for k, w in enumerate(ws):
        if not math.isfinite(w) or w < 0:
            raise ValueError(f"weight of edge {k} must be finite and >= 0, got {w!r}")
    return ws


def distances_to_target(index: GraphIndex, weights, target: int, usable=None):
    """Shortest-path tree into ``target``: distance and successor per vertex.

    Returns ``(dist, succ)`` where ``dist[v]`` is the minimum weight of a
    v -> target path (inf if none) and ``succ[v]`` is the (edge index, next
    vertex) step toward the target.  ``usable``, if given, is a per-edge
    boolean sequence; edges marked False are skipped.
    """
    n = index.inst.vertex_count
    dist = [math.inf] * n
    succ: list[tuple[int, int] | None] = [None] * n
    done = [False] * n
    dist[target] = 0.0
    heap = [(0.0, target)]
    in_arcs = index.in_arcs
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for u, k in in_arcs[v]:
            if usable is not None and not usable[k]:
                continue
            nd = d + weights[k]
            if nd < dist[u]:
                dist[u] = nd
                succ[u] = (k, v)
                heapq.heappush(heap, (nd, u))
    return dist, succ


def distances_to_target_capacitated(index: GraphIndex, weights, target: int,
                                    loads, caps, demand: float):
    """`distances_to_target` restricted to edges that fit ``demand``.

    An edge is usable iff load + demand <= capacity.  Separate from the
    unrestricted variant to keep the per-arc check out of a callable; this is
    the solver's hot loop.
    """
    n = index.inst.vertex_count
    dist = [math.inf] * n
    succ: list[tuple[int, int] | None] = [None] * n
    done = [False] * n
    dist[target] = 0.0
    heap = [(0.0, target)]
    in_arcs = index.in_arcs
    pop = heapq.heappop
    push = heapq.heappush
    while heap:
        d, v = pop(heap)
        if done[v]:
            continue
        done[v] = True
        for u, k in in_arcs[v]:
            if loads[k] + demand > caps[k]:
                continue
            nd = d + weights[k]
            if nd < dist[u]:
                dist[u] = nd
                succ[u] = (k, v)
                push(heap, (nd, u))
    return dist, succ


def path_to_target(index: GraphIndex, weights, succ, source: int, target: int) -> Path:
    """Materialize the tree path source -> target from `distances_to_target`."""
    edges = []
    v = source
    while v != target:
        step = succ[v]
        if step is None:
            raise ValueError(f"no recorded path from {source} to {target}")
        k, v = step
        edges.append(k)
    length = 0.0
    for k in edges:
        length += weights[k]
    return Path(tuple(edges), source, target, length)


def shortest_path(inst: UfpInstance, weights, s: int, t: int) -> Path | None:
    """Minimum-total-weight simple path from ``s`` to ``t``, or None.

    Directed instances respect edge direction; undirected edges may be
    traversed both ways.  Ties are resolved by the documented deterministic
    settle order, stable across runs.
    """
    if s == t:
        raise ValueError("source equals target")
    ws = _check_weights(inst, weights)
    index = GraphIndex(inst)
    dist, succ = distances_to_target(index, ws, t)
    if math.isinf(dist[s]):
        return None
    return path_to_target(index, ws, succ, s, t)


def reachable_to(index: GraphIndex, target: int) -> list[bool]:
    """Vertices from which ``target`` is reachable, ignoring capacities."""
    n = index.inst.vertex_count
    seen = [False] * n
    seen[target] = True
    stack = [target]
    while stack:
        v = stack.pop()
        for u, _ in index.in_arcs[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    return seen
