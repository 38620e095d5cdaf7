"""Deterministic instance generators: adversarial families and seeded random.

The adversarial families are built so that the solvers' documented
deterministic tie-breaks (request instance order, settle order of the path
search) walk straight into the worst case: request copies are listed in the
order the construction wants them selected, and middle-layer vertex ids are
assigned so that equal-length path ties resolve toward the wasteful side.
The subdivided variant of the layered family replaces each shortcut edge by
a path whose hop count makes the wasteful choice the unique minimum, so it
needs no tie-break assumption at all.
"""

from __future__ import annotations

import random

from .model import (BundleRequest, Edge, MucaInstance, MucaItem, Request,
                    UfpInstance)


def gen_directed_lb(bound: int, ell: int, subdivide: bool = False) -> UfpInstance:
    """Layered directed family: sources s_1..s_ell, middles v_1..v_ell, sink t.

    Edges s_i -> v_j exist for j >= i, plus v_j -> t, all with capacity
    ``bound``; requests are ``bound`` unit copies per source, s_1's copies
    first.  Middle vertex ids decrease as j grows (v_ell gets the smallest
    id) so the search resolves equal-length ties toward the largest j.
    With ``subdivide``, each s_i -> v_j edge becomes a directed path of
    i*ell + 1 - j unit-capacity-``bound`` edges, which makes the large-j
    choice a strict minimum for hop-count reasons.
    """
    if bound < 1 or ell < 1:
        raise ValueError("bound and ell must be >= 1")
    sink = 0
    v_id = {j: 1 + (ell - j) for j in range(1, ell + 1)}
    s_id = {i: ell + i for i in range(1, ell + 1)}
    vertex_count = 2 * ell + 1
    cap = float(bound)
    edges: list[Edge] = [Edge(v_id[j], sink, cap) for j in range(1, ell + 1)]
    for i in range(1, ell + 1):
        for j in range(i, ell + 1):
            if not subdivide:
                edges.append(Edge(s_id[i], v_id[j], cap))
            else:
                hops = i * ell + 1 - j
                prev = s_id[i]
                for _ in range(hops - 1):
                    edges.append(Edge(prev, vertex_count, cap))
                    prev = vertex_count
                    vertex_count += 1
                edges.append(Edge(prev, v_id[j], cap))
    requests = tuple(Request(f"s{i}#{c}", s_id[i], sink, 1.0, 1.0)
                     for i in range(1, ell + 1) for c in range(bound))
    return UfpInstance(True, vertex_count, tuple(edges), requests)


_UNDIRECTED_EDGES = ((0, 1), (1, 2), (3, 4), (4, 5), (0, 6), (2, 6), (3, 6), (5, 6))
_UNDIRECTED_PAIRS = ((0, 2), (3, 5), (0, 5), (2, 3))


def gen_undirected_lb(bound: int) -> UfpInstance:
    """Seven-vertex undirected family with a shared hub vertex.

    Eight capacity-``bound`` edges; four request types with ``bound`` unit
    copies each, listed so that the two short-haul types are drained first
    (burning hub capacity) before the two long-haul types that can only
    cross the hub.  ``bound`` must be even: the adversarial schedule runs in
    phases of four routings.
    """
    if bound < 2 or bound % 2 != 0:
        raise ValueError("bound must be an even integer >= 2")
    cap = float(bound)
    edges = tuple(Edge(a, b, cap) for a, b in _UNDIRECTED_EDGES)
    names = ("v1v3", "v4v6", "v1v6", "v3v4")
    requests = tuple(Request(f"{names[p]}#{c}", pair[0], pair[1], 1.0, 1.0)
                     for p, pair in enumerate(_UNDIRECTED_PAIRS)
                     for c in range(bound))
    return UfpInstance(False, 7, edges, requests)


def gen_muca_lb(p: int, bound: int, item_count: int) -> MucaInstance:
    """Grid-partition market family.

    Items split into p*(p+1) cells of item_count/(p*(p+1)) items, all with
    multiplicity ``bound``.  Row bundles (one per row, bound/2 copies each)
    come first; the overlapping second-type bundles (joint coverage of the
    first row plus one column parity of the rest) come after, so row bundles
    win early and strand the first row's capacity.  Unit values throughout.
    Requires odd p >= 3, even bound >= 2, and item_count a multiple of
    p*(p+1).
    """
    if p < 3 or p % 2 == 0:
        raise ValueError("p must be an odd integer >= 3")
    if bound < 2 or bound % 2 != 0:
        raise ValueError("bound must be an even integer >= 2")
    cells = p * (p + 1)
    if item_count < cells or item_count % cells != 0:
        raise ValueError(f"item_count must be a positive multiple of {cells}")
    per_cell = item_count // cells

    def cell(i: int, j: int) -> list[str]:
        return [f"u{i}.{j}.{k}" for k in range(per_cell)]

    items = tuple(MucaItem(uid, bound)
                  for i in range(1, p + 1) for j in range(1, p + 2)
                  for uid in cell(i, j))
    requests: list[BundleRequest] = []
    for row in range(1, p + 1):
        bundle = frozenset(u for j in range(1, p + 2) for u in cell(row, j))
        for c in range(bound // 2):
            requests.append(BundleRequest(f"row{row}#{c}", bundle, 1.0))
    for parity, tag in ((1, "odd"), (0, "even")):
        for half in range(1, (p + 1) // 2 + 1):
            j_top = 2 * half - 1 if parity else 2 * half
            bundle = set(cell(1, 2 * half - 1)) | set(cell(1, 2 * half))
            for i in range(2, p + 1):
                bundle |= set(cell(i, j_top))
            for c in range(bound // 2):
                requests.append(BundleRequest(f"{tag}{half}#{c}", frozenset(bundle), 1.0))
    return MucaInstance(items, tuple(requests))


def gen_random(n: int, m: int, request_count: int, bound: float,
               value_range=(1.0, 10.0), demand_range=(0.25, 1.0),
               seed: int = 0) -> UfpInstance:
    """Seeded connected undirected instance with capacities >= ``bound``.

    A random spanning tree guarantees connectivity (so request endpoints are
    always mutually reachable); the remaining edges join uniform random
    distinct pairs, and parallel edges may occur.  Capacities are uniform in
    [bound, 2*bound]; demands are uniform in ``demand_range``, which must
    lie within (0, 1].
    """
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if m < n - 1:
        raise ValueError(f"need at least n-1={n - 1} edges for connectivity")
    if request_count < 0:
        raise ValueError("request_count must be >= 0")
    if bound <= 0:
        raise ValueError("bound must be positive")
    d_lo, d_hi = demand_range
    if not (0.0 < d_lo <= d_hi <= 1.0):
        raise ValueError("demand_range must lie within (0, 1]")
    v_lo, v_hi = value_range
    if not (0.0 < v_lo <= v_hi):
        raise ValueError("value_range must be positive")
    rng = random.Random(seed)
    edges: list[Edge] = []
    for v in range(1, n):
        edges.append(Edge(rng.randrange(v), v, rng.uniform(bound, 2.0 * bound)))
    for _ in range(m - (n - 1)):
        a = rng.randrange(n)
        b = rng.randrange(n - 1)
        if b >= a:
            b += 1
        edges.append(Edge(a, b, rng.uniform(bound, 2.0 * bound)))
    requests = []
    for k in range(request_count):
        s = rng.randrange(n)
        t = rng.randrange(n - 1)
        if t >= s:
            t += 1
        requests.append(Request(f"r{k}", s, t,
                                rng.uniform(d_lo, d_hi), rng.uniform(v_lo, v_hi)))
    return UfpInstance(False, n, tuple(edges), tuple(requests))


def gen_random_muca(item_count: int, request_count: int, bound: int,
                    value_range=(1.0, 10.0), max_bundle: int = 3,
                    seed: int = 0) -> MucaInstance:
    """Seeded random market instance (library helper for test suites)."""
    if item_count < 1 or bound < 1 or request_count < 0:
        raise ValueError("item_count and bound must be >= 1, request_count >= 0")
    if not (1 <= max_bundle <= item_count):
        raise ValueError("max_bundle must lie in [1, item_count]")
    v_lo, v_hi = value_range
    if not (0.0 < v_lo <= v_hi):
        raise ValueError("value_range must be positive")
    rng = random.Random(seed)
    ids = [f"u{k}" for k in range(item_count)]
    items = tuple(MucaItem(uid, rng.randint(bound, 2 * bound)) for uid in ids)
    requests = []
    for k in range(request_count):
        size = rng.randint(1, max_bundle)
        bundle = frozenset(rng.sample(ids, size))
        requests.append(BundleRequest(f"r{k}", bundle, rng.uniform(v_lo, v_hi)))
    return MucaInstance(items, tuple(requests))
