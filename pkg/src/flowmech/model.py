"""Problem instances and their file format.

Two instance families share this module: edge-capacitated routing instances
(a directed or undirected graph plus connection requests) and multi-unit
market instances (items with multiplicities plus bundle requests).  Instances
are immutable after construction and safe to share across threads.

Demands, values and capacities are 64-bit floats.  The solvers operate on a
`NormalizedInstance`, where every demand lies in (0, 1] and the capacity
bound ``B`` is the smallest edge capacity; `normalize` rescales an arbitrary
instance into that form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import NamedTuple


class InstanceError(ValueError):
    """Base class for instance loading/validation failures."""


class InstanceSyntaxError(InstanceError):
    """Malformed instance text; carries the offending position."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class InstanceSemanticError(InstanceError):
    """Well-formed text with an invalid field; names the field."""

    def __init__(self, message: str, field: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InfeasibleBoundError(ValueError):
    """Raised by solvers when the capacity bound B is below 1."""


class Edge(NamedTuple):
    tail: int
    head: int
    capacity: float


@dataclass(frozen=True)
class Request:
    """A connection request: route `demand` from `source` to `target` for `value`."""

    id: str
    source: int
    target: int
    demand: float
    value: float


@dataclass(frozen=True)
class UfpInstance:
    """Capacitated graph plus connection requests.

    Undirected edges are stored once and are traversable both ways with a
    single shared capacity and load.  Parallel edges are allowed and kept
    distinct (addressed by edge index).  Request ids must be unique; ties
    among equally scored requests are broken by instance order.
    """

    directed: bool
    vertex_count: int
    edges: tuple[Edge, ...]
    requests: tuple[Request, ...]

    def __post_init__(self):
        if self.vertex_count < 1:
            raise InstanceSemanticError("must be a positive integer", "vertices")
        if len(self.edges) < 1:
            raise InstanceSemanticError("at least one edge required", "edges")
        for k, e in enumerate(self.edges):
            if not (0 <= e.tail < self.vertex_count):
                raise InstanceSemanticError(f"unknown vertex {e.tail}", f"edges[{k}].tail")
            if not (0 <= e.head < self.vertex_count):
                raise InstanceSemanticError(f"unknown vertex {e.head}", f"edges[{k}].head")
            if e.tail == e.head:
                raise InstanceSemanticError("self-loops are not allowed", f"edges[{k}]")
            if not (e.capacity > 0) or not math.isfinite(e.capacity):
                raise InstanceSemanticError("capacity must be positive", f"edges[{k}].capacity")
        seen_ids: set[str] = set()
        for k, r in enumerate(self.requests):
            if r.id in seen_ids:
                raise InstanceSemanticError(f"duplicate id {r.id!r}", f"requests[{k}].id")
            seen_ids.add(r.id)
            if not (0 <= r.source < self.vertex_count):
                raise InstanceSemanticError(f"unknown vertex {r.source}", f"requests[{k}].source")
            if not (0 <= r.target < self.vertex_count):
                raise InstanceSemanticError(f"unknown vertex {r.target}", f"requests[{k}].target")
            if r.source == r.target:
                raise InstanceSemanticError("target equals source", f"requests[{k}].target")
            if not (r.demand > 0) or not math.isfinite(r.demand):
                raise InstanceSemanticError("demand must be positive", f"requests[{k}].demand")
            if not (r.value > 0) or not math.isfinite(r.value):
                raise InstanceSemanticError("value must be positive", f"requests[{k}].value")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def request_index(self, request_id: str) -> int:
        for k, r in enumerate(self.requests):
            if r.id == request_id:
                return k
        raise KeyError(request_id)


@dataclass(frozen=True)
class NormalizedInstance:
    """A routing instance with all demands in (0, 1].

    ``bound`` is the smallest edge capacity after rescaling (the capacity
    bound B); ``scale`` is the divisor that was applied to demands and
    capacities (the original maximum demand), kept so reports can be mapped
    back to original units.  A bound below 1 is allowed here — the oracle can
    still evaluate such instances — but the solvers refuse it because the
    largest-demand request then fits no edge.
    """

    inner: UfpInstance
    bound: float
    scale: float

    def __post_init__(self):
        for k, r in enumerate(self.inner.requests):
            if r.demand > 1.0 + 1e-12:
                raise InstanceSemanticError("demand exceeds 1 after scaling", f"requests[{k}].demand")

    @property
    def feasible_bound(self) -> bool:
        return self.bound >= 1.0

    def require_feasible_bound(self):
        if not self.feasible_bound:
            raise InfeasibleBoundError(
                f"capacity bound B={self.bound!r} is below 1; the largest demand fits no edge"
            )

    def with_request(self, request_id: str, *, demand: float | None = None,
                     value: float | None = None) -> "NormalizedInstance":
        """Copy with one request's demand and/or value replaced.

        The capacity bound and scale are kept fixed: this models a changed
        report inside an already-scaled instance, not a fresh instance.
        """
        idx = self.inner.request_index(request_id)
        old = self.inner.requests[idx]
        new = replace(old,
                      demand=old.demand if demand is None else demand,
                      value=old.value if value is None else value)
        reqs = self.inner.requests[:idx] + (new,) + self.inner.requests[idx + 1:]
        return NormalizedInstance(replace(self.inner, requests=reqs), self.bound, self.scale)


def normalize(inst: UfpInstance) -> NormalizedInstance:
    """Divide all demands and capacities by the maximum demand.

    The result has demands in (0, 1] with maximum exactly 1 (when requests
    exist) and records B = min rescaled capacity.  Solving the rescaled
    instance selects the same request/path set as solving the original.
    """
    scale = max((r.demand for r in inst.requests), default=1.0)
    if scale == 1.0:
        scaled = inst
    else:
        edges = tuple(Edge(e.tail, e.head, e.capacity / scale) for e in inst.edges)
        requests = tuple(replace(r, demand=r.demand / scale) for r in inst.requests)
        scaled = UfpInstance(inst.directed, inst.vertex_count, edges, requests)
    bound = min(e.capacity for e in scaled.edges)
    return NormalizedInstance(scaled, bound, scale)


def prenormalized(inst: UfpInstance) -> NormalizedInstance:
    """Wrap an instance whose demands already lie in (0, 1], without rescaling."""
    for k, r in enumerate(inst.requests):
        if r.demand > 1.0:
            raise InstanceSemanticError("demand exceeds 1", f"requests[{k}].demand")
    return NormalizedInstance(inst, min(e.capacity for e in inst.edges), 1.0)


# --- multi-unit market instances ---------------------------------------------


class MucaItem(NamedTuple):
    id: str
    multiplicity: int


@dataclass(frozen=True)
class BundleRequest:
    id: str
    bundle: frozenset
    value: float


@dataclass(frozen=True)
class MucaInstance:
    """Items with integer multiplicities plus single-minded bundle requests."""

    items: tuple[MucaItem, ...]
    requests: tuple[BundleRequest, ...]

    def __post_init__(self):
        if len(self.items) < 1:
            raise InstanceSemanticError("at least one item required", "items")
        ids = set()
        for k, it in enumerate(self.items):
            if it.id in ids:
                raise InstanceSemanticError(f"duplicate id {it.id!r}", f"items[{k}].id")
            ids.add(it.id)
            if not isinstance(it.multiplicity, int) or it.multiplicity < 1:
                raise InstanceSemanticError("multiplicity must be an integer >= 1",
                                            f"items[{k}].multiplicity")
        seen = set()
        for k, r in enumerate(self.requests):
            if r.id in seen:
                raise InstanceSemanticError(f"duplicate id {r.id!r}", f"requests[{k}].id")
            seen.add(r.id)
            if not r.bundle:
                raise InstanceSemanticError("bundle must be nonempty", f"requests[{k}].bundle")
            for u in r.bundle:
                if u not in ids:
                    raise InstanceSemanticError(f"unknown item {u!r}", f"requests[{k}].bundle")
            if not (r.value > 0) or not math.isfinite(r.value):
                raise InstanceSemanticError("value must be positive", f"requests[{k}].value")

    @property
    def bound(self) -> int:
        return min(it.multiplicity for it in self.items)

    def multiplicity_of(self) -> dict:
        return {it.id: it.multiplicity for it in self.items}

    def request_index(self, request_id: str) -> int:
        for k, r in enumerate(self.requests):
            if r.id == request_id:
                return k
        raise KeyError(request_id)

    def with_request(self, request_id: str, *, value: float | None = None,
                     bundle=None) -> "MucaInstance":
        idx = self.request_index(request_id)
        old = self.requests[idx]
        new = BundleRequest(old.id,
                            old.bundle if bundle is None else frozenset(bundle),
                            old.value if value is None else value)
        return MucaInstance(self.items, self.requests[:idx] + (new,) + self.requests[idx + 1:])


# --- text format --------------------------------------------------------------


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(f"invalid instance text at position {exc.pos}: {exc.msg}",
                                  position=exc.pos) from exc


def _check_keys(obj: dict, allowed: set, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceSemanticError(f"unknown keys {sorted(unknown)}", where)


def _number(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise InstanceSemanticError("missing", f"{where}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceSemanticError("must be a number", f"{where}.{key}")
    return float(v)


def _integer(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise InstanceSemanticError("missing", f"{where}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InstanceSemanticError("must be an integer", f"{where}.{key}")
    return v


def parse_ufp_instance(text: str) -> UfpInstance:
    """Parse the routing-instance document format.

    Top-level object: ``directed`` (bool), ``vertices`` (int), ``edges``
    (array of {tail, head, capacity}), ``requests`` (array of {id, source,
    target, demand, value}).  Field order is irrelevant; unknown keys are
    rejected.
    """
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise InstanceSyntaxError("top level must be an object")
    _check_keys(doc, {"directed", "vertices", "edges", "requests"}, "document")
    if not isinstance(doc.get("directed"), bool):
        raise InstanceSemanticError("must be true or false", "directed")
    vertices = _integer(doc, "vertices", "document")
    if not isinstance(doc.get("edges"), list):
        raise InstanceSemanticError("must be an array", "edges")
    if not isinstance(doc.get("requests"), list):
        raise InstanceSemanticError("must be an array", "requests")
    edges = []
    for k, e in enumerate(doc["edges"]):
        if not isinstance(e, dict):
            raise InstanceSemanticError("must be an object", f"edges[{k}]")
        _check_keys(e, {"tail", "head", "capacity"}, f"edges[{k}]")
        edges.append(Edge(_integer(e, "tail", f"edges[{k}]"),
                          _integer(e, "head", f"edges[{k}]"),
                          _number(e, "capacity", f"edges[{k}]")))
    requests = []
    for k, r in enumerate(doc["requests"]):
        if not isinstance(r, dict):
            raise InstanceSemanticError("must be an object", f"requests[{k}]")
        _check_keys(r, {"id", "source", "target", "demand", "value"}, f"requests[{k}]")
        if "id" not in r or not isinstance(r["id"], str):
            raise InstanceSemanticError("must be a string", f"requests[{k}].id")
        requests.append(Request(r["id"],
                                _integer(r, "source", f"requests[{k}]"),
                                _integer(r, "target", f"requests[{k}]"),
                                _number(r, "demand", f"requests[{k}]"),
                                _number(r, "value", f"requests[{k}]")))
    return UfpInstance(doc["directed"], vertices, tuple(edges), tuple(requests))


def serialize_ufp_instance(inst: UfpInstance) -> str:
    doc = {
        "directed": inst.directed,
        "vertices": inst.vertex_count,
        "edges": [{"tail": e.tail, "head": e.head, "capacity": e.capacity} for e in inst.edges],
        "requests": [{"id": r.id, "source": r.source, "target": r.target,
                      "demand": r.demand, "value": r.value} for r in inst.requests],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_muca_instance(text: str) -> MucaInstance:
    """Parse the market-instance document format.

    Top-level object: ``items`` (array of {id, multiplicity}) and
    ``requests`` (array of {id, bundle, value}); unknown keys are rejected.
    """
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise InstanceSyntaxError("top level must be an object")
    _check_keys(doc, {"items", "requests"}, "document")
    if not isinstance(doc.get("items"), list):
        raise InstanceSemanticError("must be an array", "items")
    if not isinstance(doc.get("requests"), list):
        raise InstanceSemanticError("must be an array", "requests")
    items = []
    for k, it in enumerate(doc["items"]):
        if not isinstance(it, dict):
            raise InstanceSemanticError("must be an object", f"items[{k}]")
        _check_keys(it, {"id", "multiplicity"}, f"items[{k}]")
        if "id" not in it or not isinstance(it["id"], str):
            raise InstanceSemanticError("must be a string", f"items[{k}].id")
        items.append(MucaItem(it["id"], _integer(it, "multiplicity", f"items[{k}]")))
    requests = []
    for k, r in enumerate(doc["requests"]):
        if not isinstance(r, dict):
            raise InstanceSemanticError("must be an object", f"requests[{k}]")
        _check_keys(r, {"id", "bundle", "value"}, f"requests[{k}]")
        if "id" not in r or not isinstance(r["id"], str):
            raise InstanceSemanticError("must be a string", f"requests[{k}].id")
        if not isinstance(r.get("bundle"), list):
            raise InstanceSemanticError("must be an array of item ids", f"requests[{k}].bundle")
        for u in r["bundle"]:
            if not isinstance(u, str):
                raise InstanceSemanticError("item ids must be strings", f"requests[{k}].bundle")
        requests.append(BundleRequest(r["id"], frozenset(r["bundle"]),
                                      _number(r, "value", f"requests[{k}]")))
    return MucaInstance(tuple(items), tuple(requests))


def serialize_muca_instance(inst: MucaInstance) -> str:
    doc = {
        "items": [{"id": it.id, "multiplicity": it.multiplicity} for it in inst.items],
        "requests": [{"id": r.id, "bundle": sorted(r.bundle), "value": r.value}
                     for r in inst.requests],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
