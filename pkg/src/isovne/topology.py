"""Substrate and VNR graph types, random generators and JSON (de)serialization."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1

# RNG stream tags, mixed into the user seed so substrate and workload draws
# stay independent even when both use the same seed value.
_SUBSTRATE_STREAM = 0x5B
_WORKLOAD_STREAM = 0x7A


class ConfigError(ValueError):
    """Invalid generator or experiment parameter."""


class SchemaError(ValueError):
    """A serialized document does not match the expected schema."""


@dataclass(frozen=True)
class SubstrateNode:
    id: int
    cpu_capacity: int
    cpu_remaining: int
    isolation_available: int


@dataclass(frozen=True)
class SubstrateLink:
    endpoints: tuple[int, int]
    bw_capacity: int
    bw_remaining: int


@dataclass(frozen=True)
class VirtualNode:
    id: int
    cpu_demand: int
    isolation_required: int


@dataclass(frozen=True)
class VirtualLink:
    endpoints: tuple[int, int]
    bw_demand: int


@dataclass(frozen=True)
class VirtualNetworkRequest:
    id: int
    nodes: tuple[VirtualNode, ...]
    links: tuple[VirtualLink, ...]
    arrival_time: float
    lifetime: float

    @property
    def departure_time(self) -> float:
        return self.arrival_time + self.lifetime

    def placement_order(self) -> list[int]:
        """Virtual node ids by descending CPU demand, ties by id."""
        return sorted(range(len(self.nodes)), key=lambda i: (-self.nodes[i].cpu_demand, i))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "arrival_time": self.arrival_time,
            "lifetime": self.lifetime,
            "nodes": [
                {"id": n.id, "cpu_demand": n.cpu_demand, "isolation_required": n.isolation_required}
                for n in self.nodes
            ],
            "links": [{"endpoints": list(l.endpoints), "bw_demand": l.bw_demand} for l in self.links],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VirtualNetworkRequest":
        try:
            nodes = tuple(
                VirtualNode(int(n["id"]), int(n["cpu_demand"]), int(n["isolation_required"]))
                for n in d["nodes"]
            )
            links = tuple(
                VirtualLink((int(l["endpoints"][0]), int(l["endpoints"][1])), int(l["bw_demand"]))
                for l in d["links"]
            )
            vnr = cls(int(d["id"]), nodes, links, float(d["arrival_time"]), float(d["lifetime"]))
        except (KeyError, TypeError, IndexError) as exc:
            raise SchemaError(f"malformed VNR record: {exc!r}") from exc
        for i, n in enumerate(vnr.nodes):
            if n.id != i:
                raise SchemaError(f"VNR {vnr.id}: node ids must be 0..n-1 in order")
        for l in vnr.links:
            a, b = l.endpoints
            if a == b or not (0 <= a < len(nodes) and 0 <= b < len(nodes)):
                raise SchemaError(f"VNR {vnr.id}: bad link endpoints {l.endpoints}")
        return vnr


class SubstrateNetwork:
    """Substrate graph plus its mutable resource ledger.

    The ledger lives in integer numpy arrays indexed by node id / link id.
    ``hosted`` counts, per substrate node, the isolation requirements of the
    virtual nodes currently placed there; strict co-location checks read it.
    """

    def __init__(
        self,
        cpu_capacity: Sequence[int],
        isolation_available: Sequence[int],
        link_endpoints: Sequence[tuple[int, int]],
        bw_capacity: Sequence[int],
        cpu_remaining: Sequence[int] | None = None,
        bw_remaining: Sequence[int] | None = None,
    ):
        n = len(cpu_capacity)
        self.cpu_capacity = np.asarray(cpu_capacity, dtype=np.int64).copy()
        self.isolation_available = np.asarray(isolation_available, dtype=np.int64).copy()
        self.cpu_remaining = (
            self.cpu_capacity.copy()
            if cpu_remaining is None
            else np.asarray(cpu_remaining, dtype=np.int64).copy()
        )
        ends = [(min(a, b), max(a, b)) for a, b in link_endpoints]
        self.link_endpoints = np.asarray(ends, dtype=np.int64).reshape(-1, 2)
        self.bw_capacity = np.asarray(bw_capacity, dtype=np.int64).copy().reshape(-1)
        self.bw_remaining = (
            self.bw_capacity.copy()
            if bw_remaining is None
            else np.asarray(bw_remaining, dtype=np.int64).copy().reshape(-1)
        )
        if len(self.isolation_available) != n:
            raise ValueError("isolation_available length differs from node count")
        if len(self.bw_capacity) != len(self.link_endpoints) or len(self.bw_remaining) != len(self.bw_capacity):
            raise ValueError("link arrays have inconsistent lengths")
        seen = set()
        for a, b in ends:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"link endpoint out of range: {(a, b)}")
            if (a, b) in seen:
                raise ValueError(f"duplicate link {(a, b)}")
            seen.add((a, b))
        if np.any(self.cpu_remaining < 0) or np.any(self.cpu_remaining > self.cpu_capacity):
            raise ValueError("cpu_remaining outside [0, capacity]")
        if np.any(self.bw_remaining < 0) or np.any(self.bw_remaining > self.bw_capacity):
            raise ValueError("bw_remaining outside [0, capacity]")

        # adjacency[i]: incident link ids; neighbors[i]: (neighbor, link) sorted by neighbor id
        self.adjacency: list[list[int]] = [[] for _ in range(n)]
        self.neighbors: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for lid, (a, b) in enumerate(ends):
            self.adjacency[a].append(lid)
            self.adjacency[b].append(lid)
            self.neighbors[a].append((b, lid))
            self.neighbors[b].append((a, lid))
        for nb in self.neighbors:
            nb.sort()
        self._link_index = {e: lid for lid, e in enumerate(ends)}
        self.hosted: list[Counter] = [Counter() for _ in range(n)]

    @property
    def node_count(self) -> int:
        return len(self.cpu_capacity)

    @property
    def link_count(self) -> int:
        return len(self.link_endpoints)

    def node(self, node_id: int) -> SubstrateNode:
        self._check_node(node_id)
        return SubstrateNode(
            node_id,
            int(self.cpu_capacity[node_id]),
            int(self.cpu_remaining[node_id]),
            int(self.isolation_available[node_id]),
        )

    def link(self, link_id: int) -> SubstrateLink:
        a, b = self.link_endpoints[link_id]
        return SubstrateLink((int(a), int(b)), int(self.bw_capacity[link_id]), int(self.bw_remaining[link_id]))

    @property
    def nodes(self) -> list[SubstrateNode]:
        return [self.node(i) for i in range(self.node_count)]

    @property
    def links(self) -> list[SubstrateLink]:
        return [self.link(i) for i in range(self.link_count)]

    def link_between(self, a: int, b: int) -> int | None:
        return self._link_index.get((min(a, b), max(a, b)))

    def _check_node(self, node_id: int) -> None:
        if not (0 <= node_id < self.node_count):
            raise KeyError(f"unknown substrate node {node_id}")

    def is_connected(self) -> bool:
        return _is_connected(self.node_count, self.link_endpoints.tolist())

    def copy(self) -> "SubstrateNetwork":
        """Independent copy of the graph and its current ledger."""
        sn = object.__new__(SubstrateNetwork)
        sn.cpu_capacity = self.cpu_capacity
        sn.isolation_available = self.isolation_available
        sn.link_endpoints = self.link_endpoints
        sn.bw_capacity = self.bw_capacity
        sn.adjacency = self.adjacency
        sn.neighbors = self.neighbors
        sn._link_index = self._link_index
        sn.cpu_remaining = self.cpu_remaining.copy()
        sn.bw_remaining = self.bw_remaining.copy()
        sn.hosted = [c.copy() for c in self.hosted]
        return sn

    def fresh(self) -> "SubstrateNetwork":
        """Copy with every resource restored to full capacity and nothing hosted."""
        sn = self.copy()
        sn.cpu_remaining[:] = sn.cpu_capacity
        sn.bw_remaining[:] = sn.bw_capacity
        sn.hosted = [Counter() for _ in range(sn.node_count)]
        return sn

    def ledger_state(self) -> tuple:
        """Hashable snapshot of the ledger, for exact before/after comparisons."""
        return (
            self.cpu_remaining.tobytes(),
            self.bw_remaining.tobytes(),
            tuple(tuple(sorted(c.items())) for c in self.hosted),
        )

    def at_full_capacity(self) -> bool:
        return bool(
            np.array_equal(self.cpu_remaining, self.cpu_capacity)
            and np.array_equal(self.bw_remaining, self.bw_capacity)
            and not any(self.hosted)
        )

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "id": i,
                    "cpu_capacity": int(self.cpu_capacity[i]),
                    "cpu_remaining": int(self.cpu_remaining[i]),
                    "isolation_available": int(self.isolation_available[i]),
                }
                for i in range(self.node_count)
            ],
            "links": [
                {
                    "endpoints": [int(a), int(b)],
                    "bw_capacity": int(self.bw_capacity[i]),
                    "bw_remaining": int(self.bw_remaining[i]),
                }
                for i, (a, b) in enumerate(self.link_endpoints)
            ],
            "adjacency": [list(a) for a in self.adjacency],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SubstrateNetwork":
        try:
            nodes = d["nodes"]
            links = d["links"]
            for i, nd in enumerate(nodes):
                if int(nd["id"]) != i:
                    raise SchemaError("substrate node ids must be 0..n-1 in order")
            sn = cls(
                [int(nd["cpu_capacity"]) for nd in nodes],
                [int(nd["isolation_available"]) for nd in nodes],
                [(int(l["endpoints"][0]), int(l["endpoints"][1])) for l in links],
                [int(l["bw_capacity"]) for l in links],
                cpu_remaining=[int(nd["cpu_remaining"]) for nd in nodes],
                bw_remaining=[int(l["bw_remaining"]) for l in links],
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise SchemaError(f"malformed substrate document: {exc!r}") from exc
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc)) from exc
        if "adjacency" in d and [sorted(a) for a in d["adjacency"]] != [sorted(a) for a in sn.adjacency]:
            raise SchemaError("adjacency does not match links")
        return sn


def degree(sn: SubstrateNetwork, node_id: int) -> int:
    sn._check_node(node_id)
    return len(sn.adjacency[node_id])


def sum_adjacent_bw(sn: SubstrateNetwork, node_id: int) -> int:
    sn._check_node(node_id)
    return int(sum(int(sn.bw_remaining[l]) for l in sn.adjacency[node_id]))


def degrees(sn: SubstrateNetwork) -> np.ndarray:
    return np.array([len(a) for a in sn.adjacency], dtype=np.int64)


def adjacent_bw_sums(sn: SubstrateNetwork) -> np.ndarray:
    n = sn.node_count
    if sn.link_count == 0:
        return np.zeros(n, dtype=np.int64)
    w = sn.bw_remaining
    e = sn.link_endpoints
    out = np.bincount(e[:, 0], weights=w, minlength=n) + np.bincount(e[:, 1], weights=w, minlength=n)
    return out.astype(np.int64)


# --------------------------------------------------------------------------- generators


def _check_range(name: str, rng_range: Sequence[int]) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in rng_range)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected a [lo, hi] pair") from exc
    if lo > hi:
        raise ConfigError(f"{name}: empty range [{lo}, {hi}]")
    return lo, hi


def _components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values(), key=lambda g: g[0])


def _is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    return n <= 1 or len(_components(n, edges)) == 1


def random_pairs(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Erdos-Renyi edges in (i, j), i < j order."""
    if n < 2:
        return []
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def repair_links(n: int, edges: list[tuple[int, int]], rng: np.random.Generator) -> list[tuple[int, int]]:
    """Join components with (#components - 1) random links."""
    comps = _components(n, edges)
    if len(comps) <= 1:
        return []
    order = rng.permutation(len(comps))
    merged = list(comps[order[0]])
    added = []
    for k in order[1:]:
        comp = comps[k]
        a = comp[int(rng.integers(len(comp)))]
        b = merged[int(rng.integers(len(merged)))]
        added.append((min(a, b), max(a, b)))
        merged.extend(comp)
    return added


def generate_substrate(
    node_count: int = 100,
    link_probability: float = 0.1,
    cpu_range: Sequence[int] = (50, 100),
    bw_range: Sequence[int] = (50, 100),
    isa_range: Sequence[int] = (1, 3),
    seed: int = 0,
) -> SubstrateNetwork:
    if node_count < 2:
        raise ConfigError("node_count: must be >= 2")
    if not (0.0 < link_probability <= 1.0):
        raise ConfigError("link_probability: must lie in (0, 1]")
    cpu_lo, cpu_hi = _check_range("cpu_range", cpu_range)
    bw_lo, bw_hi = _check_range("bw_range", bw_range)
    isa_lo, isa_hi = _check_range("isa_range", isa_range)
    rng = np.random.default_rng([int(seed), _SUBSTRATE_STREAM])

    edges = random_pairs(node_count, link_probability, rng)
    edges = edges + repair_links(node_count, edges, rng)
    cpu = rng.integers(cpu_lo, cpu_hi + 1, size=node_count)
    isa = rng.integers(isa_lo, isa_hi + 1, size=node_count)
    bw = rng.integers(bw_lo, bw_hi + 1, size=len(edges))
    return SubstrateNetwork(cpu, isa, edges, bw)


def generate_workload(
    vnr_count: int = 2000,
    arrival_rate: float = 0.05,
    mean_lifetime: float = 500.0,
    node_count_range: Sequence[int] = (2, 10),
    cpu_demand_range: Sequence[int] = (0, 50),
    bw_demand_range: Sequence[int] = (0, 50),
    isr_range: Sequence[int] = (1, 3),
    vnr_link_probability: float = 0.5,
    seed: int = 0,
) -> list[VirtualNetworkRequest]:
    if vnr_count < 1:
        raise ConfigError("vnr_count: must be >= 1")
    if not arrival_rate > 0:
        raise ConfigError("arrival_rate: must be > 0")
    if not mean_lifetime > 0:
        raise ConfigError("mean_lifetime: must be > 0")
    if not (0.0 <= vnr_link_probability <= 1.0):
        raise ConfigError("vnr_link_probability: must lie in [0, 1]")
    n_lo, n_hi = _check_range("node_count_range", node_count_range)
    if n_lo < 1:
        raise ConfigError("node_count_range: lower bound must be >= 1")
    c_lo, c_hi = _check_range("cpu_demand_range", cpu_demand_range)
    b_lo, b_hi = _check_range("bw_demand_range", bw_demand_range)
    i_lo, i_hi = _check_range("isr_range", isr_range)
    if c_lo < 0 or b_lo < 0:
        raise ConfigError("demand ranges must be non-negative")
    rng = np.random.default_rng([int(seed), _WORKLOAD_STREAM])

    gaps = rng.exponential(1.0 / arrival_rate, size=vnr_count)
    lifetimes = rng.exponential(mean_lifetime, size=vnr_count)
    vnrs = []
    t = 0.0
    for k in range(vnr_count):
        nxt = t + float(gaps[k])
        t = nxt if nxt > t else float(np.nextafter(t, np.inf))
        n = int(rng.integers(n_lo, n_hi + 1))
        edges = random_pairs(n, vnr_link_probability, rng)
        edges = edges + repair_links(n, edges, rng)
        cpu = rng.integers(c_lo, c_hi + 1, size=n).tolist()
        isr = rng.integers(i_lo, i_hi + 1, size=n).tolist()
        bw = rng.integers(b_lo, b_hi + 1, size=len(edges)).tolist()
        vnrs.append(
            VirtualNetworkRequest(
                id=k,
                nodes=tuple(VirtualNode(i, cpu[i], isr[i]) for i in range(n)),
                links=tuple(VirtualLink(e, w) for e, w in zip(edges, bw)),
                arrival_time=t,
                lifetime=float(lifetimes[k]),
            )
        )
    return vnrs


def vnr_is_connected(vnr: VirtualNetworkRequest) -> bool:
    return _is_connected(len(vnr.nodes), (l.endpoints for l in vnr.links))


# --------------------------------------------------------------------------- JSON documents


def dump_json(doc: dict) -> str:
    """Canonical text form: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def substrate_document(sn: SubstrateNetwork, provenance: dict | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "substrate", **sn.to_dict()}
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def workload_document(vnrs: Sequence[VirtualNetworkRequest], provenance: dict | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "workload", "vnrs": [v.to_dict() for v in vnrs]}
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def _check_header(doc: dict, kind: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"{kind} document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{kind}: unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("kind", kind) != kind:
        raise SchemaError(f"expected a {kind} document, got {doc.get('kind')!r}")


def substrate_from_document(doc: dict) -> SubstrateNetwork:
    _check_header(doc, "substrate")
    return SubstrateNetwork.from_dict(doc)


def workload_from_document(doc: dict) -> list[VirtualNetworkRequest]:
    _check_header(doc, "workload")
    if not isinstance(doc.get("vnrs"), list):
        raise SchemaError("workload: missing 'vnrs' list")
    vnrs = [VirtualNetworkRequest.from_dict(v) for v in doc["vnrs"]]
    for a, b in zip(vnrs, vnrs[1:]):
        if (b.arrival_time, b.id) < (a.arrival_time, a.id):
            raise SchemaError("workload: VNRs must be ordered by arrival time")
    return vnrs


def load_substrate(path) -> SubstrateNetwork:
    with open(path, encoding="utf-8") as f:
        return substrate_from_document(json.load(f))


def load_workload(path) -> list[VirtualNetworkRequest]:
    with open(path, encoding="utf-8") as f:
        return workload_from_document(json.load(f))
