"""Feasibility checks, BFS link mapping, the commit/release ledger and an independent verifier."""
from __future__ import annotations

import enum
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .topology import SubstrateNetwork, VirtualNetworkRequest, VirtualNode


class IsolationMode(str, enum.Enum):
    # BASIC: ISA >= ISR only. STRICT: additionally, virtual nodes of different
    # VNRs may share a substrate node only when their ISR values are equal.
    BASIC = "basic"
    STRICT = "strict"


class CommitError(RuntimeError):
    pass


class EmbeddingStateError(RuntimeError):
    pass


@dataclass
class Embedding:
    vnr_id: int
    node_map: dict[int, int]
    link_map: dict[int, list[int]] = field(default_factory=dict)
    committed: bool = False
    request: VirtualNetworkRequest | None = field(default=None, repr=False, compare=False)

    def is_complete(self, vnr: VirtualNetworkRequest) -> bool:
        return len(self.node_map) == len(vnr.nodes) and all(
            i in self.link_map for i in range(len(vnr.links))
        )

    def to_dict(self) -> dict:
        n = len(self.node_map)
        return {
            "vnr_id": self.vnr_id,
            "node_map": [self.node_map[i] for i in range(n)],
            "link_map": [list(self.link_map[i]) for i in range(len(self.link_map))],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Embedding":
        return cls(
            vnr_id=int(d["vnr_id"]),
            node_map={i: int(s) for i, s in enumerate(d["node_map"])},
            link_map={i: [int(x) for x in p] for i, p in enumerate(d["link_map"])},
        )


# --------------------------------------------------------------------------- node stage


def _colocation_blocked(sn: SubstrateNetwork, isr: int) -> list[int]:
    return [i for i, c in enumerate(sn.hosted) if c and any(k != isr for k in c)]


def feasible_mask(
    sn: SubstrateNetwork,
    vnode: VirtualNode,
    used=(),
    mode: IsolationMode = IsolationMode.BASIC,
) -> np.ndarray:
    """Boolean mask over substrate nodes that can host ``vnode``."""
    mask = (sn.cpu_remaining >= vnode.cpu_demand) & (sn.isolation_available >= vnode.isolation_required)
    if used:
        mask[list(used)] = False
    if mode is IsolationMode.STRICT:
        blocked = _colocation_blocked(sn, vnode.isolation_required)
        if blocked:
            mask[blocked] = False
    return mask


def feasible_nodes(
    sn: SubstrateNetwork,
    vnode: VirtualNode,
    partial: Embedding | None = None,
    mode: IsolationMode = IsolationMode.BASIC,
) -> set[int]:
    used = partial.node_map.values() if partial is not None else ()
    return set(np.flatnonzero(feasible_mask(sn, vnode, set(used), mode)).tolist())


# --------------------------------------------------------------------------- link stage


def map_link_bfs(
    sn: SubstrateNetwork,
    src: int,
    dst: int,
    bw_demand: int,
    reserved: dict[int, int] | None = None,
) -> list[int] | None:
    """Minimum-hop path from src to dst over links with enough bandwidth.

    ``reserved`` holds bandwidth already promised on links by earlier virtual
    links of the same request. Neighbors are expanded in ascending id order,
    so the returned path is deterministic. Returns None when no path exists.
    """
    if src == dst:
        return []
    bw = sn.bw_remaining
    reserved = reserved or {}
    parent: dict[int, tuple[int, int]] = {src: (-1, -1)}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, lid in sn.neighbors[u]:
            if v in parent:
                continue
            if bw[lid] - reserved.get(lid, 0) < bw_demand:
                continue
            parent[v] = (u, lid)
            if v == dst:
                path = []
                while v != src:
                    v, lid = parent[v]
                    path.append(lid)
                path.reverse()
                return path
            queue.append(v)
    return None


def map_links(
    sn: SubstrateNetwork, vnr: VirtualNetworkRequest, node_map: dict[int, int]
) -> dict[int, list[int]] | None:
    """Map every virtual link in input order; None on the first failure.

    Bandwidth is reserved locally between links, the substrate is not touched.
    """
    reserved: Counter = Counter()
    link_map = {}
    for i, vl in enumerate(vnr.links):
        a, b = vl.endpoints
        path = map_link_bfs(sn, node_map[a], node_map[b], vl.bw_demand, reserved)
        if path is None:
            return None
        for lid in path:
            reserved[lid] += vl.bw_demand
        link_map[i] = path
    return link_map


# --------------------------------------------------------------------------- ledger


def _request(emb: Embedding, vnr: VirtualNetworkRequest | None) -> VirtualNetworkRequest:
    vnr = vnr if vnr is not None else emb.request
    if vnr is None or vnr.id != emb.vnr_id:
        raise EmbeddingStateError("embedding is not bound to its VNR")
    return vnr


def _link_usage(vnr: VirtualNetworkRequest, emb: Embedding) -> Counter:
    use: Counter = Counter()
    for i, vl in enumerate(vnr.links):
        for lid in emb.link_map[i]:
            use[lid] += vl.bw_demand
    return use


def commit(
    sn: SubstrateNetwork,
    emb: Embedding,
    vnr: VirtualNetworkRequest | None = None,
    mode: IsolationMode = IsolationMode.BASIC,
) -> None:
    """Deduct the embedding's demands from the ledger; all-or-nothing."""
    vnr = _request(emb, vnr)
    if emb.committed:
        raise EmbeddingStateError(f"VNR {emb.vnr_id} already committed")
    if not emb.is_complete(vnr):
        raise CommitError(f"VNR {emb.vnr_id}: incomplete embedding")
    hosts = [emb.node_map[i] for i in range(len(vnr.nodes))]
    if len(set(hosts)) != len(hosts):
        raise CommitError(f"VNR {emb.vnr_id}: node map not injective")
    for vn, s in zip(vnr.nodes, hosts):
        if sn.cpu_remaining[s] < vn.cpu_demand:
            raise CommitError(f"VNR {emb.vnr_id}: CPU shortfall on substrate node {s}")
        if sn.isolation_available[s] < vn.isolation_required:
            raise CommitError(f"VNR {emb.vnr_id}: isolation level of node {s} too low")
        if mode is IsolationMode.STRICT and any(k != vn.isolation_required for k in sn.hosted[s]):
            raise CommitError(f"VNR {emb.vnr_id}: co-location isolation conflict on node {s}")
    use = _link_usage(vnr, emb)
    for lid, amount in use.items():
        if sn.bw_remaining[lid] < amount:
            raise CommitError(f"VNR {emb.vnr_id}: bandwidth shortfall on link {lid}")

    for vn, s in zip(vnr.nodes, hosts):
        sn.cpu_remaining[s] -= vn.cpu_demand
        sn.hosted[s][vn.isolation_required] += 1
    for lid, amount in use.items():
        sn.bw_remaining[lid] -= amount
    emb.committed = True
    emb.request = vnr


def release(sn: SubstrateNetwork, emb: Embedding, vnr: VirtualNetworkRequest | None = None) -> None:
    vnr = _request(emb, vnr)
    if not emb.committed:
        raise EmbeddingStateError(f"VNR {emb.vnr_id} is not committed")
    for i, vn in enumerate(vnr.nodes):
        s = emb.node_map[i]
        sn.cpu_remaining[s] += vn.cpu_demand
        c = sn.hosted[s]
        c[vn.isolation_required] -= 1
        if c[vn.isolation_required] == 0:
            del c[vn.isolation_required]
    for lid, amount in _link_usage(vnr, emb).items():
        sn.bw_remaining[lid] += amount
    emb.committed = False


# --------------------------------------------------------------------------- verifier


@dataclass(frozen=True)
class Violation:
    code: str  # E8 | E9 | E10 | injectivity | continuity | coverage | colocation
    detail: str


def verify_report(
    snapshot: SubstrateNetwork,
    emb: Embedding,
    vnr: VirtualNetworkRequest,
    mode: IsolationMode = IsolationMode.BASIC,
) -> list[Violation]:
    """Check an embedding against the substrate state before it was committed.

    Written from the raw link endpoint table on purpose: nothing here goes
    through the placement helpers above.
    """
    out: list[Violation] = []
    nv = len(vnr.nodes)
    if sorted(emb.node_map) != list(range(nv)) or sorted(emb.link_map) != list(range(len(vnr.links))):
        out.append(Violation("coverage", "node_map/link_map keys do not match the VNR"))
        return out
    hosts = [emb.node_map[i] for i in range(nv)]
    if len(set(hosts)) != nv:
        out.append(Violation("injectivity", f"hosts {hosts}"))
    n_sub = len(snapshot.cpu_capacity)
    for i, s in enumerate(hosts):
        if not 0 <= s < n_sub:
            out.append(Violation("coverage", f"virtual node {i} mapped to unknown node {s}"))
            continue
        need = vnr.nodes[i].cpu_demand
        if int(snapshot.cpu_remaining[s]) < need:
            out.append(Violation("E8", f"node {s}: remaining {int(snapshot.cpu_remaining[s])} < {need}"))
        isr = vnr.nodes[i].isolation_required
        if int(snapshot.isolation_available[s]) < isr:
            out.append(Violation("E10", f"node {s}: ISA {int(snapshot.isolation_available[s])} < ISR {isr}"))
        if mode is IsolationMode.STRICT:
            others = {k for k, c in snapshot.hosted[s].items() if c > 0}
            if others - {isr}:
                out.append(Violation("colocation", f"node {s}: hosts ISR {sorted(others)} vs {isr}"))
    if out:
        return out

    ends = snapshot.link_endpoints.tolist()
    load = [0] * len(ends)
    for j, vl in enumerate(vnr.links):
        path = emb.link_map[j]
        a, b = hosts[vl.endpoints[0]], hosts[vl.endpoints[1]]
        at = a
        visited = {a}
        ok = True
        for lid in path:
            if not 0 <= lid < len(ends):
                ok = False
                break
            x, y = ends[lid]
            if at == x:
                at = y
            elif at == y:
                at = x
            else:
                ok = False
                break
            if at in visited:
                ok = False
                break
            visited.add(at)
            load[lid] += vl.bw_demand
        if not ok or at != b:
            out.append(Violation("continuity", f"virtual link {j}: path {path} does not join {a}-{b}"))
    for lid, used in enumerate(load):
        if used > int(snapshot.bw_remaining[lid]):
            out.append(Violation("E9", f"link {lid}: load {used} > remaining {int(snapshot.bw_remaining[lid])}"))
    return out


def verify(
    snapshot: SubstrateNetwork,
    emb: Embedding,
    vnr: VirtualNetworkRequest,
    mode: IsolationMode = IsolationMode.BASIC,
) -> bool:
    return not verify_report(snapshot, emb, vnr, mode)


def conservation_violations(sn: SubstrateNetwork, active) -> list[str]:
    """Compare the ledger with capacities minus the demands of ``active`` embeddings."""
    cpu = sn.cpu_capacity.copy()
    bw = sn.bw_capacity.copy()
    for emb in active:
        vnr = emb.request
        for i, vn in enumerate(vnr.nodes):
            cpu[emb.node_map[i]] -= vn.cpu_demand
        for j, vl in enumerate(vnr.links):
            for lid in emb.link_map[j]:
                bw[lid] -= vl.bw_demand
    bad = [f"node {i}" for i in np.flatnonzero(cpu != sn.cpu_remaining)]
    bad += [f"link {i}" for i in np.flatnonzero(bw != sn.bw_remaining)]
    return bad
