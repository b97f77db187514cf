"""NodeRank and GRC node rankings, and the rank-then-greedy embedding driver they share."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import Embedding, IsolationMode, feasible_mask, map_links
from .topology import SubstrateNetwork, VirtualNetworkRequest, adjacent_bw_sums


class DegenerateRankingError(ValueError):
    pass


@dataclass(frozen=True)
class RankVector:
    scores: np.ndarray
    iterations: int
    residual: float


def bandwidth_matrix(sn: SubstrateNetwork) -> np.ndarray:
    """Symmetric matrix of remaining bandwidth between adjacent nodes."""
    n = sn.node_count
    w = np.zeros((n, n))
    if sn.link_count:
        a, b = sn.link_endpoints[:, 0], sn.link_endpoints[:, 1]
        w[a, b] = sn.bw_remaining
        w[b, a] = sn.bw_remaining
    return w


def _power_iterate(op: np.ndarray, base: np.ndarray, tolerance: float, max_iter: int) -> RankVector:
    # r <- base + op @ r from r = base; stop once the fixed-point residual of r is below tolerance
    r = base.copy()
    residual = np.inf
    it = 0
    while it < max_iter:
        nxt = base + op @ r
        residual = float(np.max(np.abs(nxt - r)))
        if residual < tolerance:
            break
        r = nxt
        it += 1
    return RankVector(r, it, residual)


def grc_matrix(sn: SubstrateNetwork) -> np.ndarray:
    w = bandwidth_matrix(sn)
    col = w.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(col > 0, w / col, 0.0)
    return m


def grc_scores(
    sn: SubstrateNetwork, damping: float = 0.85, tolerance: float = 1e-6, max_iter: int = 500
) -> RankVector:
    """Global resource capacity: r = (1-d) c + d M r.

    c is remaining CPU normalized to sum 1, M the column-normalized
    remaining-bandwidth adjacency matrix.
    """
    if not 0 < damping < 1:
        raise ValueError("damping must lie in (0, 1)")
    cpu = sn.cpu_remaining.astype(float)
    total = cpu.sum()
    if total <= 0:
        raise DegenerateRankingError("GRC needs positive total remaining CPU")
    c = cpu / total
    return _power_iterate(damping * grc_matrix(sn), (1 - damping) * c, tolerance, max_iter)


def noderank_inputs(sn: SubstrateNetwork) -> tuple[np.ndarray, np.ndarray]:
    """(h, P): normalized node resources and the row-stochastic walk matrix."""
    raw = sn.cpu_remaining.astype(float) * adjacent_bw_sums(sn).astype(float)
    total = raw.sum()
    h = raw / total if total > 0 else np.full(sn.node_count, 1.0 / sn.node_count)
    # walk over the topology; links with no bandwidth left still count as edges
    adj = np.zeros((sn.node_count, sn.node_count), dtype=bool)
    if sn.link_count:
        a, b = sn.link_endpoints[:, 0], sn.link_endpoints[:, 1]
        adj[a, b] = True
        adj[b, a] = True
    weights = adj * h[None, :]
    rows = weights.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(rows > 0, weights / rows, 0.0)
    return h, p


def noderank_scores(
    sn: SubstrateNetwork, jump_probability: float = 0.15, tolerance: float = 1e-6, max_iter: int = 500
) -> RankVector:
    """Random-walk rank: r = pJ h + (1 - pJ) P^T r."""
    if not 0 < jump_probability < 1:
        raise ValueError("jump_probability must lie in (0, 1)")
    h, p = noderank_inputs(sn)
    return _power_iterate((1 - jump_probability) * p.T, jump_probability * h, tolerance, max_iter)


def embed_with_ranking(
    sn: SubstrateNetwork,
    vnr: VirtualNetworkRequest,
    scores: np.ndarray | RankVector,
    mode: IsolationMode = IsolationMode.BASIC,
) -> Embedding | None:
    """Greedy placement on the best-ranked feasible node, then BFS links.

    Returns None on rejection. The substrate is never modified here.
    """
    s = np.asarray(scores.scores if isinstance(scores, RankVector) else scores, dtype=float)
    node_map: dict[int, int] = {}
    for v in vnr.placement_order():
        mask = feasible_mask(sn, vnr.nodes[v], set(node_map.values()), mode)
        if not mask.any():
            return None
        # argmax returns the first (lowest id) maximum
        node_map[v] = int(np.argmax(np.where(mask, s, -np.inf)))
    link_map = map_links(sn, vnr, node_map)
    if link_map is None:
        return None
    return Embedding(vnr.id, node_map, link_map, request=vnr)


def grc_embedder(damping: float = 0.85, tolerance: float = 1e-6, max_iter: int = 500, mode=IsolationMode.BASIC):
    def embed(sn: SubstrateNetwork, vnr: VirtualNetworkRequest) -> Embedding | None:
        try:
            r = grc_scores(sn, damping, tolerance, max_iter)
        except DegenerateRankingError:
            return None
        return embed_with_ranking(sn, vnr, r, mode)

    return embed


def noderank_embedder(jump_probability: float = 0.15, tolerance: float = 1e-6, max_iter: int = 500, mode=IsolationMode.BASIC):
    def embed(sn: SubstrateNetwork, vnr: VirtualNetworkRequest) -> Embedding | None:
        return embed_with_ranking(sn, vnr, noderank_scores(sn, jump_probability, tolerance, max_iter), mode)

    return embed
