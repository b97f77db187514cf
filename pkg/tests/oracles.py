"""Brute-force reference computations used by the tests. Kept deliberately naive."""
from __future__ import annotations

import itertools

import numpy as np

from isovne.embedding import Embedding, map_links
from isovne.metrics import PricingConfig, request_lrc


def simple_paths(sn, src, dst):
    """Every simple path from src to dst as a list of link ids (DFS enumeration)."""
    ends = sn.link_endpoints.tolist()
    out = []

    def walk(at, seen, links):
        if at == dst:
            out.append(list(links))
            return
        for lid, (a, b) in enumerate(ends):
            if at not in (a, b):
                continue
            nxt = b if at == a else a
            if nxt in seen:
                continue
            seen.add(nxt)
            links.append(lid)
            walk(nxt, seen, links)
            links.pop()
            seen.discard(nxt)

    walk(src, {src}, [])
    return out


def min_feasible_hops(sn, src, dst, demand):
    hops = [len(p) for p in simple_paths(sn, src, dst) if all(sn.bw_remaining[l] >= demand for l in p)]
    return min(hops) if hops else None


def node_ok(sn, vnode, s, used):
    return (
        s not in used
        and int(sn.cpu_remaining[s]) >= vnode.cpu_demand
        and int(sn.isolation_available[s]) >= vnode.isolation_required
    )


def best_lrc(sn, vnr, pricing=PricingConfig()):
    """Max per-request LRC over all injective feasible placements with BFS links; None if none embeds."""
    best = None
    k = len(vnr.nodes)
    for hosts in itertools.permutations(range(sn.node_count), k):
        if not all(node_ok(sn, vnr.nodes[v], hosts[v], ()) for v in range(k)):
            continue
        nm = {v: hosts[v] for v in range(k)}
        lm = map_links(sn, vnr, nm)
        if lm is None:
            continue
        r = request_lrc(vnr, Embedding(vnr.id, nm, lm), pricing)
        best = r if best is None else max(best, r)
    return best


def dense_grc(sn, damping):
    n = sn.node_count
    w = np.zeros((n, n))
    for lid, (a, b) in enumerate(sn.link_endpoints.tolist()):
        w[a, b] = w[b, a] = sn.bw_remaining[lid]
    m = np.zeros((n, n))
    for j in range(n):
        col = w[:, j].sum()
        if col > 0:
            m[:, j] = w[:, j] / col
    c = sn.cpu_remaining / sn.cpu_remaining.sum()
    return np.linalg.solve(np.eye(n) - damping * m, (1 - damping) * c)


def noderank_inputs_naive(sn):
    n = sn.node_count
    bw_sum = np.zeros(n)
    for lid, (a, b) in enumerate(sn.link_endpoints.tolist()):
        bw_sum[a] += sn.bw_remaining[lid]
        bw_sum[b] += sn.bw_remaining[lid]
    h = sn.cpu_remaining * bw_sum
    h = h / h.sum()
    p = np.zeros((n, n))
    for i in range(n):
        nbrs = [b if a == i else a for a, b in sn.link_endpoints.tolist() if i in (a, b)]
        tot = sum(h[j] for j in nbrs)
        for j in nbrs:
            if tot > 0:
                p[i, j] = h[j] / tot
    return h, p


def dense_noderank(sn, jump):
    h, p = noderank_inputs_naive(sn)
    n = sn.node_count
    return np.linalg.solve(np.eye(n) - (1 - jump) * p.T, jump * h)


def iterated_noderank(sn, jump, tol=1e-10):
    h, p = noderank_inputs_naive(sn)
    r = np.full(sn.node_count, 1.0 / sn.node_count)
    for _ in range(100000):
        nxt = jump * h + (1 - jump) * p.T @ r
        if np.max(np.abs(nxt - r)) < tol:
            return nxt
        r = nxt
    return r
