"""UCT search over sequential node placements, one search per virtual node."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .embedding import Embedding, IsolationMode, feasible_mask, map_links
from .metrics import PricingConfig, request_lrc
from .topology import SubstrateNetwork, VirtualNetworkRequest


@dataclass(frozen=True)
class PlacementState:
    """Hosts chosen so far for the first ``index`` virtual nodes in placement order."""

    vnr: VirtualNetworkRequest
    hosts: tuple[int, ...]

    @property
    def index(self) -> int:
        return len(self.hosts)

    @property
    def complete(self) -> bool:
        return len(self.hosts) == len(self.vnr.nodes)


class SearchNode:
    __slots__ = ("state", "visits", "value", "children", "untried", "terminal")

    def __init__(self, state: PlacementState, actions: list[int]):
        self.state = state
        self.visits = 0
        self.value = 0.0
        self.children: dict[int, SearchNode] = {}
        self.untried = list(actions)
        self.terminal = state.complete or not actions

    def best_child(self, c: float) -> "SearchNode":
        log_n = math.log(self.visits)
        best, best_a, best_score = None, -1, -math.inf
        for a, ch in self.children.items():
            score = ch.value / ch.visits + c * math.sqrt(log_n / ch.visits)
            if score > best_score or (score == best_score and a < best_a):
                best, best_a, best_score = ch, a, score
        return best


class _Problem:
    """Per-request search context: feasible hosts per virtual node and a reward cache."""

    def __init__(self, sn, vnr, pricing, mode):
        self.sn = sn
        self.vnr = vnr
        self.pricing = pricing
        self.order = vnr.placement_order()
        self.candidates = [
            np.flatnonzero(feasible_mask(sn, vnr.nodes[v], (), mode)).tolist() for v in self.order
        ]
        self._rewards: dict[tuple[int, ...], float] = {}

    def actions(self, hosts: tuple[int, ...]) -> list[int]:
        if len(hosts) == len(self.order):
            return []
        used = set(hosts)
        return [s for s in self.candidates[len(hosts)] if s not in used]

    def node_map(self, hosts) -> dict[int, int]:
        return {v: s for v, s in zip(self.order, hosts)}

    def reward(self, hosts: tuple[int, ...]) -> float:
        r = self._rewards.get(hosts)
        if r is None:
            nm = self.node_map(hosts)
            lm = map_links(self.sn, self.vnr, nm)
            if lm is None:
                r = 0.0
            else:
                r = request_lrc(self.vnr, Embedding(self.vnr.id, nm, lm), self.pricing)
            self._rewards[hosts] = r
        return r

    def rollout(self, hosts: tuple[int, ...], rng: random.Random) -> float:
        hosts = tuple(hosts)
        while len(hosts) < len(self.order):
            acts = self.actions(hosts)
            if not acts:
                return 0.0
            hosts = hosts + (acts[rng.randrange(len(acts))],)
        return self.reward(hosts)


def search(problem: _Problem, prefix: tuple[int, ...], budget: int, c: float, rng: random.Random) -> SearchNode:
    """Run ``budget`` UCT iterations below ``prefix``; returns the root."""
    root = SearchNode(PlacementState(problem.vnr, prefix), problem.actions(prefix))
    for _ in range(budget):
        node = root
        path = [root]
        while not node.terminal and not node.untried:
            node = node.best_child(c)
            path.append(node)
        if not node.terminal:
            a = node.untried.pop(rng.randrange(len(node.untried)))
            hosts = node.state.hosts + (a,)
            child = SearchNode(PlacementState(problem.vnr, hosts), problem.actions(hosts))
            node.children[a] = child
            node = child
            path.append(node)
        reward = problem.rollout(node.state.hosts, rng)
        for n in path:
            n.visits += 1
            n.value += reward
    return root


def most_visited(root: SearchNode) -> int | None:
    if not root.children:
        return None
    return min(root.children, key=lambda a: (-root.children[a].visits, a))


def mcts_embed(
    sn: SubstrateNetwork,
    vnr: VirtualNetworkRequest,
    budget: int = 100,
    uct_constant: float = 0.5,
    rollout_seed: int = 0,
    mode: IsolationMode = IsolationMode.BASIC,
    pricing: PricingConfig = PricingConfig(),
) -> Embedding | None:
    """Place virtual nodes one at a time, each decided by its own UCT search.

    Searches read the substrate but never modify it. Returns None on rejection.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = random.Random(rollout_seed)
    problem = _Problem(sn, vnr, pricing, mode)
    hosts: tuple[int, ...] = ()
    for _ in problem.order:
        root = search(problem, hosts, budget, uct_constant, rng)
        a = most_visited(root)
        if a is None:
            return None
        hosts = hosts + (a,)
    node_map = problem.node_map(hosts)
    link_map = map_links(sn, vnr, node_map)
    if link_map is None:
        return None
    return Embedding(vnr.id, node_map, link_map, request=vnr)


def mcts_embedder(budget: int = 100, uct_constant: float = 0.5, seed: int = 0, mode=IsolationMode.BASIC, pricing=PricingConfig()):
    def embed(sn: SubstrateNetwork, vnr: VirtualNetworkRequest) -> Embedding | None:
        # per-request stream so results do not depend on earlier rejections
        return mcts_embed(sn, vnr, budget, uct_constant, seed * 1_000_003 + vnr.id, mode, pricing)

    return embed
