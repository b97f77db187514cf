"""Policy-gradient node placement agent.

The policy scores every substrate node with a shared linear kernel over three
normalized features (remaining CPU, degree, adjacent bandwidth), applies a
softmax restricted to feasible nodes, and either samples (training) or takes
the argmax (evaluation). Links are mapped afterwards with BFS.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import Embedding, IsolationMode, commit, feasible_mask, map_links, release
from .metrics import PricingConfig, request_lrc
from .topology import SubstrateNetwork, VirtualNetworkRequest, adjacent_bw_sums, degrees

FEATURES = ("cpu_remaining", "degree", "sum_adjacent_bw")

_INIT_STREAM = 0x11
_ACTION_STREAM = 0x22


@dataclass
class PolicyParameters:
    kernel: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        self.kernel = np.asarray(self.kernel, dtype=float).reshape(3)
        self.bias = float(self.bias)

    def copy(self) -> "PolicyParameters":
        return PolicyParameters(self.kernel.copy(), self.bias)

    def to_dict(self) -> dict:
        return {"kernel": [float(x) for x in self.kernel], "bias": self.bias}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyParameters":
        kernel = d["kernel"]
        if len(kernel) != 3:
            raise ValueError("kernel must have 3 entries")
        p = cls(np.array(kernel, dtype=float), float(d["bias"]))
        if not (np.all(np.isfinite(p.kernel)) and math.isfinite(p.bias)):
            raise ValueError("policy parameters must be finite")
        return p


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.001
    discount: float = 0.998
    batch_size: int = 64
    epoch_count: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must lie in (0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epoch_count < 0:
            raise ValueError("epoch_count must be >= 0")


@dataclass
class TrainingResult:
    params: PolicyParameters
    initial: PolicyParameters
    losses: list[float] = field(default_factory=list)
    acceptance: list[float] = field(default_factory=list)
    updates: int = 0


def initial_parameters(seed: int) -> PolicyParameters:
    # Xavier normal for a 3-in / 1-out kernel; bias starts at zero
    rng = np.random.default_rng([int(seed), _INIT_STREAM])
    return PolicyParameters(rng.normal(0.0, math.sqrt(2.0 / (3 + 1)), size=3), 0.0)


# --------------------------------------------------------------------------- features and policy


def _normalize_columns(raw: np.ndarray) -> np.ndarray:
    top = raw.max(axis=0)
    safe = np.where(top > 0, top, 1.0)
    return np.where(top > 0, raw / safe, 0.0)


def raw_features(sn: SubstrateNetwork) -> np.ndarray:
    return np.column_stack([sn.cpu_remaining, degrees(sn), adjacent_bw_sums(sn)]).astype(float)


def extract_features(sn: SubstrateNetwork) -> np.ndarray:
    """Feature matrix, one row per substrate node, each column scaled by its max."""
    if sn.node_count == 0:
        raise ValueError("empty substrate")
    return _normalize_columns(raw_features(sn))


def _as_mask(feasible, n: int) -> np.ndarray:
    if isinstance(feasible, np.ndarray) and feasible.dtype == bool:
        return feasible
    mask = np.zeros(n, dtype=bool)
    mask[list(feasible)] = True
    return mask


class EmptyFeasibleSet(ValueError):
    pass


def forward(params: PolicyParameters, m: np.ndarray, feasible) -> np.ndarray:
    """Masked softmax over per-node logits; infeasible nodes get exactly 0."""
    mask = _as_mask(feasible, len(m))
    if not mask.any():
        raise EmptyFeasibleSet("no feasible substrate node")
    z = m @ params.kernel + params.bias
    zf = z[mask]
    e = np.exp(zf - zf.max())
    p = np.zeros(len(m))
    p[mask] = e / e.sum()
    return p


def log_prob(params: PolicyParameters, m: np.ndarray, feasible, action: int) -> float:
    mask = _as_mask(feasible, len(m))
    z = m @ params.kernel + params.bias
    zf = z[mask]
    top = zf.max()
    return float(z[action] - top - math.log(np.exp(zf - top).sum()))


def grad_log_prob(params: PolicyParameters, m: np.ndarray, feasible, action: int) -> tuple[np.ndarray, float]:
    """Analytic gradient of log P(action) w.r.t. (kernel, bias)."""
    p = forward(params, m, feasible)
    return m[action] - p @ m, 1.0 - float(p.sum())


def sample_action(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    cum = np.cumsum(probabilities)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(i, int(np.flatnonzero(probabilities)[-1]))


def greedy_action(probabilities: np.ndarray) -> int:
    return int(np.argmax(probabilities))


# --------------------------------------------------------------------------- placement


@dataclass
class _Step:
    grad: np.ndarray
    log_p: float


def place_nodes(sn, vnr, params, mode, choose) -> tuple[dict[int, int] | None, list[_Step]]:
    """Node stage: one policy decision per virtual node in placement order.

    The CPU feature reflects hosts already picked for this request.
    """
    raw = raw_features(sn)
    node_map: dict[int, int] = {}
    steps: list[_Step] = []
    for v in vnr.placement_order():
        vn = vnr.nodes[v]
        mask = feasible_mask(sn, vn, set(node_map.values()), mode)
        if not mask.any():
            return None, steps
        m = _normalize_columns(raw)
        p = forward(params, m, mask)
        a = choose(p)
        steps.append(_Step(m[a] - p @ m, math.log(p[a])))
        node_map[v] = a
        raw[a, 0] -= vn.cpu_demand
    return node_map, steps


def drl_embedder(params: PolicyParameters, mode: IsolationMode = IsolationMode.BASIC):
    """Greedy (evaluation-time) embedder."""

    def embed(sn: SubstrateNetwork, vnr: VirtualNetworkRequest) -> Embedding | None:
        node_map, _ = place_nodes(sn, vnr, params, mode, greedy_action)
        if node_map is None:
            return None
        link_map = map_links(sn, vnr, node_map)
        if link_map is None:
            return None
        return Embedding(vnr.id, node_map, link_map, request=vnr)

    return embed


# --------------------------------------------------------------------------- training


def train(
    sn: SubstrateNetwork,
    workload,
    cfg: TrainingConfig = TrainingConfig(),
    pricing: PricingConfig = PricingConfig(),
    mode: IsolationMode = IsolationMode.BASIC,
    init: PolicyParameters | None = None,
) -> TrainingResult:
    """REINFORCE over the training timeline.

    Every epoch starts from a full-capacity copy of ``sn`` and replays all
    arrivals and departures. A successful request with reward R (its own
    revenue/cost ratio) adds discount**(T-1-t) * R * grad log P(a_t) for each
    of its T placement steps to the running gradient; rejected requests add
    nothing. Parameters move up the accumulated gradient every
    ``batch_size`` successes and at the end of each epoch.
    """
    from .simulator import Timeline

    params = init.copy() if init is not None else initial_parameters(cfg.seed)
    result = TrainingResult(params=params, initial=params.copy())
    rng = np.random.default_rng([int(cfg.seed), _ACTION_STREAM])
    choose = lambda p: sample_action(p, rng)  # noqa: E731

    for _ in range(cfg.epoch_count):
        live = sn.fresh()
        active: dict[int, Embedding] = {}
        grad = np.zeros(3)
        grad_bias = 0.0
        pending = 0
        loss_terms: list[float] = []
        arrived = accepted = 0
        timeline = Timeline(workload)
        for ev in timeline:
            if ev.is_departure:
                release(live, active.pop(ev.vnr_id))
                continue
            vnr = timeline.request(ev.vnr_id)
            arrived += 1
            node_map, steps = place_nodes(live, vnr, params, mode, choose)
            if node_map is None:
                continue  # gradients of this request are dropped
            link_map = map_links(live, vnr, node_map)
            if link_map is None:
                continue
            emb = Embedding(vnr.id, node_map, link_map, request=vnr)
            reward = request_lrc(vnr, emb, pricing)
            last = len(steps) - 1
            for t, st in enumerate(steps):
                w = cfg.discount ** (last - t) * reward
                grad += w * st.grad
                loss_terms.append(-w * st.log_p)
            commit(live, emb, vnr, mode)
            active[vnr.id] = emb
            timeline.depart_later(vnr)
            accepted += 1
            pending += 1
            if pending == cfg.batch_size:
                _apply(params, grad, grad_bias, cfg.learning_rate)
                result.updates += 1
                grad[:] = 0.0
                pending = 0
        if pending:
            _apply(params, grad, grad_bias, cfg.learning_rate)
            result.updates += 1
        result.losses.append(float(np.mean(loss_terms)) if loss_terms else 0.0)
        result.acceptance.append(accepted / arrived if arrived else 0.0)
    return result


def _apply(params: PolicyParameters, grad: np.ndarray, grad_bias: float, lr: float) -> None:
    # ascent on expected reward
    params.kernel += lr * grad
    params.bias += lr * grad_bias


def evaluate(
    sn: SubstrateNetwork,
    workload,
    params: PolicyParameters,
    pricing: PricingConfig = PricingConfig(),
    mode: IsolationMode = IsolationMode.BASIC,
    sample_interval: float = 100.0,
):
    from .simulator import run

    return run(sn, workload, drl_embedder(params, mode), pricing, mode, sample_interval, name="drl")
