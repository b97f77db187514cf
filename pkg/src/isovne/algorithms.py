"""Algorithm selection: maps a name plus parameters to an embedder callable."""
from __future__ import annotations

from dataclasses import dataclass, field

from .drl import PolicyParameters, drl_embedder
from .embedding import IsolationMode
from .heuristics import grc_embedder, noderank_embedder
from .mcts import mcts_embedder
from .metrics import PricingConfig

ALGORITHMS = ("drl", "noderank", "grc", "mcts")

DEFAULT_PARAMS = {
    "drl": {},
    "grc": {"damping": 0.85, "tolerance": 1e-6, "max_iter": 500},
    "noderank": {"jump_probability": 0.15, "tolerance": 1e-6, "max_iter": 500},
    "mcts": {"budget": 100, "uct_constant": 0.5, "seed": 0},
}


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict, hash=False)
    policy: PolicyParameters | None = field(default=None, hash=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}; choose from {ALGORITHMS}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.name])
        if unknown:
            raise ValueError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        if self.name == "drl" and self.policy is None:
            raise ValueError("drl needs trained policy parameters")
        if not self.label:
            object.__setattr__(self, "label", self.name)

    def resolved_params(self) -> dict:
        return {**DEFAULT_PARAMS[self.name], **self.params}


def make_embedder(spec: AlgorithmSpec, pricing: PricingConfig = PricingConfig(), mode=IsolationMode.BASIC):
    p = spec.resolved_params()
    if spec.name == "drl":
        return drl_embedder(spec.policy, mode)
    if spec.name == "grc":
        return grc_embedder(p["damping"], p["tolerance"], p["max_iter"], mode)
    if spec.name == "noderank":
        return noderank_embedder(p["jump_probability"], p["tolerance"], p["max_iter"], mode)
    return mcts_embedder(p["budget"], p["uct_constant"], p["seed"], mode, pricing)
