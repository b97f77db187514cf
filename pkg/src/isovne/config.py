"""Experiment configuration: nested dataclasses loaded from YAML with strict key checking."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import yaml

from .algorithms import ALGORITHMS
from .drl import TrainingConfig
from .embedding import IsolationMode
from .metrics import PricingConfig
from .topology import ConfigError


@dataclass
class SubstrateParams:
    node_count: int = 100
    link_probability: float = 0.1
    cpu_range: list = field(default_factory=lambda: [50, 100])
    bw_range: list = field(default_factory=lambda: [50, 100])
    isa_range: list = field(default_factory=lambda: [1, 3])
    seed: int | None = None


@dataclass
class WorkloadParams:
    vnr_count: int = 2000
    arrival_rate: float = 0.05
    mean_lifetime: float = 500.0
    node_count_range: list = field(default_factory=lambda: [2, 10])
    cpu_demand_range: list = field(default_factory=lambda: [0, 50])
    bw_demand_range: list = field(default_factory=lambda: [0, 50])
    isr_range: list = field(default_factory=lambda: [1, 3])
    vnr_link_probability: float = 0.5
    seed: int | None = None


@dataclass
class SplitParams:
    train_count: int = 1000
    test_count: int = 1000


@dataclass
class TrainingParams:
    learning_rate: float = 0.001
    discount: float = 0.998
    batch_size: int = 64
    epoch_count: int = 100
    seed: int | None = None


@dataclass
class PricingParams:
    alpha: float = 1.0
    beta: float = 1.0


@dataclass
class SimulationParams:
    sample_interval: float = 100.0
    verify: bool = True


@dataclass
class GrcParams:
    damping: float = 0.85
    tolerance: float = 1e-6
    max_iter: int = 500


@dataclass
class NodeRankParams:
    jump_probability: float = 0.15
    tolerance: float = 1e-6
    max_iter: int = 500


@dataclass
class MctsParams:
    budget: int = 100
    uct_constant: float = 0.5
    seed: int | None = None


@dataclass
class ExperimentConfig:
    seed: int = 0
    output_dir: str | None = None
    isolation_mode: str = "basic"
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    substrate: SubstrateParams = field(default_factory=SubstrateParams)
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    split: SplitParams = field(default_factory=SplitParams)
    training: TrainingParams = field(default_factory=TrainingParams)
    pricing: PricingParams = field(default_factory=PricingParams)
    simulation: SimulationParams = field(default_factory=SimulationParams)
    grc: GrcParams = field(default_factory=GrcParams)
    noderank: NodeRankParams = field(default_factory=NodeRankParams)
    mcts: MctsParams = field(default_factory=MctsParams)

    REQUIRED = ("seed",)

    # ----------------------------------------------------------------- derived views

    @property
    def mode(self) -> IsolationMode:
        return IsolationMode(self.isolation_mode)

    def substrate_seed(self) -> int:
        return self.seed if self.substrate.seed is None else self.substrate.seed

    def workload_seed(self) -> int:
        return self.seed if self.workload.seed is None else self.workload.seed

    def training_config(self) -> TrainingConfig:
        t = self.training
        seed = self.seed if t.seed is None else t.seed
        return TrainingConfig(t.learning_rate, t.discount, t.batch_size, t.epoch_count, seed)

    def pricing_config(self) -> PricingConfig:
        return PricingConfig(self.pricing.alpha, self.pricing.beta)

    def algorithm_params(self, name: str) -> dict:
        if name == "drl":
            return {}
        params = dataclasses.asdict(getattr(self, name))
        if name == "mcts" and params["seed"] is None:
            params["seed"] = self.seed
        return params

    def override_seed(self, seed: int) -> None:
        """``--seed``: replace the top-level seed and every component seed."""
        self.seed = seed
        self.substrate.seed = seed
        self.workload.seed = seed
        self.training.seed = seed
        self.mcts.seed = seed

    def resolved(self) -> dict:
        """Full config with every seed made explicit."""
        d = dataclasses.asdict(self)
        d["substrate"]["seed"] = self.substrate_seed()
        d["workload"]["seed"] = self.workload_seed()
        d["training"]["seed"] = self.training_config().seed
        d["mcts"]["seed"] = self.algorithm_params("mcts")["seed"]
        return d

    # ----------------------------------------------------------------- loading

    @classmethod
    def from_dict(cls, raw: dict, require: bool = True) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a mapping")
        if require:
            for key in cls.REQUIRED:
                if key not in raw:
                    raise ConfigError(f"{key}: required key missing")
        cfg = _build(cls, raw, "")
        cfg.validate()
        return cfg

    def validate(self) -> None:
        _check(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        _check(self.isolation_mode in {m.value for m in IsolationMode}, "isolation_mode", "must be basic or strict")
        _check(
            isinstance(self.algorithms, list) and self.algorithms and all(a in ALGORITHMS for a in self.algorithms),
            "algorithms",
            f"must be a non-empty list drawn from {list(ALGORITHMS)}",
        )
        s, w = self.substrate, self.workload
        _check(s.node_count >= 2, "substrate.node_count", "must be >= 2")
        _check(0 < s.link_probability <= 1, "substrate.link_probability", "must lie in (0, 1]")
        for name in ("cpu_range", "bw_range", "isa_range"):
            _range(getattr(s, name), f"substrate.{name}", 0)
        _check(w.vnr_count >= 1, "workload.vnr_count", "must be >= 1")
        _check(w.arrival_rate > 0, "workload.arrival_rate", "must be > 0")
        _check(w.mean_lifetime > 0, "workload.mean_lifetime", "must be > 0")
        _check(0 <= w.vnr_link_probability <= 1, "workload.vnr_link_probability", "must lie in [0, 1]")
        _range(w.node_count_range, "workload.node_count_range", 1)
        for name in ("cpu_demand_range", "bw_demand_range", "isr_range"):
            _range(getattr(w, name), f"workload.{name}", 0)
        _check(self.split.train_count >= 0, "split.train_count", "must be >= 0")
        _check(self.split.test_count >= 1, "split.test_count", "must be >= 1")
        t = self.training
        _check(t.learning_rate > 0, "training.learning_rate", "must be > 0")
        _check(0 < t.discount <= 1, "training.discount", "must lie in (0, 1]")
        _check(t.batch_size >= 1, "training.batch_size", "must be >= 1")
        _check(t.epoch_count >= 0, "training.epoch_count", "must be >= 0")
        _check(self.pricing.alpha > 0, "pricing.alpha", "must be > 0")
        _check(self.pricing.beta > 0, "pricing.beta", "must be > 0")
        _check(self.simulation.sample_interval > 0, "simulation.sample_interval", "must be > 0")
        _check(0 < self.grc.damping < 1, "grc.damping", "must lie in (0, 1)")
        _check(0 < self.noderank.jump_probability < 1, "noderank.jump_probability", "must lie in (0, 1)")
        for sec in ("grc", "noderank"):
            _check(getattr(self, sec).tolerance > 0, f"{sec}.tolerance", "must be > 0")
            _check(getattr(self, sec).max_iter >= 1, f"{sec}.max_iter", "must be >= 1")
        _check(self.mcts.budget >= 1, "mcts.budget", "must be >= 1")
        _check(self.mcts.uct_constant >= 0, "mcts.uct_constant", "must be >= 0")
        for key, val in (
            ("substrate.seed", s.seed),
            ("workload.seed", w.seed),
            ("training.seed", t.seed),
            ("mcts.seed", self.mcts.seed),
        ):
            _check(val is None or (isinstance(val, int) and val >= 0), key, "must be a non-negative integer")


def _check(ok: bool, key: str, msg: str) -> None:
    if not ok:
        raise ConfigError(f"{key}: {msg}")


def _range(value, key: str, floor: int) -> None:
    ok = isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(x, int) for x in value)
    _check(ok, key, "must be a [lo, hi] integer pair")
    _check(value[0] <= value[1], key, f"empty range {list(value)}")
    _check(value[0] >= floor, key, f"lower bound must be >= {floor}")


def _coerce(value: Any, typ, key: str):
    # YAML gives ints where floats are expected; accept those, reject the rest
    if typ == "float" or typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if typ == "int" or typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if typ == "bool" or typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    return value


def _build(cls, raw: dict, prefix: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in fields:
            raise ConfigError(f"{prefix}{key}: unknown key")
    kwargs = {}
    for name, f in fields.items():
        if name not in raw:
            continue
        value = raw[name]
        key = prefix + name
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a mapping")
            kwargs[name] = _build(type(default), value, key + ".")
        elif value is None:
            kwargs[name] = None
        else:
            kwargs[name] = _coerce(value, f.type.split(" |")[0] if isinstance(f.type, str) else f.type, key)
    return cls(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: not valid YAML ({exc})") from exc
    return ExperimentConfig.from_dict(raw if raw is not None else {})


def default_config() -> ExperimentConfig:
    return ExperimentConfig()

