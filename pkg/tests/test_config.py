import pytest

from isovne.config import ExperimentConfig, default_config, load_config
from isovne.embedding import IsolationMode
from isovne.topology import ConfigError


def test_defaults_match_evaluation_settings():
    cfg = default_config()
    assert cfg.substrate.node_count == 100
    assert cfg.workload.vnr_count == 2000
    assert (cfg.split.train_count, cfg.split.test_count) == (1000, 1000)
    tc = cfg.training_config()
    assert (tc.learning_rate, tc.discount, tc.batch_size, tc.epoch_count) == (0.001, 0.998, 64, 100)
    assert cfg.mode is IsolationMode.BASIC


def test_component_seeds_fall_back_to_top_level():
    cfg = ExperimentConfig.from_dict({"seed": 7, "workload": {"seed": 2}})
    assert cfg.substrate_seed() == 7
    assert cfg.workload_seed() == 2
    assert cfg.resolved()["mcts"]["seed"] == 7
    cfg.override_seed(9)
    assert (cfg.substrate_seed(), cfg.workload_seed(), cfg.training_config().seed) == (9, 9, 9)


def test_ints_accepted_for_floats_but_not_strings():
    cfg = ExperimentConfig.from_dict({"seed": 0, "workload": {"mean_lifetime": 400}})
    assert cfg.workload.mean_lifetime == 400.0
    with pytest.raises(ConfigError, match="workload.arrival_rate"):
        ExperimentConfig.from_dict({"seed": 0, "workload": {"arrival_rate": "fast"}})


@pytest.mark.parametrize(
    "raw,key",
    [
        ({}, "seed"),
        ({"seed": -1}, "seed"),
        ({"seed": 0, "isolation_mode": "loose"}, "isolation_mode"),
        ({"seed": 0, "algorithms": ["grc", "bogus"]}, "algorithms"),
        ({"seed": 0, "grc": {"damping": 1.0}}, "grc.damping"),
        ({"seed": 0, "mcts": {"budget": 0}}, "mcts.budget"),
        ({"seed": 0, "pricing": 3}, "pricing"),
    ],
)
def test_bad_values_name_the_key(raw, key):
    with pytest.raises(ConfigError, match=key):
        ExperimentConfig.from_dict(raw)


def test_shipped_configs_load():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    for path in sorted(root.glob("*.yaml")):
        load_config(path)
