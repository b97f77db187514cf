import csv
import json

import pytest
import yaml

from isovne import cli, simulator
from isovne.drl import initial_parameters
from isovne.embedding import Violation

DESK = {
    "seed": 3,
    "substrate": {"node_count": 20, "link_probability": 0.25},
    "workload": {"vnr_count": 120},
    "split": {"train_count": 60, "test_count": 60},
    "training": {"epoch_count": 2, "batch_size": 16},
    "mcts": {"budget": 5},
}


@pytest.fixture
def desk(tmp_path):
    path = tmp_path / "desk.yaml"
    path.write_text(yaml.safe_dump(DESK))
    out = tmp_path / "out"
    assert cli.main(["gen-substrate", "--config", str(path), "--out-dir", str(out)]) == 0
    assert cli.main(["gen-workload", "--config", str(path), "--out-dir", str(out)]) == 0
    return path, out


def inputs(out):
    return ["--substrate", str(out / "substrate.json"), "--workload", str(out / "workload.json")]


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def test_default_config_gives_hundred_nodes(tmp_path):
    assert cli.main(["gen-substrate", "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "substrate.json").read_text())
    assert len(doc["nodes"]) == 100
    assert doc["provenance"]["version"] and doc["provenance"]["seed"] == 0


def test_missing_required_key_exits_two(tmp_path, capsys):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"substrate": {"node_count": 10}}))
    assert cli.main(["gen-substrate", "--config", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "seed" in capsys.readouterr().err


@pytest.mark.parametrize(
    "raw,key",
    [
        ({"seed": 0, "substrate": {"nodes": 3}}, "substrate.nodes"),
        ({"seed": 0, "substrate": {"link_probability": 1.5}}, "substrate.link_probability"),
        ({"seed": 0, "workload": {"cpu_demand_range": [9, 2]}}, "workload.cpu_demand_range"),
        ({"seed": 0, "training": {"batch_size": "big"}}, "training.batch_size"),
    ],
)
def test_invalid_config_names_key(tmp_path, capsys, raw, key):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(raw))
    assert cli.main(["gen-workload", "--config", str(path), "--out-dir", str(tmp_path)]) == 2
    assert key in capsys.readouterr().err


def test_regeneration_is_byte_identical(desk, tmp_path):
    path, out = desk
    again = tmp_path / "again"
    cli.main(["gen-substrate", "--config", str(path), "--out-dir", str(again)])
    cli.main(["gen-workload", "--config", str(path), "--out-dir", str(again)])
    for name in ("substrate.json", "workload.json"):
        assert (out / name).read_bytes() == (again / name).read_bytes()


def test_seed_flag_overrides(desk, tmp_path):
    path, out = desk
    cli.main(["gen-substrate", "--config", str(path), "--seed", "4", "--out-dir", str(tmp_path / "s4")])
    assert (tmp_path / "s4" / "substrate.json").read_bytes() != (out / "substrate.json").read_bytes()


def test_train_with_zero_epochs_saves_initialization(desk, tmp_path):
    path, out = desk
    raw = {**DESK, "training": {"epoch_count": 0}}
    zero = tmp_path / "zero.yaml"
    zero.write_text(yaml.safe_dump(raw))
    assert cli.main(["train", "--config", str(zero), "--out-dir", str(out)] + inputs(out)) == 0
    model = json.loads((out / "model.json").read_text())
    assert model["kernel"] == initial_parameters(3).to_dict()["kernel"]
    assert rows(out / "loss.csv") == []


def test_train_loss_rows_match_epochs(desk):
    path, out = desk
    assert cli.main(["train", "--config", str(path), "--out-dir", str(out)] + inputs(out)) == 0
    assert [r["epoch"] for r in rows(out / "loss.csv")] == ["1", "2"]


def test_drl_without_model_exits_two(desk, capsys):
    path, out = desk
    code = cli.main(["run", "--config", str(path), "--out-dir", str(out), "--algorithm", "drl"] + inputs(out))
    assert code == 2
    assert "model" in capsys.readouterr().err


def test_compare_all_four(desk):
    path, out = desk
    cli.main(["train", "--config", str(path), "--out-dir", str(out)] + inputs(out))
    args = ["compare", "--config", str(path), "--out-dir", str(out), "--model", str(out / "model.json")] + inputs(out)
    assert cli.main(args) == 0
    summary = rows(out / "summary.csv")
    assert [r["algorithm"] for r in summary] == ["drl", "noderank", "grc", "mcts"]
    assert all(0 <= float(r["acr"]) <= 1 for r in summary)
    assert all(int(r["arrived"]) == 60 for r in summary)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert cli.main(args) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first
    header = (out / "grc_metrics.csv").read_text().splitlines()[0]
    assert json.loads(header.split(": ", 1)[1])["config"]["seed"] == 3


def test_duplicate_algorithms_get_distinct_labels(desk):
    path, out = desk
    args = ["compare", "--config", str(path), "--out-dir", str(out), "--algorithms", "grc", "grc"] + inputs(out)
    assert cli.main(args) == 0
    summary = rows(out / "summary.csv")
    assert [r["algorithm"] for r in summary] == ["grc", "grc_2"]
    assert summary[0]["acr"] == summary[1]["acr"]


def test_output_dir_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("ISOVNE_OUTPUT_DIR", str(tmp_path / "env"))
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"seed": 1, "workload": {"vnr_count": 5}}))
    assert cli.main(["gen-workload", "--config", str(path)]) == 0
    assert (tmp_path / "env" / "workload.json").exists()


def test_verifier_failure_exits_three(desk, monkeypatch):
    path, out = desk
    monkeypatch.setattr(simulator, "verify_report", lambda *a, **k: [Violation("E8", "forced")])
    code = cli.main(["run", "--config", str(path), "--out-dir", str(out), "--algorithm", "grc"] + inputs(out))
    assert code == 3


def test_schema_mismatch_exits_two(desk):
    path, out = desk
    doc = json.loads((out / "workload.json").read_text())
    doc["schema_version"] = 42
    (out / "workload.json").write_text(json.dumps(doc))
    assert cli.main(["run", "--config", str(path), "--out-dir", str(out), "--algorithm", "grc"] + inputs(out)) == 2
    (out / "workload.json").write_text("not json")
    assert cli.main(["run", "--config", str(path), "--out-dir", str(out), "--algorithm", "grc"] + inputs(out)) == 2


def test_missing_input_file_exits_two(tmp_path):
    args = ["run", "--algorithm", "grc", "--substrate", str(tmp_path / "no.json"), "--workload", str(tmp_path / "no.json")]
    assert cli.main(args) == 2
