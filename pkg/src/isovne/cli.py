"""Command-line front end: ``isovne {gen-substrate,gen-workload,train,run,compare}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .algorithms import ALGORITHMS, AlgorithmSpec
from .config import ExperimentConfig, default_config, load_config
from .drl import PolicyParameters, train
from .simulator import InvariantViolation, compare, metrics_csv, run, summary_csv, trace_jsonl
from .topology import (
    SCHEMA_VERSION,
    ConfigError,
    SchemaError,
    dump_json,
    generate_substrate,
    generate_workload,
    load_substrate,
    load_workload,
    substrate_document,
    workload_document,
)

log = logging.getLogger("isovne")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 2, 3


class UsageError(Exception):
    pass


def provenance(cfg: ExperimentConfig, **extra) -> dict:
    return {"tool": "isovne", "version": __version__, "config": cfg.resolved(), **extra}


def fingerprint(path) -> dict | None:
    """Input file identity for provenance: name and content hash, independent of location."""
    if not path:
        return None
    p = Path(path)
    return {"name": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)
    return path


def _output_dir(args, cfg: ExperimentConfig) -> Path:
    chosen = args.out_dir or cfg.output_dir or os.environ.get("ISOVNE_OUTPUT_DIR") or "."
    return Path(chosen)


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed: must be a non-negative integer")
        cfg.override_seed(args.seed)
    return cfg


def _inputs(args):
    try:
        return load_substrate(args.substrate), load_workload(args.workload)
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read input: {exc.filename}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"input is not valid JSON: {exc}") from exc


def _input_provenance(args) -> dict:
    return {"substrate": fingerprint(args.substrate), "workload": fingerprint(args.workload)}


def _test_split(workload, cfg: ExperimentConfig):
    n = cfg.split.test_count
    return workload[-n:] if len(workload) > n else list(workload)


def _load_model(path) -> PolicyParameters:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read model file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON: {exc}") from exc
    if doc.get("schema_version") != SCHEMA_VERSION or doc.get("kind", "model") != "model":
        raise SchemaError("model file: unsupported schema")
    try:
        return PolicyParameters.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"model file: {exc}") from exc


def model_document(params: PolicyParameters, prov: dict | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "model", **params.to_dict()}
    if prov is not None:
        doc["provenance"] = prov
    return doc


# --------------------------------------------------------------------------- subcommands


def cmd_gen_substrate(args) -> int:
    cfg = _config(args)
    s = cfg.substrate
    sn = generate_substrate(
        s.node_count, s.link_probability, s.cpu_range, s.bw_range, s.isa_range, cfg.substrate_seed()
    )
    prov = provenance(cfg, seed=cfg.substrate_seed(), parameters=cfg.resolved()["substrate"])
    out = Path(args.out) if args.out else _output_dir(args, cfg) / "substrate.json"
    _write(out, dump_json(substrate_document(sn, prov)))
    return EXIT_OK


def cmd_gen_workload(args) -> int:
    cfg = _config(args)
    w = cfg.workload
    vnrs = generate_workload(
        w.vnr_count,
        w.arrival_rate,
        w.mean_lifetime,
        w.node_count_range,
        w.cpu_demand_range,
        w.bw_demand_range,
        w.isr_range,
        w.vnr_link_probability,
        cfg.workload_seed(),
    )
    prov = provenance(cfg, seed=cfg.workload_seed(), parameters=cfg.resolved()["workload"])
    out = Path(args.out) if args.out else _output_dir(args, cfg) / "workload.json"
    _write(out, dump_json(workload_document(vnrs, prov)))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    sn, workload = _inputs(args)
    tc = cfg.training_config()
    training_set = workload[: cfg.split.train_count]
    log.info("training on %d VNRs for %d epochs", len(training_set), tc.epoch_count)
    result = train(sn, training_set, tc, cfg.pricing_config(), cfg.mode)
    outdir = _output_dir(args, cfg)
    prov = provenance(cfg, training_vnrs=len(training_set), **_input_provenance(args))
    _write(Path(args.model) if args.model else outdir / "model.json", dump_json(model_document(result.params, prov)))
    rows = [{"epoch": i + 1, "loss": l, "train_acr": a} for i, (l, a) in enumerate(zip(result.losses, result.acceptance))]
    _write(outdir / "loss.csv", metrics_csv(rows, prov, ("epoch", "loss", "train_acr")))
    return EXIT_OK


def _specs(cfg: ExperimentConfig, names, model_path) -> list[AlgorithmSpec]:
    specs = []
    policy = None
    for name in names:
        if name == "drl":
            if not model_path:
                raise UsageError("drl: --model is required")
            policy = policy or _load_model(model_path)
            specs.append(AlgorithmSpec("drl", policy=policy))
        else:
            specs.append(AlgorithmSpec(name, cfg.algorithm_params(name)))
    return specs


def _export(outdir: Path, results, prov: dict, include_timing: bool) -> None:
    for r in results:
        _write(outdir / f"{r.algorithm}_metrics.csv", metrics_csv(r.samples, prov))
        _write(outdir / f"{r.algorithm}_by_vnr.csv", metrics_csv(r.by_arrival, prov))
        _write(outdir / f"{r.algorithm}_trace.jsonl", trace_jsonl(r, prov))
    _write(outdir / "summary.csv", summary_csv(results, prov, include_timing))


def _relabel(specs: list[AlgorithmSpec]) -> list[AlgorithmSpec]:
    seen: dict[str, int] = {}
    out = []
    for s in specs:
        k = seen.get(s.name, 0)
        seen[s.name] = k + 1
        out.append(s if k == 0 else AlgorithmSpec(s.name, s.params, s.policy, f"{s.name}_{k + 1}"))
    return out


def cmd_run(args) -> int:
    cfg = _config(args)
    specs = _specs(cfg, [args.algorithm], args.model)
    sn, workload = _inputs(args)
    test = _test_split(workload, cfg)
    result = run(sn, test, specs[0], cfg.pricing_config(), cfg.mode, cfg.simulation.sample_interval, cfg.simulation.verify)
    prov = provenance(cfg, algorithm=args.algorithm, test_vnrs=len(test), model=fingerprint(args.model), **_input_provenance(args))
    _export(_output_dir(args, cfg), [result], prov, args.timing)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    names = args.algorithms or cfg.algorithms
    specs = _relabel(_specs(cfg, names, args.model))
    sn, workload = _inputs(args)
    test = _test_split(workload, cfg)
    results = compare(
        sn, test, specs, cfg.pricing_config(), cfg.mode, cfg.simulation.sample_interval, cfg.simulation.verify, args.parallel
    )
    prov = provenance(cfg, algorithms=list(names), test_vnrs=len(test), model=fingerprint(args.model), **_input_provenance(args))
    _export(_output_dir(args, cfg), results, prov, args.timing)
    for r in results:
        s = r.summary()
        log.info("%-10s acr=%s lar=%s lrc=%s", s["algorithm"], s["acr"], s["lar"], s["lrc"])
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isovne", description=__doc__)
    parser.add_argument("--version", action="version", version=f"isovne {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs=False):
        p.add_argument("--config", help="YAML experiment config (default: full evaluation settings)")
        p.add_argument("--seed", type=int, help="override every seed in the config")
        p.add_argument("--out-dir", help="output directory (else config output_dir, else $ISOVNE_OUTPUT_DIR, else .)")
        if inputs:
            p.add_argument("--substrate", required=True, help="substrate JSON file")
            p.add_argument("--workload", required=True, help="workload JSON file")

    p = sub.add_parser("gen-substrate", help="generate a substrate network")
    common(p)
    p.add_argument("--out", help="output file (default: <out-dir>/substrate.json)")
    p.set_defaults(func=cmd_gen_substrate)

    p = sub.add_parser("gen-workload", help="generate a VNR workload")
    common(p)
    p.add_argument("--out", help="output file (default: <out-dir>/workload.json)")
    p.set_defaults(func=cmd_gen_workload)

    p = sub.add_parser("train", help="train the policy network on the training split")
    common(p, inputs=True)
    p.add_argument("--model", help="model output file (default: <out-dir>/model.json)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="run one algorithm on the test split")
    common(p, inputs=True)
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--model", help="trained model file (required for drl)")
    p.add_argument("--timing", action="store_true", help="record wall time in summary.csv (breaks byte-reproducibility)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several algorithms on the same test split")
    common(p, inputs=True)
    p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS, help="default: config 'algorithms'")
    p.add_argument("--model", help="trained model file (required when drl is compared)")
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true", help="record wall time in summary.csv (breaks byte-reproducibility)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SchemaError, UsageError) as exc:
        print(f"isovne: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"isovne: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
