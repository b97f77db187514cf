"""Train the policy and compare it with the baselines at full evaluation scale.

For each seed: generate a 100-node substrate and 2000 VNRs, train on the first
1000, replay the last 1000 with every selected algorithm, and write
summary and per-VNR ACR tables to --out.

    python scripts/compare_full_scale.py --seeds 0 1 2 --algorithms drl grc noderank
"""
import argparse
import csv
import logging
import time
from pathlib import Path

from isovne import drl
from isovne.algorithms import ALGORITHMS, AlgorithmSpec
from isovne.simulator import compare, metrics_csv
from isovne.topology import generate_substrate, generate_workload

log = logging.getLogger("compare_full_scale")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--algorithms", nargs="+", choices=ALGORITHMS, default=["drl", "grc", "noderank"])
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--mcts-budget", type=int, default=100)
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--out", default="results/full_scale")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in args.seeds:
        sn = generate_substrate(100, 0.1, seed=seed)
        vnrs = generate_workload(2000, seed=seed)
        specs = []
        if "drl" in args.algorithms:
            t0 = time.perf_counter()
            trained = drl.train(sn, vnrs[:1000], drl.TrainingConfig(epoch_count=args.epochs, seed=seed))
            log.info("seed %d: trained in %.0fs, kernel %s", seed, time.perf_counter() - t0, trained.params.kernel)
        for name in args.algorithms:
            if name == "drl":
                specs.append(AlgorithmSpec("drl", policy=trained.params))
            elif name == "mcts":
                specs.append(AlgorithmSpec("mcts", {"budget": args.mcts_budget, "seed": seed}))
            else:
                specs.append(AlgorithmSpec(name))
        for r in compare(sn, vnrs[1000:], specs, parallel=args.parallel):
            s = r.summary()
            s.update(seed=seed, acr_first_200=r.acr_after(200))
            rows.append(s)
            (out / f"seed{seed}_{r.algorithm}_by_vnr.csv").write_text(metrics_csv(r.by_arrival, {"seed": seed}))
            log.info("seed %d %-9s acr=%.3f first200=%.3f lrc=%.3f %.1fs", seed, r.algorithm, s["acr"], s["acr_first_200"], s["lrc"], s["wall_time"])

    cols = ["seed", "algorithm", "arrived", "accepted", "acr", "acr_first_200", "lar", "lrc", "objective", "wall_time"]
    with open(out / "summary.csv", "w", newline="") as f:
        w = csv.DictWriter(f, cols, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {out / 'summary.csv'}")


if __name__ == "__main__":
    main()
