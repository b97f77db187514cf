"""Per-epoch loss and training acceptance ratio for several seeds.

    python scripts/training_curves.py --nodes 30 --vnrs 200 --epochs 30
    python scripts/training_curves.py --nodes 100 --vnrs 1000 --epochs 100 --link-probability 0.1
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from isovne import drl
from isovne.topology import generate_substrate, generate_workload


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--nodes", type=int, default=30)
    ap.add_argument("--link-probability", type=float, default=0.2)
    ap.add_argument("--vnrs", type=int, default=200)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--learning-rate", type=float, default=0.001)
    ap.add_argument("--out", default="results/training_curves.csv")
    args = ap.parse_args()

    rows = []
    for seed in args.seeds:
        sn = generate_substrate(args.nodes, args.link_probability, seed=seed)
        vnrs = generate_workload(args.vnrs, seed=seed)
        cfg = drl.TrainingConfig(learning_rate=args.learning_rate, epoch_count=args.epochs, seed=seed)
        res = drl.train(sn, vnrs, cfg)
        for epoch, (loss, acr) in enumerate(zip(res.losses, res.acceptance), 1):
            rows.append({"seed": seed, "epoch": epoch, "loss": loss, "train_acr": acr})
        head, tail = np.mean(res.losses[:5]), np.mean(res.losses[-5:])
        print(f"seed {seed}: first-5 loss {head:.4f}  last-5 loss {tail:.4f}  kernel {np.round(res.params.kernel, 4)}")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        w = csv.DictWriter(f, ["seed", "epoch", "loss", "train_acr"])
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
