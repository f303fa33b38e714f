"""Train QRGAN, QGAN and the MLP generator on one dataset and tabulate medians.

    python3 scripts/compare_models.py --dataset optdigits --seeds 1 2 3 4 5 --iterations 500
    python3 scripts/compare_models.py --dataset cifar10 --data data/cifar-10-batches-bin/data_batch_1.bin --seeds 1 2 3

Per-model runs land in OUT/<model>/ in the same layout as ``qrgan train``;
OUT/summary.csv holds seed-median MSE and SWD at each SWD iteration.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from qrgan import io
from qrgan.cli import cmd_train
from qrgan.config import parse_config

MODELS = ("qrgan", "qgan", "cnn")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dataset", choices=("optdigits", "cifar10"), default="optdigits")
    ap.add_argument("--data", help="dataset file (default from config)")
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--iterations", type=int, default=500)
    ap.add_argument("--loss", choices=("ce", "ls"), default="ce")
    ap.add_argument("--models", nargs="+", choices=MODELS, default=list(MODELS))
    ap.add_argument("--out", default="runs/compare")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    medians = {}
    for model in args.models:
        text = (f"model = {model}\ndataset = {args.dataset}\nseeds = {','.join(map(str, args.seeds))}\n"
                f"train.iterations = {args.iterations}\ntrain.loss = {args.loss}\n"
                f"output.dir = {out / model}\n")
        if args.data:
            text += f"data.path = {args.data}\n"
        cfg = parse_config(text)
        cmd_train(cfg)
        runs = [io.read_records(out / model / f"seed_{s}.csv") for s in args.seeds]
        rows = [i for i, r in enumerate(runs[0]) if r["swd"] is not None]
        medians[model] = {
            runs[0][i]["iteration"]: (float(np.median([r[i]["mse"] for r in runs])),
                                      float(np.median([r[i]["swd"] for r in runs])))
            for i in rows
        }

    iters = sorted(next(iter(medians.values())))
    header = ["iteration"] + [f"{m}_{k}" for m in args.models for k in ("mse", "swd")]
    table = [[t] + [v for m in args.models for v in medians[m][t]] for t in iters]
    io.write_csv(out / "summary.csv", header, table)
    for t in (iters[0], iters[-1]):
        print(t, "  ".join(f"{m}: mse {medians[m][t][0]:.4f} swd {medians[m][t][1]:.4f}" for m in args.models))


if __name__ == "__main__":
    main()
