"""Train one reservoir generator on digit 0, then run the feedback denoising loop.

    python3 scripts/denoise_demo.py --config configs/denoise.cfg

Writes the training run, then OUT/denoise/round_k.pgm and denoise_mse.csv.
"""

import argparse
import logging

from qrgan.cli import cmd_denoise, cmd_train
from qrgan.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", default="configs/denoise.cfg")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    cfg = load_config(args.config)
    cmd_train(cfg)
    seed = cfg.seeds[0]
    seq = cmd_denoise(cfg, f"{cfg.output.dir}/seed_{seed}.ckpt", cfg.denoise.rounds)
    print(f"wrote {len(seq)} images to {cfg.output.dir}/denoise")


if __name__ == "__main__":
    main()
