"""Command-line entry point: ``qrgan {train,generate,noise-study,denoise,metrics}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, load_config
from .errors import ConfigError, DataError, NumericalError
from .gan import TrainingError, denoise_iterate, mix_noise
from .metrics import mse, swd
from .runner import (load_pool, restore_generator, run_seed, save_run_checkpoint,
                     seed_streams, write_manifest)

log = logging.getLogger("qrgan")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(cfg: ExperimentConfig) -> int:
    pool = load_pool(cfg)
    out = _out_dir(cfg)
    names = [f"seed_{s}.csv" for s in cfg.seeds] + [f"seed_{s}.ckpt" for s in cfg.seeds]
    write_manifest(out, cfg, "train", names + ["aggregate.csv"])
    img_dir = out / "images"
    cadence = cfg.output.image_cadence

    def snapshot(state, rec):
        if cadence > 0 and rec.iteration % cadence == 0:
            img_dir.mkdir(exist_ok=True)
            grid = io.tile(state.generator.render(state.eval.inputs), cfg.side)
            io.write_pgm(img_dir / f"seed_{state.config.seed}_iter_{rec.iteration:05d}.pgm", grid)

    runs = []
    for seed in cfg.seeds:
        log.info("training %s seed %d for %d iterations", cfg.model, seed, cfg.train.iterations)
        try:
            result = run_seed(cfg, pool, seed, on_iteration=snapshot)
        except TrainingError as exc:
            (out / "error.txt").write_text(f"seed {seed}: {exc}\n")
            raise
        io.write_records(out / f"seed_{seed}.csv", result.records)
        save_run_checkpoint(out / f"seed_{seed}.ckpt", cfg, result, cfg.model)
        runs.append(result.records)
    io.write_csv(out / "aggregate.csv", io.AGGREGATE_FIELDS, io.aggregate_rows(runs))
    return EXIT_OK


def _generate_inputs(cfg: ExperimentConfig, pool: np.ndarray) -> np.ndarray:
    count = cfg.output.generate_count or (1 if cfg.dataset == "optdigits" else 8)
    return pool[: min(count, len(pool))]


def cmd_generate(cfg: ExperimentConfig, checkpoint) -> list[np.ndarray]:
    gen, meta = restore_generator(cfg, checkpoint)
    pool = load_pool(cfg)
    inputs = _generate_inputs(cfg, pool)
    images = np.clip(gen.render(inputs), 0.0, 1.0)
    out = _out_dir(cfg) / "generated"
    out.mkdir(exist_ok=True)
    for k, im in enumerate(images):
        io.write_pgm(out / f"generated_{k}.pgm", im.reshape(cfg.side, cfg.side))
    if len(images) > 1:
        io.write_pgm(out / "grid.pgm", io.tile(images, cfg.side))
    return list(images)


def cmd_noise_study(cfg: ExperimentConfig) -> int:
    pool = load_pool(cfg)
    out = _out_dir(cfg)
    cfg = dataclasses.replace(cfg, metrics=dataclasses.replace(cfg.metrics, eval="random"))
    chosen = {s: run_seed(cfg, pool, s, iterations=0).eval_idx.tolist() for s in cfg.seeds}
    extra = {f"seed {s} images": " ".join(map(str, idx)) for s, idx in chosen.items()}
    write_manifest(out, cfg, "noise-study",
                   ["noise_swd.csv", "noise_swd_long.csv", "noise_summary.csv"], extra)

    columns = [(f"swd_r{r:.4f}", "qrgan", r) for r in cfg.noise.ratios]
    if cfg.noise.baselines:
        columns += [("swd_qgan", "qgan", 0.0), ("swd_cnn", "cnn", 0.0)]

    long_rows, curves = [], {}
    for name, model, ratio in columns:
        per_seed = []
        for seed in cfg.seeds:
            log.info("noise study %s seed %d", name, seed)
            res = run_seed(cfg, pool, seed, model=model, noise_ratio=ratio)
            pts = [(r.iteration, r.swd) for r in res.records if r.swd is not None]
            long_rows += [[name, seed, t, v] for t, v in pts]
            per_seed.append(pts)
        iters = [t for t, _ in per_seed[0]]
        med = np.median(np.array([[v for _, v in pts] for pts in per_seed]), axis=0)
        curves[name] = (iters, med)

    iters = curves[columns[0][0]][0]
    io.write_csv(out / "noise_swd.csv", ["iteration"] + [c[0] for c in columns],
                 ([t] + [float(curves[c[0]][1][i]) for c in columns] for i, t in enumerate(iters)))
    io.write_csv(out / "noise_swd_long.csv", ["curve", "seed", "iteration", "swd"], long_rows)
    summary = []
    for name, _, _ in columns:
        its, med = curves[name]
        k = int(np.argmin(med))
        summary.append([name, its[k], float(med[k]), float(med[0])])
    io.write_csv(out / "noise_summary.csv", ["curve", "min_swd_iteration", "min_swd", "first_swd"], summary)
    return EXIT_OK


def cmd_denoise(cfg: ExperimentConfig, checkpoint, rounds: int) -> list[np.ndarray]:
    gen, meta = restore_generator(cfg, checkpoint)
    if meta.get("model") != "qrgan":
        raise ConfigError("denoise needs a qrgan checkpoint")
    pool = load_pool(cfg)
    clean = pool[cfg.denoise.index]
    rng = seed_streams(cfg.seeds[0])["eval"]
    noisy = mix_noise(clean, cfg.denoise.ratio, rng)
    seq = denoise_iterate(gen, noisy, rounds)
    out = _out_dir(cfg) / "denoise"
    out.mkdir(exist_ok=True)
    for k, im in enumerate(seq):
        io.write_pgm(out / f"round_{k}.pgm", im.reshape(cfg.side, cfg.side))
    io.write_csv(out / "denoise_mse.csv", ["round", "mse"], ([k, mse(im, clean)] for k, im in enumerate(seq)))
    return seq


def _load_image_set(path) -> np.ndarray:
    path = Path(path)
    files = sorted(path.glob("*.pgm")) if path.is_dir() else [path]
    if not files:
        raise DataError(f"no PGM images under {path}")
    return np.stack([io.read_pgm(f).ravel() for f in files])


def cmd_metrics(a, b, n_proj: int, seed: int) -> dict:
    A, B = _load_image_set(a), _load_image_set(b)
    if A.shape != B.shape:
        raise DataError(f"image sets differ in shape: {A.shape} vs {B.shape}")
    return {"mse": float(np.mean([mse(x, y) for x, y in zip(A, B)])),
            "swd": swd(A, B, n_proj=n_proj, rng=np.random.default_rng(seed))}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrgan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_ckpt=False):
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--seed-override", type=int, help="run a single seed instead of config seeds")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--cadence", type=int, help="SWD cadence in iterations (overrides metrics.cadence)")
        if needs_ckpt:
            p.add_argument("--checkpoint", required=True)

    common(sub.add_parser("train", help="train one model over the configured seeds"))
    common(sub.add_parser("generate", help="render images from a checkpoint"), needs_ckpt=True)
    common(sub.add_parser("noise-study", help="SWD curves for noisy reservoir inputs"))
    p = sub.add_parser("denoise", help="feed fakes back as inputs")
    common(p, needs_ckpt=True)
    p.add_argument("--rounds", type=int)
    p = sub.add_parser("metrics", help="MSE and SWD between two PGM image sets")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--n-proj", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _resolve(args) -> ExperimentConfig:
    overrides = {}
    if args.seed_override is not None:
        overrides["seeds"] = str(args.seed_override)
    if args.out:
        overrides["output.dir"] = args.out
    if args.cadence is not None:
        overrides["metrics.cadence"] = str(args.cadence)
    cfg = load_config(args.config, overrides)
    if not Path(cfg.data.path).exists():
        raise DataError(f"dataset file not found: {cfg.data.path}")
    return cfg


def main(argv=None) -> int:
    level = os.environ.get("QRGAN_LOG", "info").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.INFO),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "metrics":
            res = cmd_metrics(args.a, args.b, args.n_proj, args.seed)
            print(f"mse,swd\n{res['mse']!r},{res['swd']!r}")
            return EXIT_OK
        cfg = _resolve(args)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "generate":
            cmd_generate(cfg, args.checkpoint)
        elif args.command == "noise-study":
            return cmd_noise_study(cfg)
        elif args.command == "denoise":
            rounds = cfg.denoise.rounds if args.rounds is None else args.rounds
            cmd_denoise(cfg, args.checkpoint, rounds)
        return EXIT_OK
    except (ConfigError, FileNotFoundError) as exc:
        print(f"qrgan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"qrgan: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"qrgan: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
