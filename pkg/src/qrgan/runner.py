"""Seeded experiment runs shared by the command line, scripts and acceptance tests."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, io
from .config import ExperimentConfig, dump_config
from .data import load_dataset
from .gan import (CNNGenerator, EvalSet, QGANGenerator, QRGANGenerator, TrainState,
                  make_discriminator, mix_noise, train_iteration)
from .metrics import projections

log = logging.getLogger(__name__)

# independent child streams of one seed
STREAMS = ("generator", "disc", "train", "eval", "proj")


def seed_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(c) for name, c in zip(STREAMS, children)}


def load_pool(cfg: ExperimentConfig) -> np.ndarray:
    digit = None if cfg.data.digit < 0 else cfg.data.digit
    return load_dataset(cfg.dataset, cfg.data.path, digit=digit, count=cfg.data.count)


def build_generator(cfg: ExperimentConfig, rng: np.random.Generator, model: str | None = None):
    model = model or cfg.model
    n_pixels = cfg.side**2
    if model == "qrgan":
        return QRGANGenerator(cfg.reservoir, rng)
    if model == "qgan":
        return QGANGenerator(cfg.qgan, rng, n_eval=cfg.metrics.n_eval)
    if model == "cnn":
        return CNNGenerator(cfg.cnn, n_pixels, rng, n_eval=cfg.metrics.n_eval)
    raise ValueError(f"unknown model {model!r}")


def eval_indices(cfg: ExperimentConfig, n_pool: int, rng: np.random.Generator) -> np.ndarray:
    k = min(cfg.metrics.n_eval, n_pool)
    if cfg.metrics.eval == "random":
        return np.sort(rng.choice(n_pool, size=k, replace=False))
    return np.arange(k)


@dataclass
class SeedResult:
    seed: int
    records: list
    state: TrainState
    eval_idx: np.ndarray


def run_seed(cfg: ExperimentConfig, pool: np.ndarray, seed: int, *, model: str | None = None,
             noise_ratio: float | None = None, iterations: int | None = None,
             on_iteration=None) -> SeedResult:
    """Train one generator/discriminator pair from scratch under ``seed``."""
    streams = seed_streams(seed)
    train_cfg = dataclasses.replace(
        cfg.train, seed=seed,
        noise_ratio=cfg.train.noise_ratio if noise_ratio is None else noise_ratio)
    gen = build_generator(cfg, streams["generator"], model)
    disc = make_discriminator(pool.shape[1], cfg.disc.hidden, streams["disc"])

    idx = eval_indices(cfg, len(pool), streams["eval"])
    refs = pool[idx]
    inputs = refs
    if train_cfg.noise_ratio > 0:
        inputs = np.stack([mix_noise(r, train_cfg.noise_ratio, streams["eval"]) for r in refs])
    dirs = projections(pool.shape[1], cfg.metrics.n_proj, streams["proj"])

    state = TrainState(gen, disc, train_cfg, streams["train"], EvalSet(refs, inputs, dirs),
                       swd_cadence=cfg.metrics.cadence)
    n_iter = train_cfg.iterations if iterations is None else iterations
    for _ in range(n_iter):
        rec = train_iteration(state, pool[state.iteration % len(pool)])
        if on_iteration is not None:
            on_iteration(state, rec)
        if rec.iteration % 100 == 0:
            log.info("seed %d iter %d  L_D=%.4f L_G=%.4f mse=%.4f", seed, rec.iteration,
                     rec.L_D, rec.L_G, rec.mse)
    return SeedResult(seed, state.records, state, idx)


def checkpoint_arrays(state: TrainState) -> dict:
    arrays = dict(state.generator.arrays())
    for i, p in enumerate(state.disc.params):
        arrays[f"disc.{i}"] = p
    return arrays


def save_run_checkpoint(path, cfg: ExperimentConfig, result: SeedResult, model: str) -> None:
    meta = {"model": model, "dataset": cfg.dataset, "seed": result.seed,
            "iteration": result.state.iteration, "version": __version__}
    io.save_checkpoint(path, checkpoint_arrays(result.state), meta)


def restore_generator(cfg: ExperimentConfig, checkpoint) -> tuple[object, dict]:
    arrays, meta = io.load_checkpoint(checkpoint)
    model = meta.get("model", cfg.model)
    gen = build_generator(cfg, np.random.default_rng(0), model)
    gen.load_arrays(arrays)
    return gen, meta


def write_manifest(out: Path, cfg: ExperimentConfig, command: str, outputs: list[str],
                   extra: dict | None = None) -> Path:
    """Resolved config plus provenance comments; the file itself is a valid config."""
    lines = [f"# qrgan {__version__}", f"# command: {command}"]
    lines += [f"# output: {o}" for o in outputs]
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {v}")
    path = out / "manifest.txt"
    path.write_text("\n".join(lines) + "\n" + dump_config(cfg))
    return path
