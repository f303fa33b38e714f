"""Experiment configuration: flat ``section.key = value`` text files.

Every key has a default; unknown keys are rejected. Keys left unset pick up
dataset-dependent defaults (e.g. 64 time frames per patch for 16x16 images).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .baselines import CNNConfig, QGANConfig
from .errors import ConfigError
from .gan import LossKind, TrainConfig
from .reservoir import ReservoirConfig

MODELS = ("qrgan", "qgan", "cnn")
DATASETS = ("optdigits", "cifar10")


@dataclass
class DataConfig:
    path: str = "data/optdigits.tra"
    digit: int = 0  # -1 keeps every label
    count: int = 375


@dataclass
class DiscConfig:
    hidden: tuple = (64, 32)


@dataclass
class MetricsConfig:
    cadence: int = 10
    n_proj: int = 50
    n_eval: int = 8
    eval: str = "first"  # "first" n_eval images of the pool, or "random"


@dataclass
class NoiseConfig:
    ratios: tuple = (0.0, 1 / 6, 1 / 3, 0.5, 2 / 3, 1.0)
    baselines: bool = False


@dataclass
class DenoiseConfig:
    rounds: int = 5
    ratio: float = 1 / 3
    index: int = 0


@dataclass
class OutputConfig:
    dir: str = "runs/default"
    image_cadence: int = 100
    generate_count: int = 0  # 0: 1 image for optdigits, 8 for cifar10


@dataclass
class ExperimentConfig:
    model: str = "qrgan"
    dataset: str = "optdigits"
    seeds: tuple = (1,)
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    reservoir: ReservoirConfig = field(default_factory=ReservoirConfig)
    qgan: QGANConfig = field(default_factory=QGANConfig)
    cnn: CNNConfig = field(default_factory=CNNConfig)
    disc: DiscConfig = field(default_factory=DiscConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.metrics.eval not in ("first", "random"):
            raise ConfigError(f"metrics.eval must be 'first' or 'random', got {self.metrics.eval!r}")
        side = 8 if self.dataset == "optdigits" else 16
        if self.reservoir.pixels != side * side:
            raise ConfigError(
                f"reservoir covers {self.reservoir.pixels} pixels but {self.dataset} images have {side * side}"
            )
        if self.qgan.patches * self.qgan.patch_size != side * side:
            raise ConfigError(f"qgan.n_qubits={self.qgan.n_qubits} does not tile a {side}x{side} image")
        for r in self.noise.ratios:
            if not 0 <= r <= 1:
                raise ConfigError(f"noise ratio {r} outside [0, 1]")

    @property
    def side(self) -> int:
        return 8 if self.dataset == "optdigits" else 16


DATASET_DEFAULTS = {
    "cifar10": {
        "data.path": "data/cifar-10-batches-bin/data_batch_1.bin",
        "data.count": 500,
        "data.digit": -1,
        "reservoir.T": 64,
        "qgan.n_qubits": 7,
        "cnn.width_scale": 8,
    },
}


def _coerce(raw: str, current, key: str):
    raw = raw.strip()
    try:
        if isinstance(current, bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(current, Enum):
            return type(current)(raw.lower())
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(Fraction(raw)) if "/" in raw else float(raw)
        if isinstance(current, tuple):
            items = [s for s in (p.strip() for p in raw.split(",")) if s]
            proto = current[0] if current else 0.0
            return tuple(_coerce(s, proto, key) for s in items)
        return raw
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {key}") from None


def _sections(cfg: ExperimentConfig):
    return {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)
            if dataclasses.is_dataclass(getattr(cfg, f.name))}


def _assign(cfg: ExperimentConfig, key: str, raw: str) -> None:
    sections = _sections(cfg)
    if "." in key:
        section, name = key.split(".", 1)
        if section not in sections:
            raise ConfigError(f"unknown config section {section!r} in {key!r}")
        target = sections[section]
    else:
        target, name = cfg, key
        if name in sections:
            raise ConfigError(f"{key!r} is a section, not a key")
    names = {f.name for f in dataclasses.fields(target)}
    if name not in names:
        raise ConfigError(f"unknown config key {key!r}")
    setattr(target, name, _coerce(raw, getattr(target, name), key))


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse config text; ``overrides`` map keys to raw string values applied last."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    pairs += list((overrides or {}).items())

    explicit = {k for k, _ in pairs}
    dataset = dict(pairs).get("dataset", ExperimentConfig.dataset).strip()
    cfg = ExperimentConfig()
    for key, value in DATASET_DEFAULTS.get(dataset, {}).items():
        if key not in explicit:
            _assign(cfg, key, str(value))
    for key, value in pairs:
        _assign(cfg, key, value)
    try:
        # re-run dataclass validation on the mutated sections
        for section in _sections(cfg).values():
            post = getattr(section, "__post_init__", None)
            if post:
                post()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), overrides)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def dump_config(cfg: ExperimentConfig) -> str:
    """Every key, one per line, in a form ``parse_config`` reads back unchanged."""
    lines = []
    sections = _sections(cfg)
    for f in dataclasses.fields(cfg):
        if f.name not in sections:
            lines.append(f"{f.name} = {_fmt(getattr(cfg, f.name))}")
    for name, section in sections.items():
        for f in dataclasses.fields(section):
            lines.append(f"{name}.{f.name} = {_fmt(getattr(section, f.name))}")
    return "\n".join(lines) + "\n"


__all__ = ["ExperimentConfig", "parse_config", "load_config", "dump_config", "LossKind"]
