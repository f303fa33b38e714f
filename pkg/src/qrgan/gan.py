"""Adversarial training of the reservoir generator (and the baselines) against an MLP discriminator."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import baselines, reservoir
from .data import image_order, patch_order
from .errors import NumericalError
from .metrics import mse, swd
from .mlp import MLP

log = logging.getLogger(__name__)

PROB_EPS = 1e-12


class LossKind(str, Enum):
    CROSS_ENTROPY = "ce"
    LEAST_SQUARES = "ls"


def _clip(p):
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def _check_prob(*ps):
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")


def loss_d(kind, d_real: float, d_fake: float) -> float:
    kind = LossKind(kind)
    _check_prob(d_real, d_fake)
    if kind is LossKind.CROSS_ENTROPY:
        return float(-(np.log(_clip(d_real)) + np.log(1.0 - _clip(d_fake))))
    return 0.5 * ((d_real - 1.0) ** 2 + d_fake**2)


def loss_g(kind, d_fake: float) -> float:
    kind = LossKind(kind)
    _check_prob(d_fake)
    if kind is LossKind.CROSS_ENTROPY:
        return float(-np.log(_clip(d_fake)))
    return 0.5 * (d_fake - 1.0) ** 2


def loss_d_grads(kind, d_real: float, d_fake: float) -> tuple[float, float]:
    """(dL_D/dd_real, dL_D/dd_fake)."""
    if LossKind(kind) is LossKind.CROSS_ENTROPY:
        return -1.0 / _clip(d_real), 1.0 / (1.0 - _clip(d_fake))
    return d_real - 1.0, d_fake


def loss_g_grad(kind, d_fake: float) -> float:
    if LossKind(kind) is LossKind.CROSS_ENTROPY:
        return -1.0 / _clip(d_fake)
    return d_fake - 1.0


def make_discriminator(n_pixels: int, hidden=(64, 32), rng=None) -> MLP:
    return MLP([n_pixels, *hidden, 1], rng)


def disc_forward(D: MLP, x) -> float:
    return float(D.forward(x)[0])


def disc_backward(D: MLP, x, upstream: float):
    """Weight gradients and input gradient of ``upstream * D(x)``."""
    D.forward(x)
    return D.backward(np.array([upstream]))


def mix_noise(x, r: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"noise ratio {r} outside [0, 1]")
    x = np.asarray(x, dtype=float)
    u = rng.uniform(0.0, 1.0, size=x.shape)
    return np.clip((1.0 - r) * x + r * u, 0.0, 1.0)


@dataclass
class TrainConfig:
    lr_d: float = 0.1
    lr_g: float = 0.001
    iterations: int = 500
    loss: LossKind = LossKind.CROSS_ENTROPY
    noise_ratio: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.loss = LossKind(self.loss)
        if not (self.lr_d > 0 and self.lr_g >= 0):
            raise ValueError("learning rates must be positive")
        if not 0.0 <= self.noise_ratio <= 1.0:
            raise ValueError("noise_ratio must lie in [0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class TrainRecord:
    iteration: int
    L_D: float
    L_G: float
    mse: float
    swd: float | None = None


# ---------------------------------------------------------------- generators
#
# Every generator works on row-major flat images and exposes:
#   propose(inp, target, rng) -> (fake, ctx)   fake for one training step
#   update(ctx, grad_fake, lr)                 generator SGD step
#   render(inputs) -> (k, pixels)              fakes for the evaluation set
#   arrays() / load_arrays(d)                  checkpoint state


class QRGANGenerator:
    """Reservoir generator whose only trainable parameters are the readout filter."""

    name = "qrgan"

    def __init__(self, config: reservoir.ReservoirConfig, rng: np.random.Generator,
                 params: reservoir.ReservoirParams | None = None):
        self.config = config
        self.params = params or reservoir.init_params(config, rng)
        self.res = reservoir.Reservoir(self.params, config)
        self.z_fixed = rng.normal(0.0, config.z_std, size=self.params.theta_init.size)
        k = config.n_out + 1
        self.W = np.zeros(k)
        self.A = np.zeros((k, k))
        self.b = np.zeros(k)
        self.solved = False
        self._eval_key = None
        self._eval_V = None

    @property
    def n_pixels(self) -> int:
        return self.config.pixels

    def features(self, inp, z) -> np.ndarray:
        """V over the duplicated patch sequence of one image."""
        seq = patch_order(inp)
        return self.res.features([seq, seq], z)

    def refresh(self, V, y) -> None:
        cfg = self.config
        if cfg.refresh == "cumulative":
            self.A += V.T @ V
            self.b += V.T @ y
            self.W = reservoir.ridge_solve(self.A, self.b, cfg.ridge_lambda)
        elif cfg.refresh == "image" or not self.solved:
            self.W = reservoir.solve_filter(V, y, cfg.ridge_lambda)
        self.solved = True

    def propose(self, inp, target, rng):
        z = rng.normal(0.0, self.config.z_std, size=self.params.theta_init.size)
        V = self.features(inp, z)
        seq = patch_order(target)
        self.refresh(V, np.concatenate([seq, seq]))
        y_gen = V @ self.W
        return image_order(y_gen[: self.n_pixels]), V

    def filter_grad(self, V, grad_fake) -> np.ndarray:
        """dL/dW = V^T g with g the fake-image gradient padded over the unused half."""
        g = np.zeros(V.shape[0])
        g[: self.n_pixels] = patch_order(grad_fake)
        return V.T @ g

    def update(self, V, grad_fake, lr) -> None:
        self.W = reservoir.sgd_update_filter(self.W, self.filter_grad(V, grad_fake), lr)

    def generate_from(self, inp, z=None) -> np.ndarray:
        z = self.z_fixed if z is None else z
        V = self.res.features([patch_order(inp)], z)
        return image_order(V @ self.W)

    def render(self, inputs) -> np.ndarray:
        inputs = np.asarray(inputs, dtype=float)
        key = inputs.tobytes()
        if key != self._eval_key:
            self._eval_V = [self.res.features([patch_order(x)], self.z_fixed) for x in inputs]
            self._eval_key = key
        return np.stack([image_order(V @ self.W) for V in self._eval_V])

    def arrays(self) -> dict:
        return {"theta_init": self.params.theta_init, "theta_h": self.params.theta_h,
                "W": self.W, "z_fixed": self.z_fixed, "ridge_A": self.A, "ridge_b": self.b}

    def load_arrays(self, d: dict) -> None:
        self.params = reservoir.ReservoirParams(d["theta_init"], d["theta_h"])
        self.res = reservoir.Reservoir(self.params, self.config)
        self.W, self.z_fixed = d["W"].copy(), d["z_fixed"].copy()
        self.A, self.b = d["ridge_A"].copy(), d["ridge_b"].copy()
        self.solved = True
        self._eval_key = None


class QGANGenerator:
    name = "qgan"

    def __init__(self, config: baselines.QGANConfig, rng: np.random.Generator, n_eval: int = 8):
        self.config = config
        shape = (config.patches, config.depth, config.n_qubits)
        self.theta = rng.uniform(0.0, 2 * np.pi, size=shape)
        self.z_fixed = self.draw_noise(rng, n_eval)

    @property
    def n_pixels(self) -> int:
        return self.config.patches * self.config.patch_size

    def draw_noise(self, rng, k=None):
        size = self.config.n_qubits if k is None else (k, self.config.n_qubits)
        return rng.uniform(0.0, np.pi / 2, size=size)

    def propose(self, inp, target, rng):
        z = self.draw_noise(rng)
        return image_order(baselines.qgan_generate(self.config, self.theta, z)), z

    def update(self, z, grad_fake, lr) -> None:
        grad = baselines.qgan_param_shift_grad(self.config, self.theta, z, patch_order(grad_fake))
        self.theta = self.theta - lr * grad

    def render(self, inputs) -> np.ndarray:
        k = len(inputs)
        return np.stack([image_order(baselines.qgan_generate(self.config, self.theta, z))
                         for z in self.z_fixed[:k]])

    def arrays(self) -> dict:
        return {"theta": self.theta, "z_fixed": self.z_fixed}

    def load_arrays(self, d: dict) -> None:
        self.theta, self.z_fixed = d["theta"].copy(), d["z_fixed"].copy()


class CNNGenerator:
    name = "cnn"

    def __init__(self, config: baselines.CNNConfig, n_pixels: int, rng: np.random.Generator,
                 n_eval: int = 8):
        self.config = config
        self.n_pixels = n_pixels
        self.net = baselines.make_cnn_generator(config, n_pixels, rng)
        self.z_fixed = rng.normal(size=(n_eval, n_pixels))

    def propose(self, inp, target, rng):
        z = rng.normal(size=self.n_pixels)
        return baselines.cnn_forward(self.net, z).copy(), z

    def update(self, z, grad_fake, lr) -> None:
        baselines.cnn_forward(self.net, z)
        grads, _ = baselines.cnn_backward(self.net, grad_fake)
        self.net.step(grads, lr)

    def render(self, inputs) -> np.ndarray:
        return np.stack([baselines.cnn_forward(self.net, z).copy() for z in self.z_fixed[: len(inputs)]])

    def arrays(self) -> dict:
        out = {f"net.{i}": p for i, p in enumerate(self.net.params)}
        out["z_fixed"] = self.z_fixed
        return out

    def load_arrays(self, d: dict) -> None:
        for i, p in enumerate(self.net.params):
            p[...] = d[f"net.{i}"]
        self.z_fixed = d["z_fixed"].copy()


# ------------------------------------------------------------------ training


@dataclass
class EvalSet:
    """Fixed references for metrics; ``inputs`` are what an input-driven generator sees."""

    refs: np.ndarray
    inputs: np.ndarray
    directions: np.ndarray


@dataclass
class TrainState:
    generator: object
    disc: MLP
    config: TrainConfig
    rng: np.random.Generator
    eval: EvalSet
    swd_cadence: int = 10
    iteration: int = 0
    records: list = field(default_factory=list)


class TrainingError(NumericalError):
    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


def train_iteration(state: TrainState, image) -> TrainRecord:
    cfg = state.config
    gen, D = state.generator, state.disc
    image = np.asarray(image, dtype=float)
    inp = mix_noise(image, cfg.noise_ratio, state.rng) if cfg.noise_ratio > 0 else image

    fake, ctx = gen.propose(inp, image, state.rng)

    d_real = disc_forward(D, image)
    d_fake = disc_forward(D, fake)
    if not np.isfinite(d_real + d_fake):
        rec = TrainRecord(state.iteration + 1, float("nan"), float("nan"), float("nan"))
        raise TrainingError(f"non-finite discriminator output at iteration {rec.iteration}", rec)
    L_D = loss_d(cfg.loss, d_real, d_fake)
    L_G = loss_g(cfg.loss, d_fake)

    up_real, up_fake = loss_d_grads(cfg.loss, d_real, d_fake)
    grads_real, _ = disc_backward(D, image, up_real)
    grads_fake, _ = disc_backward(D, fake, up_fake)
    D.step([a + b for a, b in zip(grads_real, grads_fake)], cfg.lr_d)

    d_fake_new = disc_forward(D, fake)
    _, grad_fake = disc_backward(D, fake, loss_g_grad(cfg.loss, d_fake_new))
    gen.update(ctx, grad_fake, cfg.lr_g)

    state.iteration += 1
    t = state.iteration
    ev = state.eval
    generated = gen.render(ev.inputs)
    err = float(np.mean([mse(g, r) for g, r in zip(generated, ev.refs)]))
    dist = None
    if t == 1 or (state.swd_cadence > 0 and t % state.swd_cadence == 0):
        dist = swd(generated, ev.refs, directions=ev.directions)
    record = TrainRecord(t, L_D, L_G, err, dist)
    values = [L_D, L_G, err] + ([] if dist is None else [dist])
    if not np.all(np.isfinite(values)):
        raise TrainingError(f"non-finite metrics at iteration {t}: {record}", record)
    state.records.append(record)
    return record


def train_run(state: TrainState, images, iterations: int | None = None) -> list[TrainRecord]:
    """Cycle through ``images`` one per iteration."""
    images = np.asarray(images, dtype=float)
    if len(images) == 0:
        raise ValueError("empty dataset")
    n = state.config.iterations if iterations is None else iterations
    for i in range(n):
        rec = train_iteration(state, images[state.iteration % len(images)])
        if rec.iteration % 100 == 0:
            log.info("iter %d  L_D=%.4f  L_G=%.4f  mse=%.4f", rec.iteration, rec.L_D, rec.L_G, rec.mse)
    return state.records


def denoise_iterate(gen: QRGANGenerator, image, rounds: int) -> list[np.ndarray]:
    """Feed each generated fake back in as the next reservoir input."""
    seq = [np.clip(np.asarray(image, dtype=float), 0.0, 1.0)]
    for _ in range(rounds):
        seq.append(np.clip(gen.generate_from(seq[-1]), 0.0, 1.0))
    return seq
