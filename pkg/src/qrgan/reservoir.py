"""Quantum reservoir generator: driven density-matrix dynamics plus a linear readout."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import qsim
from .errors import NumericalError


@dataclass
class ReservoirConfig:
    n_out: int = 4
    T: int = 16
    patches_per_image: int = 4
    w: float = 1.0
    ridge_lambda: float = 1e-6
    z_std: float = 0.1
    # "cumulative": ridge over every image seen so far, "image": current image
    # only, "off": keep the SGD-trained filter after the first solve.
    refresh: str = "cumulative"
    reset_between_patches: bool = False

    def __post_init__(self):
        if self.n_out < 1:
            raise ValueError("n_out must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.patches_per_image < 1:
            raise ValueError("patches_per_image must be >= 1")
        if not self.w > 0:
            raise ValueError("w must be > 0")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")
        if self.refresh not in ("cumulative", "image", "off"):
            raise ValueError(f"unknown refresh mode {self.refresh!r}")

    @property
    def n_total(self) -> int:
        return self.n_out + 1

    @property
    def pixels(self) -> int:
        return self.T * self.patches_per_image


@dataclass
class ReservoirParams:
    theta_init: np.ndarray
    theta_h: np.ndarray

    @property
    def n_total(self) -> int:
        # len(theta_init) = n + n(n-1)/2 = n(n+1)/2
        n = int(round((np.sqrt(8 * len(self.theta_init) + 1) - 1) / 2))
        if n * (n + 1) // 2 != len(self.theta_init):
            raise ValueError(f"theta_init length {len(self.theta_init)} is not n(n+1)/2")
        if len(self.theta_h) != n * n:
            raise ValueError(f"theta_h length {len(self.theta_h)} does not match {n} qubits")
        return n


def pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


def param_counts(n_total: int) -> tuple[int, int]:
    n_pairs = n_total * (n_total - 1) // 2
    return n_total + n_pairs, n_total + 2 * n_pairs


def init_params(config: ReservoirConfig, rng: np.random.Generator) -> ReservoirParams:
    n_init, n_h = param_counts(config.n_total)
    theta_init = rng.uniform(0.0, 2 * np.pi, size=n_init)
    theta_h = rng.uniform(0.0, 1.0, size=n_h)
    return ReservoirParams(theta_init, theta_h)


def ansatz_hamiltonian(angles: np.ndarray, n: int) -> qsim.Hamiltonian:
    """Generator of the initialization ansatz: single-Y terms then Y-Y pairs."""
    H = qsim.Hamiltonian(n)
    for j in range(n):
        H.add(angles[j], qsim.axes_string(n, {j: "Y"}))
    for p, (j, k) in enumerate(pairs(n)):
        H.add(angles[n + p], qsim.axes_string(n, {j: "Y", k: "Y"}))
    return H


def propagation_hamiltonian(theta_h: np.ndarray, n: int) -> qsim.Hamiltonian:
    """Z fields, then Y-Y couplings, then X-X couplings over all qubit pairs."""
    H = qsim.Hamiltonian(n)
    pp = pairs(n)
    for j in range(n):
        H.add(theta_h[j], qsim.axes_string(n, {j: "Z"}))
    for p, (j, k) in enumerate(pp):
        H.add(theta_h[n + p], qsim.axes_string(n, {j: "Y", k: "Y"}))
    for p, (j, k) in enumerate(pp):
        H.add(theta_h[n + len(pp) + p], qsim.axes_string(n, {j: "X", k: "X"}))
    return H


def prepare_initial_state(params: ReservoirParams, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != params.theta_init.shape:
        raise ValueError(f"noise length {z.shape} does not match ansatz {params.theta_init.shape}")
    n = params.n_total
    U = qsim.expm_hermitian(ansatz_hamiltonian(params.theta_init + z, n), 1.0)
    return qsim.evolve(qsim.zero_state(n), U)


def propagator(params: ReservoirParams, config: ReservoirConfig) -> np.ndarray:
    H = propagation_hamiltonian(params.theta_h, params.n_total)
    return qsim.expm_hermitian(H, np.pi * config.w)


def _drive(rho: np.ndarray, U: np.ndarray, x: float) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"pixel value {x} outside [0, 1]")
    rho = qsim.evolve(qsim.replace_qubit0(rho, x), U)
    n = qsim.n_qubits_of(rho)
    row = np.ones(n)
    row[:-1] = _readout_signs(n) @ np.real(np.diagonal(rho))
    return qsim.reset_qubit0(rho), row


@lru_cache(maxsize=None)
def _readout_signs(n: int) -> np.ndarray:
    # rows: Z diagonals of output qubits 1..n-1
    return np.array([qsim.z_signs(n, l) for l in range(1, n)])


def drive_step(rho: np.ndarray, params: ReservoirParams, x: float, config: ReservoirConfig):
    """One input/propagate/read/reset cycle.

    Returns the next state and the readout row ``[<Z_1>, ..., <Z_Nq>, 1]``.
    """
    return _drive(rho, propagator(params, config), x)


class Reservoir:
    """Fixed random reservoir with its propagator cached."""

    def __init__(self, params: ReservoirParams, config: ReservoirConfig):
        if params.n_total != config.n_total:
            raise ValueError("params and config disagree on qubit count")
        self.params = params
        self.config = config
        self.U = propagator(params, config)

    def features(self, images, z) -> np.ndarray:
        """Feature matrix V for a list of flat images, rows sample-major then time-minor."""
        cfg = self.config
        blocks = []
        for image in images:
            image = np.asarray(image, dtype=float).ravel()
            if image.size != cfg.pixels:
                raise ValueError(
                    f"image has {image.size} pixels, expected {cfg.patches_per_image} x {cfg.T}"
                )
            rho0 = prepare_initial_state(self.params, z)
            rho = rho0
            rows = np.empty((image.size, cfg.n_out + 1))
            for i, x in enumerate(image):
                if cfg.reset_between_patches and i > 0 and i % cfg.T == 0:
                    rho = rho0
                rho, rows[i] = _drive(rho, self.U, x)
            blocks.append(rows)
        if not blocks:
            return np.empty((0, cfg.n_out + 1))
        return np.vstack(blocks)


def build_feature_matrix(params, z, images, config) -> np.ndarray:
    """Each entry of ``images`` is either a flat pixel vector or its patch sequences."""
    flat = [np.concatenate([np.ravel(p) for p in im]) if _is_patch_list(im) else im for im in images]
    return Reservoir(params, config).features(flat, z)


def _is_patch_list(im) -> bool:
    return isinstance(im, (list, tuple)) and len(im) > 0 and np.ndim(im[0]) >= 1


def ridge_solve(A: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    """Solve (A + lam I) W = b for a normal-equation matrix ``A``."""
    M = A + lam * np.eye(A.shape[0])
    try:
        return np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular normal matrix (lambda={lam})") from exc


def solve_filter(V: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Readout filter W = (V^T V + lam I)^-1 V^T y."""
    y = np.asarray(y, dtype=float)
    if V.shape[0] != y.shape[0]:
        raise ValueError(f"V has {V.shape[0]} rows but y has {y.shape[0]}")
    return ridge_solve(V.T @ V, V.T @ y, lam)


def generate(params, z, images, W, config) -> np.ndarray:
    V = build_feature_matrix(params, z, images, config)
    W = np.asarray(W, dtype=float)
    if W.shape[0] != V.shape[1]:
        raise ValueError(f"filter has {W.shape[0]} rows, expected {V.shape[1]}")
    return V @ W


def sgd_update_filter(W: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
    grad = np.asarray(grad, dtype=float)
    if grad.shape != np.shape(W):
        raise ValueError(f"gradient shape {grad.shape} does not match filter {np.shape(W)}")
    if not np.all(np.isfinite(grad)):
        raise NumericalError(f"non-finite generator gradient: {grad}")
    return W - lr * grad
