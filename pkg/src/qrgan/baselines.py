"""Comparison generators: a patch-style variational QGAN and a dense MLP generator."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError
from .mlp import MLP

SHIFT = np.pi / 2


@dataclass
class QGANConfig:
    n_qubits: int = 5
    depth: int = 6
    patches: int = 4

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("n_qubits must be >= 2")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    @property
    def patch_size(self) -> int:
        return 2 ** (self.n_qubits - 1)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


def apply_1q(psi: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 gate to ``qubit`` of a state stored as an (2,)*n tensor."""
    out = np.tensordot(gate, psi, axes=([1], [qubit]))
    return np.moveaxis(out, 0, qubit)


@lru_cache(maxsize=None)
def cz_chain_diagonal(n: int) -> np.ndarray:
    """Diagonal of CZ(0,1) CZ(1,2) ... CZ(n-2,n-1) in the computational basis."""
    bits = (np.arange(2**n)[:, None] >> (n - 1 - np.arange(n))) & 1
    parity = np.sum(bits[:, :-1] * bits[:, 1:], axis=1)
    diag = np.where(parity % 2, -1.0, 1.0)
    diag.setflags(write=False)
    return diag


def qgan_circuit(theta: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Statevector after noise Ry(z_j), then ``depth`` layers of Ry(theta) + CZ chain.

    ``theta`` has shape (depth, n_qubits); qubit 0 is the most significant bit.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    z = np.asarray(z, dtype=float)
    n = theta.shape[1]
    if z.shape != (n,):
        raise ValueError(f"noise shape {z.shape}, expected ({n},)")
    psi = np.zeros((2,) * n)
    psi[(0,) * n] = 1.0
    for j in range(n):
        psi = apply_1q(psi, ry(z[j]), j)
    cz = cz_chain_diagonal(n).reshape((2,) * n) if n > 1 else None
    for layer in theta:
        for j in range(n):
            psi = apply_1q(psi, ry(layer[j]), j)
        if cz is not None:
            psi = psi * cz
    return psi.ravel()


def half_distribution(psi: np.ndarray) -> np.ndarray:
    probs = np.abs(psi) ** 2
    return probs[: probs.size // 2]


def postprocess(half: np.ndarray) -> np.ndarray:
    """Renormalize then max-rescale the kept half of the distribution.

    Both steps together reduce to ``half / max(half)``.
    """
    total = half.sum()
    if not total > 1e-300:
        raise NumericalError("kept half of the distribution is all zero")
    q = half / total
    return q / q.max()


def postprocess_vjp(half: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """dL/d(half) given dL/d(pixels) for ``pixels = half / max(half)``."""
    m = int(np.argmax(half))
    pm = half[m]
    grad = upstream / pm
    grad[m] -= np.dot(upstream, half) / pm**2
    return grad


def qgan_generate(config: QGANConfig, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Concatenated patch pixels in quadrant order; ``theta`` is (patches, depth, n)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.patches, config.depth, config.n_qubits):
        raise ValueError(f"theta shape {theta.shape} does not match config")
    return np.concatenate([postprocess(half_distribution(qgan_circuit(t, z))) for t in theta])


def half_prob_jacobian(theta: np.ndarray, z: np.ndarray) -> np.ndarray:
    """d(half probabilities)/d(theta) by the parameter-shift rule.

    Returns shape (2^(n-1), depth, n).
    """
    theta = np.asarray(theta, dtype=float)
    depth, n = theta.shape
    jac = np.empty((2 ** (n - 1) if n > 1 else 1, depth, n))
    for k in range(depth):
        for j in range(n):
            plus = theta.copy()
            plus[k, j] += SHIFT
            minus = theta.copy()
            minus[k, j] -= SHIFT
            jac[:, k, j] = 0.5 * (half_distribution(qgan_circuit(plus, z))
                                  - half_distribution(qgan_circuit(minus, z)))
    return jac


def qgan_param_shift_grad(config: QGANConfig, theta, z, upstream) -> np.ndarray:
    """dL/dtheta for upstream dL/d(pixels) in quadrant order."""
    theta = np.asarray(theta, dtype=float)
    upstream = np.asarray(upstream, dtype=float).reshape(config.patches, config.patch_size)
    grad = np.zeros_like(theta)
    for p in range(config.patches):
        if not np.any(upstream[p]):
            continue
        half = half_distribution(qgan_circuit(theta[p], z))
        g_half = postprocess_vjp(half, upstream[p])
        grad[p] = np.tensordot(g_half, half_prob_jacobian(theta[p], z), axes=(0, 0))
    return grad


@dataclass
class CNNConfig:
    width_scale: int = 1
    base_widths: tuple = (128, 256, 786)

    def dims(self, n_pixels: int) -> list[int]:
        return [n_pixels] + [w * self.width_scale for w in self.base_widths] + [n_pixels]


def make_cnn_generator(config: CNNConfig, n_pixels: int, rng: np.random.Generator) -> MLP:
    return MLP(config.dims(n_pixels), rng)


def cnn_forward(gen: MLP, z) -> np.ndarray:
    return gen.forward(z)


def cnn_backward(gen: MLP, upstream) -> tuple[list[np.ndarray], np.ndarray]:
    return gen.backward(upstream)
