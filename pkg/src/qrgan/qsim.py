"""Dense density-matrix simulation for small qubit registers.

Qubit 0 is the leftmost Kronecker factor (most significant bit of the basis
index). Density matrices and unitaries are plain complex ``ndarray`` objects;
the helpers here validate shapes and physical constraints on the way in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class PauliTerm:
    """A real coefficient times a tensor product of single-qubit Paulis."""

    coefficient: float
    axes: str

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient}")
        bad = set(self.axes) - set(PAULI)
        if bad:
            raise ValueError(f"unknown Pauli axes {sorted(bad)} in {self.axes!r}")


@dataclass
class Hamiltonian:
    n_qubits: int
    terms: list[PauliTerm] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        for term in self.terms:
            if len(term.axes) != self.n_qubits:
                raise ValueError(
                    f"term {term.axes!r} has {len(term.axes)} axes, expected {self.n_qubits}"
                )

    def add(self, coefficient: float, axes: str) -> None:
        term = PauliTerm(float(coefficient), axes)
        if len(axes) != self.n_qubits:
            raise ValueError(f"term {axes!r} has {len(axes)} axes, expected {self.n_qubits}")
        self.terms.append(term)

    def matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for term in self.terms:
            out += pauli_matrix(term, self.n_qubits)
        return out


def axes_string(n: int, ops: dict[int, str]) -> str:
    """Build an axes string with ``ops`` placed at the given qubit positions."""
    return "".join(ops.get(q, "I") for q in range(n))


def pauli_matrix(term: PauliTerm, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    if len(term.axes) != n:
        raise ValueError(f"term {term.axes!r} has {len(term.axes)} axes, expected {n}")
    return term.coefficient * reduce(np.kron, (PAULI[a] for a in term.axes))


def _as_matrix(H) -> np.ndarray:
    return H.matrix() if isinstance(H, Hamiltonian) else np.asarray(H, dtype=complex)


def is_hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def expm_hermitian(H, t: float) -> np.ndarray:
    """Return exp(-i H t) through the eigendecomposition of Hermitian ``H``."""
    M = _as_matrix(H)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not is_hermitian(M):
        raise ValueError("Hamiltonian is not Hermitian")
    evals, evecs = np.linalg.eigh(M)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def evolve(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    if rho.shape != U.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs U {U.shape}")
    return U @ rho @ U.conj().T


def n_qubits_of(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.ndim != 2 or rho.shape[1] != dim or 2**n != dim or n < 1:
        raise ValueError(f"not a multi-qubit operator: shape {rho.shape}")
    return n


def trace_out_qubit0(rho: np.ndarray) -> np.ndarray:
    n = n_qubits_of(rho)
    d = 2 ** (n - 1)
    r = rho.reshape(2, d, 2, d)
    return r[0, :, 0, :] + r[1, :, 1, :]


def replace_qubit0(rho: np.ndarray, x: float) -> np.ndarray:
    """Discard qubit 0 and re-prepare it in the diagonal state (I - x Z) / 2."""
    if not abs(x) <= 1.0:
        raise ValueError(f"input value {x} outside [-1, 1]")
    marginal = np.diag([(1.0 - x) / 2.0, (1.0 + x) / 2.0]).astype(complex)
    return np.kron(marginal, trace_out_qubit0(rho))


def reset_qubit0(rho: np.ndarray) -> np.ndarray:
    return replace_qubit0(rho, -1.0)


@lru_cache(maxsize=None)
def z_signs(n: int, qubit: int) -> np.ndarray:
    """Diagonal of Z acting on ``qubit`` in an ``n``-qubit register (read-only)."""
    idx = np.arange(2**n)
    signs = 1.0 - 2.0 * ((idx >> (n - 1 - qubit)) & 1)
    signs.setflags(write=False)
    return signs


def expect_z(rho: np.ndarray, qubit: int) -> float:
    n = n_qubits_of(rho)
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    return float(np.dot(z_signs(n, qubit), np.real(np.diagonal(rho))))


def zero_state(n: int) -> np.ndarray:
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9, eig_tol: float = 1e-8) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD within tolerance."""
    n_qubits_of(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace {tr} differs from 1")
    min_eig = np.linalg.eigvalsh(rho).min()
    if min_eig < -eig_tol:
        raise ValueError(f"negative eigenvalue {min_eig:.3e}")
