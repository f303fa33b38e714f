"""Image-set comparison metrics."""

from __future__ import annotations

import numpy as np


def mse(a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.mean((a - b) ** 2))


def wasserstein_1d(u, v, p: float = 2) -> float:
    """p-Wasserstein distance between two equal-size empirical samples on the line."""
    u = np.sort(np.asarray(u, dtype=float).ravel())
    v = np.sort(np.asarray(v, dtype=float).ravel())
    if u.shape != v.shape:
        raise ValueError(f"sample counts differ: {u.size} vs {v.size}")
    return float(np.mean(np.abs(u - v) ** p) ** (1.0 / p))


def projections(dim: int, n_proj: int, rng: np.random.Generator) -> np.ndarray:
    if dim < 1:
        raise ValueError("zero-dimensional input")
    if n_proj < 1:
        raise ValueError("n_proj must be >= 1")
    dirs = rng.normal(size=(n_proj, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def swd(A, B, n_proj: int = 50, p: float = 2, rng: np.random.Generator | None = None,
        directions: np.ndarray | None = None) -> float:
    """Sliced Wasserstein distance between two point clouds of images.

    Rows of ``A`` and ``B`` are samples. Pass ``directions`` to reuse a fixed
    set of unit projection vectors across calls.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"pixel dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if directions is None:
        if rng is None:
            raise ValueError("need rng or directions")
        directions = projections(A.shape[1], n_proj, rng)
    pa = np.sort(A @ directions.T, axis=0)
    pb = np.sort(B @ directions.T, axis=0)
    if pa.shape != pb.shape:
        raise ValueError(f"sample counts differ: {A.shape[0]} vs {B.shape[0]}")
    per_proj = np.mean(np.abs(pa - pb) ** p, axis=0)
    return float(np.mean(per_proj) ** (1.0 / p))
