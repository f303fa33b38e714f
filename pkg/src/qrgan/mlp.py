"""Dense feed-forward network with hand-written backprop.

Used both as the GAN discriminator and as the classical generator baseline.
Hidden layers use ReLU, the output layer a logistic sigmoid whose
pre-activation is clamped to [-30, 30].
"""

from __future__ import annotations

import numpy as np

PREACT_CLAMP = 30.0


def sigmoid(a: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-a))


class MLP:
    def __init__(self, dims, rng: np.random.Generator | None = None, zero: bool = False):
        dims = [int(d) for d in dims]
        if len(dims) < 2 or min(dims) < 1:
            raise ValueError(f"invalid layer dims {dims}")
        self.dims = dims
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            if zero:
                W, b = np.zeros((fan_out, fan_in)), np.zeros(fan_out)
            else:
                # torch.nn.Linear default: U(-1/sqrt(fan_in), 1/sqrt(fan_in))
                bound = 1.0 / np.sqrt(fan_in)
                W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
                b = rng.uniform(-bound, bound, size=fan_out)
            self.weights.append(W)
            self.biases.append(b)
        self._cache = None

    @property
    def params(self) -> list[np.ndarray]:
        """Weights and biases interleaved: W0, b0, W1, b1, ..."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dims[0],):
            raise ValueError(f"input shape {x.shape}, expected ({self.dims[0]},)")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            a = W @ h + b
            if i < last:
                h = np.maximum(a, 0.0)
            else:
                pre = a
                h = sigmoid(np.clip(a, -PREACT_CLAMP, PREACT_CLAMP))
            acts.append(h)
        self._cache = (acts, pre)
        return h

    def backward(self, upstream) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients for the most recent ``forward`` call.

        ``upstream`` is dL/d(output). Returns gradients in ``params`` order and
        dL/d(input).
        """
        if self._cache is None:
            raise RuntimeError("backward called without a cached forward pass")
        acts, pre = self._cache
        out = acts[-1]
        g = np.asarray(upstream, dtype=float) * out * (1.0 - out)
        g = np.where(np.abs(pre) > PREACT_CLAMP, 0.0, g)
        grads: list[np.ndarray] = []
        for i in range(len(self.weights) - 1, -1, -1):
            h_in = acts[i]
            grads = [np.outer(g, h_in), g.copy()] + grads
            g = self.weights[i].T @ g
            if i > 0:
                g = g * (acts[i] > 0)
        return grads, g

    def step(self, grads: list[np.ndarray], lr: float) -> None:
        for p, g in zip(self.params, grads):
            p -= lr * g

    def __call__(self, x):
        return self.forward(x)
