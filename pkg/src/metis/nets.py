"""Policy/value network: a plain numpy MLP over the 70-feature observation.

Shared tanh trunk (default two hidden layers of 512), then one softmax head
per action branch (two branches of two logits) and a scalar value head.
Parameters live in a single flat float64 vector so the optimizer, the
checkpoint writer, and finite-difference checks all see one array. forward()
is deterministic; backward() consumes upstream gradients on the logits and
value and returns the gradient in the same flat layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int = 70
    hidden_width: int = 512
    hidden_depth: int = 2
    branch_sizes: tuple[int, ...] = (2, 2)


class PolicyValueNet:
    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        dims = [cfg.input_dim] + [cfg.hidden_width] * cfg.hidden_depth
        self.trunk_dims = list(zip(dims[:-1], dims[1:]))
        self.feature_dim = dims[-1]

        self.shapes: list[tuple[str, tuple[int, ...]]] = []
        for i, (a, b) in enumerate(self.trunk_dims):
            self.shapes.append((f"trunk{i}.W", (a, b)))
            self.shapes.append((f"trunk{i}.b", (b,)))
        for k, nb in enumerate(cfg.branch_sizes):
            self.shapes.append((f"policy{k}.W", (self.feature_dim, nb)))
            self.shapes.append((f"policy{k}.b", (nb,)))
        self.shapes.append(("value.W", (self.feature_dim, 1)))
        self.shapes.append(("value.b", (1,)))

        self.offsets = {}
        total = 0
        for name, shape in self.shapes:
            size = int(np.prod(shape))
            self.offsets[name] = (total, total + size, shape)
            total += size
        self.n_params = total

    # -- parameter plumbing --------------------------------------------------

    def view(self, params: np.ndarray, name: str) -> np.ndarray:
        lo, hi, shape = self.offsets[name]
        return params[lo:hi].reshape(shape)

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        """Orthogonal trunk, small-gain policy heads, unit-gain value head."""
        params = np.zeros(self.n_params)
        for i in range(len(self.trunk_dims)):
            self.view(params, f"trunk{i}.W")[:] = _orthogonal(
                self.trunk_dims[i], rng, gain=np.sqrt(2.0))
        for k, nb in enumerate(self.cfg.branch_sizes):
            self.view(params, f"policy{k}.W")[:] = _orthogonal(
                (self.feature_dim, nb), rng, gain=0.01)
        self.view(params, "value.W")[:] = _orthogonal(
            (self.feature_dim, 1), rng, gain=1.0)
        return params

    # -- forward / backward --------------------------------------------------

    def forward(self, params: np.ndarray, obs: np.ndarray):
        """Returns (list of per-branch logits (N, b_k), values (N,), cache)."""
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        if obs.shape[1] != self.cfg.input_dim:
            raise ShapeError(
                f"expected obs dim {self.cfg.input_dim}, got {obs.shape[1]}")
        h = obs
        activations = [h]
        for i in range(len(self.trunk_dims)):
            z = h @ self.view(params, f"trunk{i}.W") + self.view(params, f"trunk{i}.b")
            h = np.tanh(z)
            activations.append(h)
        logits = [h @ self.view(params, f"policy{k}.W") + self.view(params, f"policy{k}.b")
                  for k in range(len(self.cfg.branch_sizes))]
        values = (h @ self.view(params, "value.W") + self.view(params, "value.b"))[:, 0]
        return logits, values, activations

    def backward(self, params: np.ndarray, activations: list[np.ndarray],
                 dlogits: list[np.ndarray], dvalue: np.ndarray) -> np.ndarray:
        """Gradient of sum(upstream * outputs) w.r.t. the flat parameters."""
        grad = np.zeros(self.n_params)
        h = activations[-1]
        dh = dvalue[:, None] @ self.view(params, "value.W").T
        self.view(grad, "value.W")[:] = h.T @ dvalue[:, None]
        self.view(grad, "value.b")[:] = dvalue.sum()
        for k in range(len(self.cfg.branch_sizes)):
            w = self.view(params, f"policy{k}.W")
            self.view(grad, f"policy{k}.W")[:] = h.T @ dlogits[k]
            self.view(grad, f"policy{k}.b")[:] = dlogits[k].sum(axis=0)
            dh = dh + dlogits[k] @ w.T
        for i in reversed(range(len(self.trunk_dims))):
            h = activations[i + 1]
            # d tanh(z) = 1 - tanh(z)^2
            dz = dh * (1.0 - h * h)
            self.view(grad, f"trunk{i}.W")[:] = activations[i].T @ dz
            self.view(grad, f"trunk{i}.b")[:] = dz.sum(axis=0)
            if i > 0:
                dh = dz @ self.view(params, f"trunk{i}.W").T
        return grad


def _orthogonal(shape: tuple[int, int], rng: np.random.Generator,
                gain: float) -> np.ndarray:
    a = rng.standard_normal(shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))  # fix sign ambiguity for determinism
    if shape[0] < shape[1]:
        q = q.T
    return gain * q[:shape[0], :shape[1]]


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
