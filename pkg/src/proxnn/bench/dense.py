"""Unconstrained twin of the orthogonal network, for robustness baselines.

Mirrors the hidden-layer shape v -> V sigma(U v + b) with both factor
matrices free, so the only difference from the constrained model is the
missing manifold constraint.  Used as the comparison network in the
adversarial robustness experiment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..activations import Activation, activation_apply, activation_derivative
from ..errors import DimensionError, TrainingDivergedError


@dataclass(frozen=True)
class DenseLayer:
    up: np.ndarray       # n_k x d
    down: np.ndarray     # d x n_k
    bias: np.ndarray     # n_k


@dataclass(frozen=True)
class DenseParams:
    layers: tuple
    final_weight: np.ndarray
    final_bias: np.ndarray
    activation: Activation
    output_activation: str = "identity"

    @property
    def in_dim(self):
        return self.layers[0].up.shape[1]

    @property
    def out_dim(self):
        return self.final_weight.shape[0]


def random_dense(d: int, layer_dims, out_dim: int, seed,
                 activation=Activation("relu"),
                 output_activation: str = "logistic") -> DenseParams:
    rng = np.random.default_rng(seed)
    layers = []
    for n_k in layer_dims:
        layers.append(DenseLayer(rng.standard_normal((n_k, d)) / np.sqrt(d),
                                 rng.standard_normal((d, n_k)) / np.sqrt(n_k),
                                 np.zeros(n_k)))
    w = rng.standard_normal((out_dim, d)) / np.sqrt(d)
    return DenseParams(tuple(layers), w, np.zeros(out_dim), activation,
                       output_activation)


def _logistic(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def dense_forward(params: DenseParams, x: np.ndarray):
    """Batched forward pass; returns (output, per-layer cache)."""
    v = np.atleast_2d(np.asarray(x, dtype=float))
    cache = []
    for layer in params.layers:
        a = v @ layer.up.T + layer.bias
        r = activation_apply(params.activation, a)
        cache.append((v, a, r))
        v = r @ layer.down.T
    z = v @ params.final_weight.T + params.final_bias
    out = _logistic(z) if params.output_activation == "logistic" else z
    return out, (cache, v)


def dense_backprop(params: DenseParams, x: np.ndarray, y: np.ndarray):
    """Squared-loss gradients (summed over outputs, batch-averaged)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    out, (cache, hidden) = dense_forward(params, x)
    batch = x.shape[0]
    resid = out - y
    loss = float(np.mean(np.sum(resid ** 2, axis=1)))
    g = 2.0 * resid
    if params.output_activation == "logistic":
        g = g * out * (1.0 - out)
    grad_w = g.T @ hidden / batch
    grad_c = g.mean(axis=0)
    up = g @ params.final_weight
    layer_grads = []
    for layer, (v, a, r) in zip(reversed(params.layers), reversed(cache)):
        grad_down = up.T @ r / batch
        s = up @ layer.down
        u = activation_derivative(params.activation, a) * s
        grad_up = u.T @ v / batch
        grad_b = u.mean(axis=0)
        layer_grads.append((grad_up, grad_down, grad_b))
        up = u @ layer.up
    layer_grads.reverse()
    return {"layers": layer_grads, "final_weight": grad_w,
            "final_bias": grad_c}, loss


def dense_input_gradient(params: DenseParams, x: np.ndarray,
                         cotangent: np.ndarray) -> np.ndarray:
    """Gradient of cotangent . Phi(x) with respect to the input."""
    out, (cache, _) = dense_forward(params, x)
    g = np.atleast_2d(np.asarray(cotangent, dtype=float))
    if params.output_activation == "logistic":
        g = g * out * (1.0 - out)
    up = g @ params.final_weight
    for layer, (_, a, _) in zip(reversed(params.layers), reversed(cache)):
        u = activation_derivative(params.activation, a) * (up @ layer.down)
        up = u @ layer.up
    return up[0]


def dense_sgd_train(params: DenseParams, x: np.ndarray, y: np.ndarray,
                    batch_size: int, learning_rate: float, epochs: int,
                    seed: int = 0):
    """Plain SGD with shuffled epochs; returns (params, loss history)."""
    n = x.shape[0]
    if n == 0 or batch_size > n:
        raise DimensionError("bad dataset/batch size")
    rng = np.random.default_rng(seed)
    history = []
    for epoch in range(epochs):
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n - batch_size + 1, batch_size):
            idx = perm[start:start + batch_size]
            grads, loss = dense_backprop(params, x[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}", history=history)
            losses.append(loss / params.out_dim)
            lr = learning_rate
            layers = tuple(
                DenseLayer(l.up - lr * gu, l.down - lr * gd, l.bias - lr * gb)
                for l, (gu, gd, gb) in zip(params.layers, grads["layers"]))
            params = DenseParams(layers,
                                 params.final_weight - lr * grads["final_weight"],
                                 params.final_bias - lr * grads["final_bias"],
                                 params.activation, params.output_activation)
        history.append(float(np.mean(losses)) if losses else float("nan"))
    return params, history
