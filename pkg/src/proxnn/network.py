"""Proximal neural networks with orthogonality-constrained layers.

A network is a chain of hidden layers v -> T^t sigma(T v + b), where each T
has orthonormal columns (tall) or orthonormal rows (wide), followed by an
affine output map that is either the identity matrix with a free bias or a
fully trainable dense layer.  With a stable activation every hidden layer is
a proximity operator, so the full network is averaged and nonexpansive when
the output map is the identity.

Training runs stochastic gradient descent where the hidden operators move
along the Stiefel manifold via a retraction instead of a plain additive
update.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .activations import Activation, activation_apply, activation_derivative, soft_shrink
from .errors import (ContractViolationError, DimensionError,
                     TrainingDivergedError)
from .stiefel import (StiefelPoint, feasibility_residual, random_stiefel,
                      reorthonormalize, retract_cayley, retract_qr)

OUTPUT_ACTIVATIONS = ("identity", "logistic")
FINAL_CONSTRAINTS = ("identity", "unconstrained")


@dataclass(frozen=True)
class Layer:
    """One hidden layer: operator on the Stiefel manifold plus a bias.

    The operator acting on inputs is ``point.matrix`` for tall layers and
    ``point.matrix.T`` for wide ones, so that either T^t T = I or T T^t = I.
    """

    point: StiefelPoint
    bias: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bias, dtype=float)
        object.__setattr__(self, "bias", b)
        if b.shape != (self.out_dim,):
            raise DimensionError(
                f"bias has shape {b.shape}, expected ({self.out_dim},)")

    @property
    def operator(self) -> np.ndarray:
        m = self.point.matrix
        return m.T if self.point.wide else m

    @property
    def in_dim(self) -> int:
        return self.operator.shape[1]

    @property
    def out_dim(self) -> int:
        return self.operator.shape[0]


@dataclass(frozen=True)
class PpnnParams:
    """Full parameter set of a proximal neural network.

    ``shrink`` holds one soft-shrinkage threshold per hidden layer; it is
    ignored unless the activation kind is ``softshrink``.  ``shared_shrink``
    ties all thresholds to a single trainable scalar.
    """

    layers: tuple
    final_weight: np.ndarray
    final_bias: np.ndarray
    final_constraint: str = "identity"
    activation: Activation = Activation("softshrink", lam=0.1)
    output_activation: str = "identity"
    shrink: np.ndarray = field(default=None)
    shrink_trainable: bool = False
    shared_shrink: bool = True

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise DimensionError("need at least one hidden layer")
        d = self.layers[0].in_dim
        for k, layer in enumerate(self.layers):
            if layer.in_dim != d:
                raise DimensionError(
                    f"layer {k} maps R^{layer.in_dim}, expected R^{d}")
        w = np.asarray(self.final_weight, dtype=float)
        c = np.asarray(self.final_bias, dtype=float)
        object.__setattr__(self, "final_weight", w)
        object.__setattr__(self, "final_bias", c)
        if self.final_constraint not in FINAL_CONSTRAINTS:
            raise ValueError(f"unknown final constraint {self.final_constraint!r}")
        if self.final_constraint == "identity":
            if w.shape != (d, d) or not np.array_equal(w, np.eye(d)):
                raise ContractViolationError(
                    "identity-constrained final weight must be the identity")
        if w.shape[1] != d or c.shape != (w.shape[0],):
            raise DimensionError("final layer dimensions are inconsistent")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(
                f"unknown output activation {self.output_activation!r}")
        if self.shrink is None:
            s = np.full(len(self.layers), self.activation.lam, dtype=float)
        else:
            s = np.asarray(self.shrink, dtype=float).copy()
        if s.shape != (len(self.layers),):
            raise DimensionError("need one shrinkage threshold per layer")
        object.__setattr__(self, "shrink", s)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.final_weight.shape[0]

    def layer_activation(self, k: int) -> Activation:
        if self.activation.kind == "softshrink":
            return dataclasses.replace(self.activation, lam=float(self.shrink[k]))
        return self.activation


def random_ppnn(d: int, layer_dims, seed, activation=Activation("softshrink", lam=0.1),
                final_constraint: str = "identity", out_dim: int = None,
                output_activation: str = "identity",
                shrink_trainable: bool = False, shared_shrink: bool = True) -> PpnnParams:
    """Random network with zero biases; each layer drawn via seeded QR."""
    rng = np.random.default_rng(seed)
    layers = []
    for n_k in layer_dims:
        wide = n_k < d
        rows, cols = (d, n_k) if wide else (n_k, d)
        pt = random_stiefel(rows, cols, rng)
        layers.append(Layer(StiefelPoint(pt.matrix, wide=wide), np.zeros(n_k)))
    if final_constraint == "identity":
        w, c = np.eye(d), np.zeros(d)
    else:
        m = d if out_dim is None else out_dim
        w = rng.standard_normal((m, d)) / np.sqrt(d)
        c = np.zeros(m)
    return PpnnParams(layers, w, c, final_constraint, activation,
                      output_activation, shrink_trainable=shrink_trainable,
                      shared_shrink=shared_shrink)


@dataclass(frozen=True)
class ForwardTape:
    """Batch cache of every intermediate quantity of a forward pass.

    Arrays carry a leading batch axis: ``inputs[k]`` is the input to hidden
    layer k, ``pre[k] = inputs[k] @ T_k^t + b_k``, ``activated[k]`` its image
    under the activation, ``hidden`` the last hidden state, ``pre_out`` the
    affine output before the output activation, and ``output`` the result.
    """

    inputs: tuple
    pre: tuple
    activated: tuple
    hidden: np.ndarray
    pre_out: np.ndarray
    output: np.ndarray


def forward_batch(params: PpnnParams, x: np.ndarray) -> ForwardTape:
    """Evaluate the network on a (B, d) batch and record the tape."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 2 or v.shape[1] != params.in_dim:
        raise DimensionError(
            f"expected batch of shape (B, {params.in_dim}), got {v.shape}")
    inputs, pres, acts = [], [], []
    for k, layer in enumerate(params.layers):
        t = layer.operator
        a = v @ t.T + layer.bias
        r = activation_apply(params.layer_activation(k), a)
        inputs.append(v)
        pres.append(a)
        acts.append(r)
        v = r @ t
    z = v @ params.final_weight.T + params.final_bias
    out = _logistic(z) if params.output_activation == "logistic" else z
    return ForwardTape(tuple(inputs), tuple(pres), tuple(acts), v, z, out)


def forward(params: PpnnParams, x: np.ndarray):
    """Evaluate on a single d-vector; returns (output, tape)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {x.shape}")
    tape = forward_batch(params, x[None, :])
    return tape.output[0], tape


def _logistic(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class LayerGradient:
    """Gradients of one hidden layer, in operator (n_k x d) shape."""

    grad_t: np.ndarray
    grad_b: np.ndarray
    grad_input: np.ndarray
    grad_lambda: float = 0.0


def layer_grad(t: np.ndarray, b: np.ndarray, v_in: np.ndarray,
               upstream: np.ndarray, act: Activation,
               wide: bool = False, want_lambda: bool = False) -> LayerGradient:
    """Analytic gradients of v -> T^t sigma(T v + b) for a single sample.

    ``upstream`` is the loss gradient with respect to the layer output.  The
    operator gradient is taken with respect to the pseudoinverse extension
    T |-> T^+ sigma(T v + b), which agrees with the transpose form on the
    manifold; the tall and wide constraints yield different correction
    terms off it.
    """
    g = _layer_grad_batch(t, b, v_in[None, :], upstream[None, :], act, wide,
                          want_lambda)
    return g


def _layer_grad_batch(t, b, v, up, act, wide, want_lambda):
    a = v @ t.T + b
    r = activation_apply(act, a)
    dr = activation_derivative(act, a)
    ta = up @ t.T                    # rows T t_i
    u = dr * ta                      # rows Sigma T t_i
    batch = v.shape[0]
    s = r @ t                        # rows s_i = T^t r_i
    ts = up.T @ s                    # sum_i t_i s_i^t
    if wide:
        grad_t = r.T @ up @ (np.eye(t.shape[1]) - t.T @ t) - t @ ts + u.T @ v
    else:
        grad_t = -t @ (ts + ts.T) + r.T @ up + u.T @ v
    grad_b = u.sum(axis=0)
    # grad_input stays per-sample (it feeds the next layer's chain rule);
    # the 1/B averaging applies to parameter gradients only.
    grad_input = u @ t
    grad_lambda = 0.0
    if want_lambda and act.kind == "softshrink":
        dlam = -np.sign(a) * (np.abs(a) > act.lam)
        grad_lambda = float(np.sum(dlam * ta))
    scale = 1.0 / batch
    return LayerGradient(grad_t * scale, grad_b * scale,
                         grad_input if batch > 1 else grad_input[0],
                         grad_lambda * scale)


@dataclass(frozen=True)
class NetworkGradients:
    """Mean-over-batch gradients for every trainable parameter."""

    layers: tuple               # LayerGradient per hidden layer
    final_weight: np.ndarray
    final_bias: np.ndarray
    shrink: np.ndarray          # per-layer threshold gradients
    loss: float


def backprop(params: PpnnParams, x: np.ndarray, y: np.ndarray) -> NetworkGradients:
    """Squared-loss gradients, averaged over the batch.

    ``x`` is (B, d) or a single d-vector, ``y`` matches the output shape.
    Loss per sample is ||Phi(x) - y||^2 summed over output components, so
    the gradients match the per-batch averaged squared error that the
    manifold SGD steps are scaled against.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = x.ndim == 1
    if single:
        x, y = x[None, :], np.atleast_1d(y)[None, :] if y.ndim <= 1 else y
    if x.shape[0] == 0:
        raise DimensionError("empty batch")
    if y.shape != (x.shape[0], params.out_dim):
        raise DimensionError(
            f"targets have shape {y.shape}, expected {(x.shape[0], params.out_dim)}")
    batch = x.shape[0]
    tape = forward_batch(params, x)
    resid = tape.output - y
    loss = float(np.mean(np.sum(resid ** 2, axis=1)))
    gz = 2.0 * resid
    if params.output_activation == "logistic":
        gz = gz * tape.output * (1.0 - tape.output)
    grad_w = gz.T @ tape.hidden / batch
    grad_c = gz.mean(axis=0)
    up = gz @ params.final_weight
    layer_grads = []
    want_lam = params.shrink_trainable and params.activation.kind == "softshrink"
    for k in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[k]
        g = _layer_grad_batch(layer.operator, layer.bias, tape.inputs[k], up,
                              params.layer_activation(k), layer.point.wide,
                              want_lam)
        layer_grads.append(g)
        up = np.atleast_2d(g.grad_input)
    layer_grads.reverse()
    shrink = np.array([g.grad_lambda for g in layer_grads])
    if params.shared_shrink:
        shrink = np.full_like(shrink, shrink.sum())
    return NetworkGradients(tuple(layer_grads), grad_w, grad_c, shrink, loss)


def input_gradient(params: PpnnParams, x: np.ndarray, cotangent: np.ndarray) -> np.ndarray:
    """Gradient of cotangent . Phi(x) with respect to the input x."""
    x = np.asarray(x, dtype=float)
    tape = forward_batch(params, x[None, :])
    g = np.asarray(cotangent, dtype=float)[None, :]
    if params.output_activation == "logistic":
        g = g * tape.output * (1.0 - tape.output)
    up = g @ params.final_weight
    for k in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[k]
        t = layer.operator
        dr = activation_derivative(params.layer_activation(k), tape.pre[k])
        up = (dr * (up @ t.T)) @ t
    return up[0]


@dataclass(frozen=True)
class TrainConfig:
    """SGD settings: batching, learning-rate schedule, retraction choice."""

    batch_size: int
    learning_rate: float
    epochs: int
    seed: int = 0
    schedule: str = "constant"      # or "step"
    step_every: int = 10            # epochs between decays (step schedule)
    step_factor: float = 0.5
    retraction: str = "cayley_fp"   # cayley_fp | cayley | qr
    reorth_every: int = 1000        # steps between explicit re-orthonormalizations
    shrink_rate: float = 1.0        # shrinkage rate relative to the base rate

    def rate(self, epoch: int) -> float:
        if self.schedule == "constant":
            return self.learning_rate
        if self.schedule == "step":
            return self.learning_rate * self.step_factor ** (epoch // self.step_every)
        raise ValueError(f"unknown schedule {self.schedule!r}")


def _retract_layer(layer: Layer, grad_t: np.ndarray, lr: float, how: str) -> StiefelPoint:
    step = -lr * grad_t
    if layer.point.wide:
        step = step.T
    if how == "qr":
        from .stiefel import project_tangent
        return retract_qr(layer.point, project_tangent(layer.point, step))
    if how == "cayley":
        return retract_cayley(layer.point, step, method="direct")
    if how == "cayley_fp":
        return retract_cayley(layer.point, step, method="fixed_point")
    raise ValueError(f"unknown retraction {how!r}")


def sgd_train(params: PpnnParams, x: np.ndarray, y: np.ndarray,
              config: TrainConfig):
    """Manifold SGD with shuffled epochs; returns (trained params, history).

    History is the mean training loss per epoch, recorded per output
    component for comparability across signal lengths.  Hidden operators
    are updated by the configured retraction, biases and the final layer
    by plain gradient steps, and (if enabled) the shrinkage thresholds by
    gradient steps on the per-component averaged loss, clipped at zero.
    A non-finite loss aborts with the history gathered so far attached to
    the error.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if n == 0:
        raise DimensionError("empty dataset")
    if config.batch_size > n:
        raise DimensionError("batch size exceeds dataset size")
    rng = np.random.default_rng(config.seed)
    history = []
    step = 0
    for epoch in range(config.epochs):
        lr = config.rate(epoch)
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n - config.batch_size + 1, config.batch_size):
            idx = perm[start:start + config.batch_size]
            grads = backprop(params, x[idx], y[idx])
            if not np.isfinite(grads.loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, step {step}",
                    history=history)
            losses.append(grads.loss / params.out_dim)
            new_layers = []
            for layer, g in zip(params.layers, grads.layers):
                pt = _retract_layer(layer, g.grad_t, lr, config.retraction)
                if config.reorth_every and (step + 1) % config.reorth_every == 0:
                    pt = reorthonormalize(pt.matrix, wide=pt.wide)
                new_layers.append(Layer(pt, layer.bias - lr * g.grad_b))
            if params.final_constraint == "unconstrained":
                w = params.final_weight - lr * grads.final_weight
            else:
                w = params.final_weight
            c = params.final_bias - lr * grads.final_bias
            shrink = params.shrink
            if params.shrink_trainable:
                lam_lr = lr * config.shrink_rate / params.out_dim
                shrink = np.maximum(params.shrink - lam_lr * grads.shrink, 0.0)
            params = PpnnParams(new_layers, w, c, params.final_constraint,
                                params.activation, params.output_activation,
                                shrink, params.shrink_trainable,
                                params.shared_shrink)
            step += 1
        history.append(float(np.mean(losses)) if losses else float("nan"))
    return params, history


def nonexpansive_probe(params: PpnnParams, trials: int, seed: int = 0,
                       alpha: float = None) -> dict:
    """Empirical Lipschitz and averagedness check over random input pairs.

    Requires the identity-constrained final layer; with K-1 proximal hidden
    layers the network is averaged with constant alpha = (K-1)/K, so the
    reflected map R = (Phi - (1-alpha) I)/alpha should be nonexpansive.
    """
    if params.final_constraint != "identity":
        raise ContractViolationError(
            "averagedness probe needs the identity-constrained final layer")
    kk = len(params.layers) + 1
    if alpha is None:
        alpha = (kk - 1) / kk
    rng = np.random.default_rng(seed)
    d = params.in_dim
    xs = rng.standard_normal((trials, d))
    ys = rng.standard_normal((trials, d))
    fx = forward_batch(params, xs).output
    fy = forward_batch(params, ys).output
    dxy = np.linalg.norm(xs - ys, axis=1)
    lip = float(np.max(np.linalg.norm(fx - fy, axis=1) / dxy))
    rx = (fx - (1.0 - alpha) * xs) / alpha
    ry = (fy - (1.0 - alpha) * ys) / alpha
    resid = float(np.max(np.maximum(
        np.linalg.norm(rx - ry, axis=1) - dxy, 0.0)))
    return {"lipschitz_estimate": lip, "averaged_residual": resid,
            "alpha": alpha, "trials": trials}


def lambda_seq_in_l2(lambda_seq: np.ndarray) -> bool:
    """Heuristic square-summability check: small, shrinking tail mass."""
    sq = np.asarray(lambda_seq, dtype=float) ** 2
    total = sq.sum()
    if total == 0.0:
        return True
    tail = sq[len(sq) // 2:].sum()
    return tail / total < 0.45


def cyclic_pp(params: PpnnParams, lambda_seq, x0: np.ndarray, iters: int) -> dict:
    """Cyclic proximal point iteration through the hidden layers.

    Each hidden layer must be square orthogonal; its proximal map at step
    size mu is x -> T^t S_{mu lam}(T x + b) - T^t b, the proximity operator
    of x -> lam |T x + b|_1.  Square-summable (but not summable) step sizes
    give convergence to a minimizer of the sum of these potentials; with
    other sequences the run still completes and the diagnostic flags it.
    """
    d = params.in_dim
    for k, layer in enumerate(params.layers):
        t = layer.operator
        if t.shape != (d, d) or feasibility_residual(t) > 1e-8:
            raise ContractViolationError(
                f"cyclic proximal point needs square orthogonal layers; "
                f"layer {k} has shape {t.shape}")
    if params.activation.kind != "softshrink":
        raise ContractViolationError(
            "cyclic proximal point is defined for soft-shrinkage potentials")
    lambda_seq = np.asarray(lambda_seq, dtype=float)
    if lambda_seq.ndim != 1 or len(lambda_seq) < iters or np.any(lambda_seq <= 0):
        raise DimensionError("need a positive step size per iteration")
    x = np.asarray(x0, dtype=float).copy()
    history = [x.copy()]
    for r in range(iters):
        mu = lambda_seq[r]
        for k, layer in enumerate(params.layers):
            t, b = layer.operator, layer.bias
            lam = float(params.shrink[k])
            x = t.T @ soft_shrink(t @ x + b, mu * lam) - t.T @ b
        history.append(x.copy())
    return {"iterates": np.array(history), "final": x,
            "lambda_seq_in_l2": lambda_seq_in_l2(lambda_seq[:iters])}
