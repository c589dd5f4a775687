"""Self-check suites exercising the library's mathematical contracts.

Each suite returns a CheckResult; ``verify_all`` runs every suite.  The CLI
``verify`` subcommand exits nonzero if any suite fails, so these double as
an installation smoke test.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from .activations import Activation
from .errors import TrainingDivergedError
from .linops import (LinearOperator, TNorm, example_frame_potential,
                     frame_soft_shrink, prox_oracle)
from .network import (Layer, PpnnParams, TrainConfig, backprop, cyclic_pp,
                      forward_batch, nonexpansive_probe, random_ppnn,
                      sgd_train)
from .stiefel import (StiefelPoint, feasibility_residual, random_stiefel,
                      retract_cayley, retract_qr)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _result(name, passed, detail, t0):
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def check_frame_prox_equivalence() -> CheckResult:
    """Frame shrinkage equals the oracle prox of its potential in the T-norm."""
    t0 = time.perf_counter()
    op = LinearOperator(np.array([[1.0], [2.0]]))
    lam = 1.0 / 3.0
    b = np.zeros(2)

    def f(x):
        return example_frame_potential(lam, float(np.atleast_1d(x)[0]))

    norm = TNorm(op)
    worst = 0.0
    for x in np.linspace(-2.0, 2.0, 101):
        xv = np.array([x])
        direct = frame_soft_shrink(op, lam, b, xv)
        oracle = prox_oracle(f, norm, xv, tol=1e-6)
        worst = max(worst, float(np.abs(direct - oracle).max()))
    v1 = example_frame_potential(lam, 0.1)
    v2 = example_frame_potential(lam, 1.0)
    val_ok = abs(v1 - 0.0179167) <= 1e-6 and abs(v2 - 0.1977778) <= 1e-6
    passed = worst <= 1e-3 and val_ok
    return _result("frame-prox-equivalence", passed,
                   f"max prox deviation {worst:.2e}; potential values "
                   f"{v1:.7f}, {v2:.7f}", t0)


def pseudoinverse_loss(params: PpnnParams, x: np.ndarray, y: np.ndarray,
                       perturb=None) -> float:
    """Squared loss of the network with T^t replaced by T^+ off-manifold.

    ``perturb`` is an optional (field, layer index, delta) additive
    perturbation applied before evaluation; this is the reference objective
    for finite-difference gradient checks.
    """
    from .activations import activation_apply
    mats = [l.operator.copy() for l in params.layers]
    biases = [l.bias.copy() for l in params.layers]
    acts = [params.layer_activation(k) for k in range(len(params.layers))]
    w = params.final_weight.copy()
    c = params.final_bias.copy()
    if perturb is not None:
        kind, k, delta = perturb
        if kind == "T":
            mats[k] = mats[k] + delta
        elif kind == "b":
            biases[k] = biases[k] + delta
        elif kind == "W":
            w = w + delta
        elif kind == "c":
            c = c + delta
        elif kind == "lam":
            acts[k] = dataclasses.replace(acts[k], lam=acts[k].lam + delta)
        else:
            raise ValueError(kind)
    v = np.asarray(x, dtype=float)
    for t, bias, act in zip(mats, biases, acts):
        v = np.linalg.pinv(t) @ activation_apply(act, t @ v + bias)
    z = w @ v + c
    if params.output_activation == "logistic":
        z = 1.0 / (1.0 + np.exp(-z))
    return float(np.mean(np.sum((z - y) ** 2, axis=-1)))


def finite_difference_error(params: PpnnParams, x: np.ndarray, y: np.ndarray,
                            h: float = 1e-6) -> float:
    """Worst relative error of analytic vs central-difference gradients."""

    def fd(kind, k, like):
        out = np.zeros_like(like)
        it = np.nditer(like, flags=["multi_index"])
        for _ in it:
            delta = np.zeros_like(like)
            delta[it.multi_index] = h
            out[it.multi_index] = (
                pseudoinverse_loss(params, x, y, (kind, k, delta))
                - pseudoinverse_loss(params, x, y, (kind, k, -delta))) / (2 * h)
        return out

    def rel(analytic, numeric):
        # 1e-3 denominator floor realizes a 1e-8 absolute floor at 1e-5 rel
        scale = max(float(np.abs(numeric).max()), 1e-3)
        return float(np.abs(analytic - numeric).max()) / scale

    g = backprop(params, x, y)
    worst = 0.0
    for k, layer in enumerate(params.layers):
        worst = max(worst, rel(g.layers[k].grad_t, fd("T", k, layer.operator)))
        worst = max(worst, rel(g.layers[k].grad_b, fd("b", k, layer.bias)))
        if params.shrink_trainable and params.activation.kind == "softshrink" \
                and not params.shared_shrink:
            num = (pseudoinverse_loss(params, x, y, ("lam", k, h))
                   - pseudoinverse_loss(params, x, y, ("lam", k, -h))) / (2 * h)
            worst = max(worst, rel(np.array(g.shrink[k]), np.array(num)))
    if params.final_constraint == "unconstrained":
        worst = max(worst, rel(g.final_weight, fd("W", None, params.final_weight)))
    worst = max(worst, rel(g.final_bias, fd("c", None, params.final_bias)))
    return worst


def check_gradients(nets: int = 50, seed: int = 0) -> CheckResult:
    """Analytic gradients match finite differences on random small nets."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    kinds = ["softshrink", "tanh", "arcsinh", "isrlu", "elliott"]
    worst = 0.0
    for i in range(nets):
        d = int(rng.integers(2, 9))
        n_layers = int(rng.integers(1, 4))
        dims = [int(rng.integers(1, 9)) for _ in range(n_layers)]
        kind = kinds[i % len(kinds)]
        act = Activation(kind, lam=0.1 if kind == "softshrink" else 0.0)
        unconstrained = bool(rng.integers(0, 2))
        params = random_ppnn(
            d, dims, seed=int(rng.integers(1 << 31)), activation=act,
            final_constraint="unconstrained" if unconstrained else "identity",
            out_dim=int(rng.integers(1, 5)) if unconstrained else None,
            output_activation="logistic" if unconstrained and i % 2 else "identity",
            shrink_trainable=kind == "softshrink", shared_shrink=False)
        layers = tuple(Layer(l.point, 0.3 * rng.standard_normal(l.out_dim))
                       for l in params.layers)
        params = dataclasses.replace(params, layers=layers)
        x = rng.standard_normal(d)
        y = rng.standard_normal(params.out_dim)
        if params.output_activation == "logistic":
            y = rng.random(params.out_dim)
        worst = max(worst, finite_difference_error(params, x, y))
    return _result("gradient-correctness", worst <= 1e-5,
                   f"worst relative error {worst:.2e} over {nets} nets", t0)


def check_feasibility(steps: int = 10 ** 4, seed: int = 0) -> CheckResult:
    """Hidden layers stay on the manifold through a long SGD run."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    d = 16
    params = random_ppnn(d, [20, 16, 12], seed=seed,
                         activation=Activation("softshrink", lam=0.1),
                         shrink_trainable=True)
    batch = 8
    x = rng.standard_normal((batch * steps // 100, d))
    y = np.tanh(2 * x)
    epochs = int(np.ceil(steps * batch / x.shape[0]))
    config = TrainConfig(batch_size=batch, learning_rate=0.003, epochs=epochs,
                         seed=seed, retraction="cayley_fp", reorth_every=1000)
    try:
        trained, _ = sgd_train(params, x, y, config)
    except TrainingDivergedError as exc:
        return _result("manifold-feasibility", False, str(exc), t0)
    worst = max(feasibility_residual(l.point.matrix) for l in trained.layers)
    return _result("manifold-feasibility", worst < 1e-6,
                   f"worst feasibility residual {worst:.2e} after "
                   f"{steps} steps", t0)


def check_retractions(trials: int = 1000, seed: int = 0) -> CheckResult:
    """Fixed-point and direct Cayley agree; retractions are first order."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, n + 1))
        pt = random_stiefel(n, d, rng)
        xi = 0.1 * rng.standard_normal((n, d))
        direct = retract_cayley(pt, xi, method="direct").matrix
        fixed = retract_cayley(pt, xi, method="fixed_point").matrix
        worst = max(worst, float(np.abs(direct - fixed).max()))
    agree = worst <= 1e-8
    pt = random_stiefel(6, 3, seed)
    zero = np.zeros((6, 3))
    exact = (np.array_equal(retract_cayley(pt, zero, "direct").matrix, pt.matrix)
             and np.array_equal(
                 retract_cayley(pt, zero, "fixed_point").matrix, pt.matrix))
    from .stiefel import project_tangent
    xi = project_tangent(pt, rng.standard_normal((6, 3))).matrix
    rigid = True
    for retract in (lambda p, v: retract_cayley(p, v, "direct"),
                    retract_qr):
        for eps in (1e-3, 1e-4, 1e-5):
            err = np.linalg.norm(retract(pt, eps * xi).matrix
                                 - (pt.matrix + eps * xi))
            rigid = rigid and err <= 10.0 * (eps * np.linalg.norm(xi)) ** 2
    passed = agree and exact and rigid
    return _result("retraction-agreement", passed,
                   f"max fp/direct deviation {worst:.2e}; zero-step exact: "
                   f"{exact}; first-order rigidity: {rigid}", t0)


def check_nonexpansiveness(trials: int = 10 ** 4, seed: int = 0) -> CheckResult:
    """Random shrinkage networks are nonexpansive and averaged."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_lip = 0.0
    worst_avg = 0.0
    nets = 5
    for i in range(nets):
        d = int(rng.integers(4, 17))
        dims = [int(rng.integers(2, 2 * d)) for _ in range(int(rng.integers(1, 4)))]
        params = random_ppnn(d, dims, seed=i,
                             activation=Activation("softshrink", lam=0.2))
        layers = tuple(Layer(l.point, 0.5 * rng.standard_normal(l.out_dim))
                       for l in params.layers)
        params = dataclasses.replace(params, layers=layers)
        probe = nonexpansive_probe(params, trials // nets, seed=i)
        worst_lip = max(worst_lip, probe["lipschitz_estimate"])
        worst_avg = max(worst_avg, probe["averaged_residual"])
    passed = worst_lip <= 1.0 + 1e-9 and worst_avg <= 1e-9
    return _result("nonexpansiveness", passed,
                   f"max Lipschitz {worst_lip:.12f}, max averaged residual "
                   f"{worst_avg:.2e}", t0)


def check_cyclic_pp(iters: int = 10 ** 4) -> CheckResult:
    """Cyclic proximal point reaches the brute-force minimizer in 1-D."""
    t0 = time.perf_counter()
    layers = [Layer(StiefelPoint(np.eye(1)), np.array([-1.0])),
              Layer(StiefelPoint(np.eye(1)), np.array([-3.0]))]
    params = PpnnParams(layers, np.eye(1), np.zeros(1),
                        activation=Activation("softshrink", lam=1.0),
                        shrink=np.array([1.0, 2.0]))
    seq = 1.0 / np.arange(1, iters + 1)
    res = cyclic_pp(params, seq, np.array([10.0]), iters)
    grid = np.linspace(-2.0, 6.0, 80001)
    objective = 1.0 * np.abs(grid - 1.0) + 2.0 * np.abs(grid - 3.0)
    best = grid[int(np.argmin(objective))]
    err = float(np.abs(res["final"][0] - best))
    return _result("cyclic-proximal-point", err <= 1e-3,
                   f"|final - minimizer| = {err:.2e} (minimizer {best})", t0)


ALL_CHECKS = (
    check_frame_prox_equivalence,
    check_gradients,
    check_feasibility,
    check_retractions,
    check_nonexpansiveness,
    check_cyclic_pp,
)


def verify_all(checks=ALL_CHECKS):
    return [check() for check in checks]
