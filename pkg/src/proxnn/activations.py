"""Stable activation functions viewed as proximity operators.

Every activation in the catalog is monotone nondecreasing, 1-Lipschitz and
vanishes at 0, which makes it the proximity operator of a convex potential
minimized at 0.  The potential of each catalog entry is available through
:func:`activation_potential`, and :func:`prox_oracle_1d` provides an
independent brute-force proximity operator for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePotentialError

KINDS = (
    "linear",
    "salu",
    "softshrink",
    "relu",
    "prelu",
    "bent_identity",
    "isrlu",
    "isru",
    "arctan",
    "tanh",
    "elliott",
    "arcsinh",
    "logarithmic",
)


@dataclass(frozen=True)
class Activation:
    """Tagged catalog entry.

    ``lam`` is the soft-shrinkage threshold (softshrink only) and ``alpha``
    the negative-side slope in (0, 1] (prelu only).
    """

    kind: str
    lam: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "softshrink" and self.lam < 0:
            raise ValueError("softshrink threshold must be nonnegative")
        if self.kind == "prelu" and not 0.0 < self.alpha <= 1.0:
            raise ValueError("prelu slope must lie in (0, 1]")


def soft_shrink(x, lam):
    """Componentwise soft shrinkage with threshold ``lam``."""
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def activation_apply(act: Activation, x):
    """Evaluate the activation elementwise; scalars map to scalars."""
    x = np.asarray(x, dtype=float)
    k = act.kind
    if k == "linear":
        out = x
    elif k == "salu":
        out = np.clip(x, -1.0, 1.0)
    elif k == "softshrink":
        out = soft_shrink(x, act.lam)
    elif k == "relu":
        out = np.maximum(x, 0.0)
    elif k == "prelu":
        out = np.where(x > 0, x, act.alpha * x)
    elif k == "bent_identity":
        # shifted so that sigma(0) = 0; this is the prox of the catalog
        # potential x/2 - log(x + 1/2)/4
        out = 0.5 * (x - 1.0 + np.sqrt(x * x + 1.0))
    elif k == "isrlu":
        out = np.where(x >= 0, x, x / np.sqrt(x * x + 1.0))
    elif k == "isru":
        out = x / np.sqrt(x * x + 1.0)
    elif k == "arctan":
        out = (2.0 / math.pi) * np.arctan(x)
    elif k == "tanh":
        out = np.tanh(x)
    elif k == "elliott":
        out = x / (np.abs(x) + 1.0)
    elif k == "arcsinh":
        out = np.arcsinh(x)
    else:  # logarithmic
        out = np.sign(x) * np.log1p(np.abs(x))
    return out if out.ndim else float(out)


def activation_derivative(act: Activation, x):
    """Derivative of the activation; at kinks the flat-side value is taken.

    Conventions: relu'(0) = 0, softshrink'(+-lam) = 0, prelu'(0) = alpha,
    salu'(+-1) = 0.
    """
    x = np.asarray(x, dtype=float)
    k = act.kind
    if k == "linear":
        out = np.ones_like(x)
    elif k == "salu":
        out = np.where((x > -1.0) & (x < 1.0), 1.0, 0.0)
    elif k == "softshrink":
        out = np.where(np.abs(x) > act.lam, 1.0, 0.0)
    elif k == "relu":
        out = np.where(x > 0, 1.0, 0.0)
    elif k == "prelu":
        out = np.where(x > 0, 1.0, act.alpha)
    elif k == "bent_identity":
        out = 0.5 + 0.5 * x / np.sqrt(x * x + 1.0)
    elif k == "isrlu":
        out = np.where(x >= 0, 1.0, (x * x + 1.0) ** -1.5)
    elif k == "isru":
        out = (x * x + 1.0) ** -1.5
    elif k == "arctan":
        out = (2.0 / math.pi) / (1.0 + x * x)
    elif k == "tanh":
        out = 1.0 - np.tanh(x) ** 2
    elif k == "elliott":
        out = (np.abs(x) + 1.0) ** -2
    elif k == "arcsinh":
        out = (x * x + 1.0) ** -0.5
    else:  # logarithmic
        out = 1.0 / (np.abs(x) + 1.0)
    return out if out.ndim else float(out)


def _potential_scalar(act: Activation, x: float) -> float:
    k = act.kind
    a = abs(x)
    if k == "linear":
        return 0.0
    if k == "salu":
        return 0.0 if a <= 1.0 else math.inf
    if k == "softshrink":
        return act.lam * a
    if k == "relu":
        return 0.0 if x >= 0.0 else math.inf
    if k == "prelu":
        return 0.0 if x > 0 else (1.0 / act.alpha - 1.0) * 0.5 * x * x
    if k == "bent_identity":
        if x <= -0.5:
            return math.inf
        return 0.5 * x - 0.25 * math.log(x + 0.5)
    if k == "isrlu":
        if x >= 0:
            return 0.0
        if x < -1.0:
            return math.inf
        return 1.0 - 0.5 * x * x - math.sqrt(1.0 - x * x)
    if k == "isru":
        if a > 1.0:
            return math.inf
        return -0.5 * x * x - math.sqrt(1.0 - x * x)
    if k == "arctan":
        if a >= 1.0:
            return math.inf
        return -(2.0 / math.pi) * math.log(math.cos(0.5 * math.pi * x)) - 0.5 * x * x
    if k == "tanh":
        if a > 1.0:
            return math.inf
        if a == 1.0:
            # finite limit of x*arctanh(x) + (log(1-x^2) - x^2)/2 at the boundary
            return math.log(2.0) - 0.5
        return x * math.atanh(x) + 0.5 * (math.log1p(-x * x) - x * x)
    if k == "elliott":
        if a >= 1.0:
            return math.inf
        return -a - math.log1p(-a) - 0.5 * x * x
    if k == "arcsinh":
        return math.cosh(x) - 0.5 * x * x
    # logarithmic
    return math.exp(a) - a - 1.0 - 0.5 * x * x


def activation_potential(act: Activation, x):
    """Potential f with prox_f equal to the activation; +inf off its domain."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return _potential_scalar(act, float(x))
    return np.array([_potential_scalar(act, float(v)) for v in x.ravel()]).reshape(x.shape)


@dataclass(frozen=True)
class Potential1D:
    """Proper convex lower semi-continuous function on the reals.

    ``evaluate`` maps a float to a float where +inf marks points outside the
    effective domain; ``domain`` is a human-readable description.
    """

    evaluate: callable
    domain: str = "R"

    def __call__(self, x: float) -> float:
        return self.evaluate(x)


def potential_of(act: Activation) -> Potential1D:
    """The catalog potential wrapped as a :class:`Potential1D`."""
    return Potential1D(lambda v, a=act: _potential_scalar(a, v), domain=act.kind)


def _ternary_refine(obj, lo, hi, best, iters=64):
    """Ternary search on a convex objective over [lo, hi].

    ``best`` is an interior point with finite value; when both probes hit the
    +inf region the interval shrinks to the segment containing ``best``.
    """
    f_best = obj(best)
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1, f2 = obj(m1), obj(m2)
        if not math.isfinite(f1) and not math.isfinite(f2):
            if best < m1:
                hi = m1
            elif best > m2:
                lo = m2
            else:
                lo, hi = m1, m2
            continue
        if f1 <= f2:
            hi = m2
            if f1 < f_best:
                best, f_best = m1, f1
        else:
            lo = m1
            if f2 < f_best:
                best, f_best = m2, f2
        best = min(max(best, lo), hi)
    mid = 0.5 * (lo + hi)
    return mid if obj(mid) <= f_best else best


def prox_oracle_1d(potential, x: float, tol: float = 1e-8,
                   grid_points: int = 4096, ternary_iters: int = 64) -> float:
    """Brute-force proximity operator argmin_y 0.5*(x-y)^2 + f(y).

    Coarse grid scan over [x-R, x+R] with R = max(1, 2|x|), then ternary
    search on the bracketing interval.  The prox is nonexpansive, so the
    minimizer of any potential minimized at 0 lies inside this window.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    radius = max(1.0, 2.0 * abs(x))
    grid = np.linspace(x - radius, x + radius, grid_points)

    def obj(y):
        return 0.5 * (x - y) ** 2 + potential(float(y))

    vals = np.array([obj(y) for y in grid])
    if not np.any(np.isfinite(vals)):
        raise InfeasiblePotentialError(
            "potential is +inf on the whole search interval")
    finite = np.where(np.isfinite(vals), vals, np.inf)
    i = int(np.argmin(finite))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    return _ternary_refine(obj, lo, hi, grid[i], ternary_iters)
