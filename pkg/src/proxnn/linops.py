"""Dense linear operators, the operator-induced norm and frame shrinkage.

A :class:`LinearOperator` caches its SVD-based pseudoinverse, spectral norm
and rank.  The induced norm ||x||_T^2 = ||Tx||^2/||T||^2 + ||P_N(T) x||^2
turns the frame soft shrinkage map T+ S_lam(Tx + b) into a genuine proximity
operator; :func:`composite_potential_value` evaluates the convex function it
is the prox of, and :func:`prox_oracle` certifies the relation numerically
at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import Potential1D, soft_shrink
from .errors import InfeasiblePotentialError, UnsupportedDimensionError

_PINV_RCOND = 1e-12


def pseudoinverse(matrix: np.ndarray, rcond: float = _PINV_RCOND) -> np.ndarray:
    """Moore-Penrose inverse via SVD with relative singular value cutoff."""
    return np.linalg.pinv(np.asarray(matrix, dtype=float), rcond=rcond)


class LinearOperator:
    """An n x d real matrix with cached pseudoinverse, norm and rank."""

    def __init__(self, matrix):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        u, s, vt = np.linalg.svd(self.matrix, full_matrices=True)
        self.op_norm = float(s[0]) if s.size else 0.0
        cutoff = _PINV_RCOND * self.op_norm
        self.rank = int(np.sum(s > cutoff))
        s_inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
        self.pinv = (vt.T[:, : s.size] * s_inv) @ u.T[: s.size, :]
        # orthonormal basis of N(T*): left singular vectors beyond the rank
        self._null_adjoint_basis = u[:, self.rank:]

    @property
    def shape(self):
        return self.matrix.shape

    def range_adjoint_projector(self) -> np.ndarray:
        """Projection onto R(T*), equal to T+ T."""
        return self.pinv @ self.matrix

    def null_projector(self) -> np.ndarray:
        """Projection onto N(T), equal to I - T+ T."""
        d = self.matrix.shape[1]
        return np.eye(d) - self.pinv @ self.matrix

    def null_adjoint_basis(self) -> np.ndarray:
        """Orthonormal columns spanning N(T*)."""
        return self._null_adjoint_basis


def t_norm(op: LinearOperator, x) -> float:
    """Norm induced by the operator: (||Tx||^2/||T||^2 + ||P_N(T)x||^2)^(1/2)."""
    x = np.asarray(x, dtype=float).ravel()
    tx = op.matrix @ x
    null_part = x - op.pinv @ tx
    return float(np.sqrt(tx @ tx / op.op_norm**2 + null_part @ null_part))


@dataclass(frozen=True)
class TNorm:
    """Callable wrapper tying the induced norm to its operator."""

    op: LinearOperator

    def __call__(self, x) -> float:
        return t_norm(self.op, x)


def frame_soft_shrink(op: LinearOperator, lam: float, b, x) -> np.ndarray:
    """Apply T+ S_lam(Tx + b)."""
    x = np.asarray(x, dtype=float).ravel()
    b = np.broadcast_to(np.asarray(b, dtype=float).ravel(), (op.matrix.shape[0],))
    return op.pinv @ soft_shrink(op.matrix @ x + b, lam)


def example_frame_potential(lam: float, y) -> float:
    """Closed-form potential of the frame shrinkage for T = (1, 2)^t.

    Piecewise: (lam/2)|y| + y^2/8 on |y| <= 2*lam/5, else (3*lam/5)|y| -
    lam^2/50.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    inner = 0.5 * lam * a + y * y / 8.0
    outer = 0.6 * lam * a - lam * lam / 50.0
    out = np.where(a <= 0.4 * lam, inner, outer)
    return out if out.ndim else float(out)


def _grid_minimize(obj, dim: int, center, radius: float, tol: float,
                   points: int = 17):
    """Nested grid search for a convex objective on a shrinking box."""
    center = np.array(center, dtype=float)
    found_finite = False
    while True:
        axes = [np.linspace(c - radius, c + radius, points) for c in center]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        vals = obj(mesh)
        if np.any(np.isfinite(vals)):
            found_finite = True
            center = mesh[int(np.argmin(np.where(np.isfinite(vals), vals, np.inf)))]
        elif found_finite:
            raise AssertionError("lost the feasible region while refining")
        spacing = 2.0 * radius / (points - 1)
        if found_finite and spacing < tol:
            return center
        if not found_finite:
            if radius > 1e6:
                raise InfeasiblePotentialError(
                    "objective is +inf on the whole search box")
            radius *= 4.0
        else:
            radius = 2.0 * spacing


def composite_potential_value(g: Potential1D, op: LinearOperator, b, x,
                              tol: float = 1e-8) -> float:
    """Value of the potential whose prox (in the induced norm) is frame shrinkage.

    With z = Tx + b, returns
    [min over z2 in N(T*) of 0.5*||z2||^2 + sum_i g(z_i + z2_i)] / ||T||^2
    and +inf when x is outside R(T*).  ``g`` acts separably on components.
    """
    x = np.asarray(x, dtype=float).ravel()
    n, d = op.matrix.shape
    null_dim = n - op.rank
    if d + null_dim > 3:
        raise UnsupportedDimensionError(
            f"free dimension {d + null_dim} exceeds the oracle limit of 3")
    # scale-invariant membership test for R(T*)
    residual = x - op.range_adjoint_projector() @ x
    if np.linalg.norm(residual) > tol * (1.0 + np.linalg.norm(x)):
        return np.inf
    z = op.matrix @ x + np.broadcast_to(np.asarray(b, dtype=float).ravel(), (n,))

    def g_sum(rows):
        return np.array([sum(g(float(v)) for v in row) for row in rows])

    if null_dim == 0:
        return g_sum(z[None, :])[0] / op.op_norm**2
    basis = op.null_adjoint_basis()

    def obj(coeffs):
        pts = z[None, :] + coeffs @ basis.T
        return 0.5 * np.sum(coeffs**2, axis=1) + g_sum(pts)

    start_radius = max(1.0, 2.0 * float(np.linalg.norm(z)))
    c = _grid_minimize(obj, null_dim, np.zeros(null_dim), start_radius, tol)
    return float(obj(c[None, :])[0]) / op.op_norm**2


def prox_oracle(f, norm: TNorm, x, tol: float = 1e-6) -> np.ndarray:
    """Brute-force argmin_y 0.5*||x-y||_T^2 + f(y) for d <= 3.

    ``f`` maps a d-vector to an extended real.  Nested grid refinement keeps
    the search robust to +inf regions of ``f``.
    """
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    if d > 3:
        raise UnsupportedDimensionError("prox oracle supports d <= 3 only")

    def obj(points):
        out = np.empty(len(points))
        for i, y in enumerate(points):
            fy = f(y if d > 1 else float(y[0]))
            out[i] = 0.5 * norm(x - y) ** 2 + fy if np.isfinite(fy) else np.inf
        return out

    radius = max(1.0, 2.0 * float(np.linalg.norm(x)))
    y = _grid_minimize(obj, d, x, radius, tol)
    return y
