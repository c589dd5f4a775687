"""Stiefel manifold geometry: tangent projection and retractions.

Points are n x d matrices with orthonormal columns.  Operators whose rows
(rather than columns) are orthonormal are stored transposed with the
``wide`` orientation flag, so a single code path covers both Parseval
conventions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, RetractionError

log = logging.getLogger(__name__)

FEASIBILITY_ATOL = 1e-8


def _qf(matrix: np.ndarray) -> np.ndarray:
    """Q factor with the positive-diagonal convention; raises on rank loss."""
    q, r = np.linalg.qr(matrix)
    diag = np.diag(r)
    if np.any(np.abs(diag) < 1e-12 * max(1.0, np.abs(diag).max(initial=1.0))):
        raise RetractionError("matrix is numerically rank deficient")
    signs = np.sign(diag)
    return q * signs


def feasibility_residual(matrix: np.ndarray) -> float:
    """Frobenius norm of T^t T - I."""
    d = matrix.shape[1]
    return float(np.linalg.norm(matrix.T @ matrix - np.eye(d)))


@dataclass(frozen=True)
class StiefelPoint:
    """n x d matrix with orthonormal columns (n >= d).

    ``wide`` records that the owning operator is the transpose of the stored
    matrix; the geometry below never needs to know.
    """

    matrix: np.ndarray
    wide: bool = False
    atol: float = FEASIBILITY_ATOL

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        n, d = m.shape
        if n < d:
            raise DimensionError(f"need n >= d, got {n} x {d}")
        res = feasibility_residual(m)
        if res > self.atol:
            raise DimensionError(
                f"columns are not orthonormal (residual {res:.3e})")

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class TangentVector:
    """Element of the tangent space at ``base``."""

    matrix: np.ndarray
    base: StiefelPoint


@dataclass(frozen=True)
class SkewGenerator:
    """Skew-symmetric n x n matrix generating a Cayley retraction."""

    w: np.ndarray

    def __post_init__(self):
        res = float(np.linalg.norm(self.w + self.w.T))
        if res > 1e-10:
            raise DimensionError(f"matrix is not skew-symmetric ({res:.3e})")


def random_stiefel(n: int, d: int, seed) -> StiefelPoint:
    """Q factor of an n x d standard normal matrix; deterministic per seed."""
    if n < d:
        raise DimensionError(f"need n >= d, got {n} x {d}")
    rng = np.random.default_rng(seed)
    return StiefelPoint(_qf(rng.standard_normal((n, d))))


def project_tangent(point: StiefelPoint, x: np.ndarray) -> TangentVector:
    """Orthogonal projection (I - TT^t)X + T(T^t X - X^t T)/2."""
    t = point.matrix
    x = np.asarray(x, dtype=float)
    if x.shape != t.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {t.shape}")
    sym = t.T @ x
    proj = x - t @ sym + 0.5 * t @ (sym - x.T @ t)
    return TangentVector(proj, point)


def skew_generator(point: StiefelPoint, x: np.ndarray) -> SkewGenerator:
    """W = What - What^t with What = X T^t - T (T^t X T^t)/2.

    The same W results from any ambient X and from its tangent projection,
    and P_T X = W T.
    """
    t = point.matrix
    x = np.asarray(x, dtype=float)
    if x.shape != t.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {t.shape}")
    what = x @ t.T - 0.5 * t @ (t.T @ x @ t.T)
    return SkewGenerator(what - what.T)


def retract_qr(point: StiefelPoint, x) -> StiefelPoint:
    """QR retraction qf(T + X)."""
    xm = x.matrix if isinstance(x, TangentVector) else np.asarray(x, dtype=float)
    return StiefelPoint(_qf(point.matrix + xm), wide=point.wide)


def spectral_radius_estimate(w: np.ndarray, iters: int = 50, seed: int = 0) -> float:
    """Power iteration estimate of the largest singular value of ``w``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(w.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        u = w.T @ (w @ v)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return 0.0
        est = np.sqrt(nrm)
        v = u / nrm
    return float(est)


def _cayley_direct(w: np.ndarray, t: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    try:
        return np.linalg.solve(np.eye(n) - 0.5 * w, t + 0.5 * (w @ t))
    except np.linalg.LinAlgError as exc:
        raise RetractionError("Cayley system is singular") from exc


def retract_cayley(point: StiefelPoint, x, method: str = "direct",
                   tol: float = 1e-10, maxit: int = 200) -> StiefelPoint:
    """Cayley retraction (I - W/2)^(-1) (I + W/2) T.

    ``x`` may be any ambient matrix; its skew generator and that of its
    tangent projection coincide, so no explicit projection is needed.  With
    ``method="fixed_point"`` the linear solve is replaced by the iteration
    R <- W R / 2 + (I + W/2) T, valid when rho(W)/2 < 1; otherwise the
    direct solve is used as a fallback.
    """
    xm = x.matrix if isinstance(x, TangentVector) else np.asarray(x, dtype=float)
    t = point.matrix
    w = skew_generator(point, xm).w
    if method == "direct":
        r = _cayley_direct(w, t)
    elif method == "fixed_point":
        if 0.5 * spectral_radius_estimate(w) >= 0.95:
            log.warning("fixed-point Cayley contraction condition violated; "
                        "falling back to direct solve")
            r = _cayley_direct(w, t)
        else:
            base = t + 0.5 * (w @ t)
            r = t
            for _ in range(maxit):
                r_next = 0.5 * (w @ r) + base
                if np.linalg.norm(r_next - r) <= tol:
                    r = r_next
                    break
                r = r_next
    else:
        raise ValueError(f"unknown Cayley method {method!r}")
    res = feasibility_residual(r)
    if res > 1e-6:
        raise RetractionError(f"retraction left the manifold (residual {res:.3e})")
    return StiefelPoint(r, wide=point.wide, atol=max(FEASIBILITY_ATOL, 2.0 * res))


def reorthonormalize(matrix: np.ndarray, wide: bool = False) -> StiefelPoint:
    """Project a full-column-rank matrix back onto the manifold via qf."""
    return StiefelPoint(_qf(np.asarray(matrix, dtype=float)), wide=wide)
