"""Orthogonal Haar transform and undecimated Haar frame denoisers.

The basis transform is the classical multiscale Haar matrix on 2^J points.
The frame is the undecimated (a trous) Haar cascade with periodic boundary,
normalized so the analysis matrix has orthonormal columns (Parseval frame,
frame bound 1).  This normalization makes plain transpose synthesis exact
and keeps the scale-adapted thresholds acting directly on unit-gain
coefficients; it is the only scaling under which the published denoising
quality of the scale-adapted threshold rule is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .activations import soft_shrink
from .errors import DimensionError


def _check_levels(levels: int) -> None:
    if levels < 1:
        raise DimensionError(f"need at least one level, got {levels}")


def _check_length(x: np.ndarray, d: int) -> None:
    if x.shape != (d,):
        raise DimensionError(f"expected a vector of length {d}, got {x.shape}")


def _pairwise_block(m: int) -> np.ndarray:
    """The m x m block stacking pairwise sums over pairwise differences."""
    block = np.zeros((m, m))
    s = 1.0 / np.sqrt(2.0)
    for i in range(m // 2):
        block[i, 2 * i] = block[i, 2 * i + 1] = s
        block[m // 2 + i, 2 * i] = s
        block[m // 2 + i, 2 * i + 1] = -s
    return block


@dataclass(frozen=True)
class HaarBasis:
    """Orthogonal multiscale Haar matrix on 2^levels points."""

    levels: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return 2 ** self.levels

    def analyze(self, x: np.ndarray) -> np.ndarray:
        _check_length(np.asarray(x, dtype=float), self.dim)
        return self.matrix @ x

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix.T @ coeffs


@lru_cache(maxsize=16)
def haar_basis_matrix(levels: int) -> HaarBasis:
    """Cascade product: level j refines the leading 2^j coordinates.

    The finest stage acts on the full vector and the coarsest on the leading
    pair, so every scale down to the global average is decomposed.
    """
    _check_levels(levels)
    d = 2 ** levels
    h = np.eye(d)
    for j in range(1, levels + 1):
        m = 2 ** j
        stage = np.eye(d)
        stage[:m, :m] = _pairwise_block(m)
        h = h @ stage
    return HaarBasis(levels, h)


def _levels_for(x: np.ndarray) -> int:
    d = len(x)
    levels = d.bit_length() - 1
    if d < 2 or 2 ** levels != d:
        raise DimensionError(f"length must be a power of two >= 2, got {d}")
    return levels


def haar_basis_shrink(x: np.ndarray, lam: float) -> np.ndarray:
    """Soft shrinkage of all Haar basis coefficients: H^t S_lam(H x)."""
    x = np.asarray(x, dtype=float)
    basis = haar_basis_matrix(_levels_for(x))
    return basis.synthesize(soft_shrink(basis.analyze(x), lam))


@dataclass(frozen=True)
class HaarFrame:
    """Undecimated periodic Haar frame with orthonormal columns.

    ``matrix`` stacks ``levels`` detail bands (finest first) and one
    approximation band, each of size 2^levels x 2^levels, so analysis maps
    R^d to R^{(levels+1) d} and transpose synthesis inverts it exactly.
    """

    levels: int
    matrix: np.ndarray
    frame_bound: float = 1.0

    @property
    def dim(self) -> int:
        return 2 ** self.levels

    def analyze(self, x: np.ndarray) -> np.ndarray:
        _check_length(np.asarray(x, dtype=float), self.dim)
        return self.matrix @ x

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix.T @ coeffs

    def band(self, coeffs: np.ndarray, j: int) -> np.ndarray:
        """Slice of band j (details j = 0..levels-1, approximation j = levels)."""
        d = self.dim
        return coeffs[j * d:(j + 1) * d]


@lru_cache(maxsize=16)
def undecimated_haar_frame(levels: int) -> HaarFrame:
    """A trous cascade: gap 2^j between the two taps at detail level j.

    Band weights 2^(-(j+1)/2) for details and 2^(-levels/2) for the
    approximation make the stacked analysis matrix an isometry.
    """
    _check_levels(levels)
    d = 2 ** levels
    s = 1.0 / np.sqrt(2.0)
    lowpass = np.eye(d)
    bands = []
    for j in range(levels):
        gap = 2 ** j
        low = np.zeros((d, d))
        high = np.zeros((d, d))
        idx = np.arange(d)
        low[idx, idx] = s
        low[idx, (idx + gap) % d] += s
        high[idx, idx] = s
        high[idx, (idx + gap) % d] += -s
        bands.append(2.0 ** (-(j + 1) / 2.0) * (high @ lowpass))
        lowpass = low @ lowpass
    bands.append(2.0 ** (-levels / 2.0) * lowpass)
    return HaarFrame(levels, np.vstack(bands))


def frame_detail_thresholds(levels: int, lam: float) -> np.ndarray:
    """Scale-adapted thresholds lam / sqrt(2)^j, finest detail band first."""
    return lam / np.sqrt(2.0) ** np.arange(levels)


def haar_frame_denoise(x: np.ndarray, lam: float) -> np.ndarray:
    """Per-band soft shrinkage in the undecimated frame.

    Detail band j is shrunk with threshold lam / sqrt(2)^j (finest gets the
    full lam); the approximation band passes through untouched, so constant
    signals are preserved for any lam.
    """
    x = np.asarray(x, dtype=float)
    frame = undecimated_haar_frame(_levels_for(x))
    coeffs = frame.analyze(x)
    out = coeffs.copy()
    d = frame.dim
    for j, th in enumerate(frame_detail_thresholds(frame.levels, lam)):
        out[j * d:(j + 1) * d] = soft_shrink(coeffs[j * d:(j + 1) * d], th)
    return frame.synthesize(out)
