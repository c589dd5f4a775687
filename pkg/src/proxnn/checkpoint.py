"""Versioned binary checkpoint format for network parameters.

Byte layout (all integers unsigned little-endian, all floats 64-bit
little-endian; matrices row-major):

    offset  size  field
    0       4     magic "PPNN"
    4       4     format version (currently 1)
    8       4     number of hidden layers K
    12      4     input dimension d
    16      1     activation kind (index into activations.KINDS)
    17      8     activation alpha
    25      1     output activation (0 identity, 1 logistic)
    26      1     final constraint (0 identity, 1 unconstrained)
    27      1     shrink_trainable flag
    28      1     shared_shrink flag
    29      4     final output dimension
    33      8*K   per-layer shrinkage thresholds
    then, per hidden layer:
            4     layer output dimension n_k
            1     orientation flag (0 tall, 1 wide)
            8*n_k*d   operator matrix T_k (n_k rows, d columns)
            8*n_k     bias b_k
    then, if final constraint is unconstrained:
            8*out_dim*d   final weight
    finally:
            8*out_dim     final bias
"""

from __future__ import annotations

import struct

import numpy as np

from .activations import KINDS, Activation
from .errors import ConfigError
from .network import FINAL_CONSTRAINTS, OUTPUT_ACTIVATIONS, Layer, PpnnParams
from .stiefel import StiefelPoint

MAGIC = b"PPNN"
VERSION = 1


def _pack_array(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def save_checkpoint(path, params: PpnnParams) -> None:
    kk = len(params.layers)
    d = params.in_dim
    parts = [
        MAGIC,
        struct.pack("<III", VERSION, kk, d),
        struct.pack("<Bd", KINDS.index(params.activation.kind),
                    params.activation.alpha),
        struct.pack("<BBBB",
                    OUTPUT_ACTIVATIONS.index(params.output_activation),
                    FINAL_CONSTRAINTS.index(params.final_constraint),
                    int(params.shrink_trainable), int(params.shared_shrink)),
        struct.pack("<I", params.out_dim),
        _pack_array(params.shrink),
    ]
    for layer in params.layers:
        parts.append(struct.pack("<IB", layer.out_dim, int(layer.point.wide)))
        parts.append(_pack_array(layer.operator))
        parts.append(_pack_array(layer.bias))
    if params.final_constraint == "unconstrained":
        parts.append(_pack_array(params.final_weight))
    parts.append(_pack_array(params.final_bias))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise ConfigError(f"checkpoint truncated at byte {self.pos}")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def floats(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        size = 8 * count
        if self.pos + size > len(self.data):
            raise ConfigError(f"checkpoint truncated at byte {self.pos}")
        a = np.frombuffer(self.data, dtype="<f8", count=count,
                          offset=self.pos).reshape(shape)
        self.pos += size
        return a.astype(float)


def load_checkpoint(path) -> PpnnParams:
    with open(path, "rb") as fh:
        r = _Reader(fh.read())
    if r.unpack("4s")[0] != MAGIC:
        raise ConfigError("not a PPNN checkpoint (bad magic)")
    version, kk, d = r.unpack("<III")
    if version != VERSION:
        raise ConfigError(f"unsupported checkpoint version {version}")
    kind_idx, alpha = r.unpack("<Bd")
    if kind_idx >= len(KINDS):
        raise ConfigError(f"unknown activation index {kind_idx}")
    out_act_idx, constraint_idx, trainable, shared = r.unpack("<BBBB")
    out_dim, = r.unpack("<I")
    shrink = r.floats((kk,))
    kind = KINDS[kind_idx]
    act = Activation(kind, lam=float(shrink[0]) if kind == "softshrink" else 0.0,
                     alpha=alpha)
    layers = []
    for _ in range(kk):
        n_k, wide = r.unpack("<IB")
        t = r.floats((n_k, d))
        b = r.floats((n_k,))
        point = StiefelPoint(t.T if wide else t, wide=bool(wide))
        layers.append(Layer(point, b))
    constraint = FINAL_CONSTRAINTS[constraint_idx]
    if constraint == "unconstrained":
        w = r.floats((out_dim, d))
    else:
        w = np.eye(d)
    c = r.floats((out_dim,))
    if r.pos != len(r.data):
        raise ConfigError(f"{len(r.data) - r.pos} trailing bytes in checkpoint")
    return PpnnParams(layers, w, c, constraint, act,
                      OUTPUT_ACTIVATIONS[out_act_idx], shrink,
                      bool(trainable), bool(shared))
