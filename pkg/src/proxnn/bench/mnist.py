"""MNIST ingestion from the standard big-endian IDX files.

The files are not bundled; point ``find_mnist`` at a directory (or set the
PROXNN_MNIST_DIR environment variable) holding the usual four files
train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
t10k-labels-idx1-ubyte (optionally with the dotted naming variant).
"""

from __future__ import annotations

import os
import struct

import numpy as np

from ..errors import IdxFormatError

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


def _read_idx(path, expected_magic: int, header_len: int):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 * header_len:
        raise IdxFormatError(f"{path}: header truncated at byte {len(data)}")
    fields = struct.unpack(f">{header_len}i", data[:4 * header_len])
    if fields[0] != expected_magic:
        raise IdxFormatError(
            f"{path}: magic {fields[0]} at offset 0, expected {expected_magic}")
    body = np.frombuffer(data, dtype=np.uint8, offset=4 * header_len)
    expected = int(np.prod(fields[1:]))
    if body.size != expected:
        raise IdxFormatError(
            f"{path}: {body.size} data bytes at offset {4 * header_len}, "
            f"expected {expected}")
    return fields[1:], body


def load_idx_images(path) -> np.ndarray:
    """(count, rows*cols) uint8 array from an IDX3 image file."""
    (count, rows, cols), body = _read_idx(path, IMAGE_MAGIC, 4)
    return body.reshape(count, rows * cols)


def load_idx_labels(path) -> np.ndarray:
    """(count,) uint8 label array from an IDX1 label file."""
    (count,), body = _read_idx(path, LABEL_MAGIC, 2)
    if body.max(initial=0) > 9:
        raise IdxFormatError(f"{path}: label {body.max()} outside 0..9")
    return body


def mnist_load(images_path, labels_path, normalize: bool = False):
    """Paired (images, labels); images float64, divided by 255 if asked."""
    images = load_idx_images(images_path).astype(float)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"count mismatch: {images.shape[0]} images vs {labels.shape[0]} labels")
    if normalize:
        images = images / 255.0
    return images, labels.astype(int)


_NAMES = {
    "train_images": ("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
    "train_labels": ("train-labels-idx1-ubyte", "train-labels.idx1-ubyte"),
    "test_images": ("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
    "test_labels": ("t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"),
}


def find_mnist(directory=None):
    """Resolve the four IDX paths, or None if the dataset is absent."""
    directory = directory or os.environ.get("PROXNN_MNIST_DIR")
    if not directory or not os.path.isdir(directory):
        return None
    paths = {}
    for key, candidates in _NAMES.items():
        for name in candidates:
            p = os.path.join(directory, name)
            if os.path.exists(p):
                paths[key] = p
                break
        else:
            return None
    return paths
