"""Readers for IDX (MNIST) and CIFAR-10 binary files, and binary labels.

Pixels are kept as raw values in ``[0, 255]``; kernel length scales for
these datasets are quoted on that scale.
"""
from __future__ import annotations

import enum
import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .geometry import PointCloud, Provenance

__all__ = [
    "IdxMagicError",
    "IdxTruncatedError",
    "IdxDimensionError",
    "CifarSizeError",
    "LabeledDataset",
    "Scheme",
    "read_idx",
    "write_idx",
    "read_cifar_batch",
    "write_cifar_batch",
    "binarize",
    "load_mnist",
    "load_cifar10",
    "CIFAR_DEFAULT_SPLIT",
]

IDX_LABELS = 0x00000801
IDX_IMAGES = 0x00000803
CIFAR_RECORD = 3073
CIFAR_DEFAULT_SPLIT = frozenset(range(5))
MAX_IDX_BYTES = 1 << 34


class IdxMagicError(ParseError):
    pass


class IdxTruncatedError(ParseError):
    pass


class IdxDimensionError(ParseError):
    pass


class CifarSizeError(ParseError):
    pass


def _read_bytes(path) -> bytes:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def read_idx(path, expect=None) -> np.ndarray:
    """Parse an IDX file of unsigned bytes (``.gz`` files are decompressed).

    Parameters
    ----------
    path : str or path-like
    expect : {"labels", "images"}, optional
        Require the label-vector magic ``0x00000801`` or the image-tensor
        magic ``0x00000803``.
    """
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise IdxTruncatedError(f"{path}: missing header")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic not in (IDX_LABELS, IDX_IMAGES):
        raise IdxMagicError(f"{path}: bad magic 0x{magic:08x}")
    want = {"labels": IDX_LABELS, "images": IDX_IMAGES, None: magic}[expect]
    if magic != want:
        raise IdxMagicError(f"{path}: magic 0x{magic:08x}, expected 0x{want:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IdxTruncatedError(f"{path}: header cut short")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    size = 1
    for s in dims:
        size *= s
        if size > MAX_IDX_BYTES:
            raise IdxDimensionError(f"{path}: dimensions {dims} overflow")
    if len(raw) - header < size:
        raise IdxTruncatedError(f"{path}: payload holds {len(raw) - header} of {size} bytes")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=header).reshape(dims)


def write_idx(path, array) -> None:
    """Write a uint8 vector (label magic) or 3-d tensor (image magic)."""
    a = np.ascontiguousarray(array, dtype=np.uint8)
    magic = {1: IDX_LABELS, 3: IDX_IMAGES}.get(a.ndim)
    if magic is None:
        raise ValueError("IDX writer supports 1-d labels and 3-d images")
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        f.write(struct.pack(f">{a.ndim}I", *a.shape))
        f.write(a.tobytes())


def read_cifar_batch(path):
    """Classes and flattened pixel rows of a CIFAR-10 binary batch.

    Each 3073-byte record is one class byte followed by the red, green and
    blue 32x32 planes.  Returns ``(classes, pixels)`` with ``pixels`` of
    shape ``(records, 3072)``.
    """
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size % CIFAR_RECORD:
        raise CifarSizeError(f"{path}: size {raw.size} is not a multiple of {CIFAR_RECORD}")
    rec = raw.reshape(-1, CIFAR_RECORD)
    return rec[:, 0].copy(), rec[:, 1:].copy()


def write_cifar_batch(path, classes, pixels) -> None:
    c = np.asarray(classes, dtype=np.uint8)
    p = np.asarray(pixels, dtype=np.uint8).reshape(c.size, CIFAR_RECORD - 1)
    np.concatenate([c[:, None], p], axis=1).tofile(path)


class Scheme(str, enum.Enum):
    MNIST_PARITY = "mnist_parity"
    CIFAR_SPLIT = "cifar_split"


def binarize(raw_classes, scheme="mnist_parity", positive=CIFAR_DEFAULT_SPLIT) -> np.ndarray:
    """Map digit classes to +1/-1 labels.

    ``mnist_parity`` sends odd classes to +1 and even ones to -1;
    ``cifar_split`` sends the classes in ``positive`` (five of them) to +1.
    """
    c = np.asarray(raw_classes)
    if c.size and (c.min() < 0 or c.max() > 9):
        raise ValueError("classes must lie in 0..9")
    scheme = Scheme(scheme)
    if scheme is Scheme.MNIST_PARITY:
        return np.where(c % 2 == 1, 1.0, -1.0)
    positive = frozenset(int(k) for k in positive)
    if len(positive) != 5 or not positive <= set(range(10)):
        raise ValueError("the CIFAR split needs five distinct classes in 0..9")
    return np.where(np.isin(c, list(positive)), 1.0, -1.0)


@dataclass
class LabeledDataset:
    points: PointCloud
    labels: np.ndarray
    raw_classes: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=float)
        if self.labels.shape != (self.points.n,):
            raise ValueError("one label per point expected")
        if not np.all(np.abs(self.labels) == 1):
            raise ValueError("labels must be +1 or -1")

    @property
    def n(self) -> int:
        return self.points.n

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.points.subset(idx), self.labels[idx], self.raw_classes[idx])


def load_mnist(images_path, labels_path) -> LabeledDataset:
    """MNIST images as 784-dimensional raw-pixel points with parity labels."""
    images = read_idx(images_path, expect="images")
    classes = read_idx(labels_path, expect="labels")
    if images.shape[0] != classes.shape[0]:
        raise ParseError(f"{images.shape[0]} images but {classes.shape[0]} labels")
    pts = PointCloud(images.reshape(images.shape[0], -1).astype(float), Provenance.EXTERNAL)
    return LabeledDataset(pts, binarize(classes, Scheme.MNIST_PARITY), classes)


def load_cifar10(batch_paths, positive=CIFAR_DEFAULT_SPLIT) -> LabeledDataset:
    """Concatenate CIFAR-10 batches; labels split the classes five against five."""
    if isinstance(batch_paths, (str, os.PathLike)):
        batch_paths = [batch_paths]
    parts = [read_cifar_batch(p) for p in batch_paths]
    classes = np.concatenate([c for c, _ in parts])
    pixels = np.concatenate([p for _, p in parts]).astype(float)
    return LabeledDataset(PointCloud(pixels, Provenance.EXTERNAL), binarize(classes, Scheme.CIFAR_SPLIT, positive), classes)
