"""Teacher Gaussian random fields.

Fields are sampled either jointly at arbitrary points, through a Cholesky
factor of the Teacher Gram matrix, or on a periodic lattice, through the
exact eigenvalues of the circulant lattice covariance.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import cholesky_jitter
from ._seeding import rng
from .geometry import PointCloud, lattice_points
from .kernels import KernelSpec, gram
from .lattice import StarSumConfig, star_sum_grid

__all__ = ["FieldSample", "sample_field", "sample_fields", "sample_field_lattice", "sample_fields_lattice"]


@dataclass
class FieldSample:
    """Values ``Z(x_mu)`` of one Teacher draw at the points of a cloud."""

    values: np.ndarray
    points: PointCloud
    teacher: KernelSpec
    jitter: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.points.n,):
            raise ValueError("one value per point expected")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")


def _cloud(points):
    return points if isinstance(points, PointCloud) else PointCloud(points)


def sample_fields(teacher: KernelSpec, points, seed, replicas: int):
    """``replicas`` independent draws at ``points`` as a ``(replicas, n)`` array.

    Replica ``r`` uses the stream derived from ``(seed, r)``, so any replica
    can be regenerated on its own.  Returns ``(values, jitter)``.
    """
    cloud = _cloud(points)
    factor, jitter = cholesky_jitter(gram(teacher, cloud))
    g = np.stack([rng(seed, r).standard_normal(cloud.n) for r in range(replicas)])
    return g @ factor.T, jitter


def sample_field(teacher: KernelSpec, points, seed) -> FieldSample:
    """One draw ``Z ~ N(0, K_T)`` at ``points``."""
    cloud = _cloud(points)
    values, jitter = sample_fields(teacher, cloud, seed, 1)
    return FieldSample(values[0], cloud, teacher, jitter)


def _lattice_eigenvalues(teacher, L, m, d, cfg):
    # eigenvalues of the circulant lattice covariance: delta^-d F*(w_k)
    lam = star_sum_grid(teacher, L, m, d, cfg) / (L / m) ** d
    low = lam.min()
    if low < 0:
        if low < -1e-12 * lam.max():
            warnings.warn(f"negative periodized coefficient {low:.3g} clamped to 0", RuntimeWarning)
        lam = np.maximum(lam, 0.0)
    return lam


def sample_fields_lattice(teacher: KernelSpec, L: float, m: int, d: int, seed, replicas: int, cfg=None):
    """``replicas`` draws on the ``m^d`` lattice as a ``(replicas, m^d)`` array.

    Sites are ordered as in :func:`lattice_points`.  White noise is filtered
    by the square root of the lattice covariance in Fourier space; the
    covariance of the output is the periodized Teacher kernel exactly.
    """
    lam = _lattice_eigenvalues(teacher, L, m, d, cfg or StarSumConfig())
    root = np.sqrt(lam)
    axes = tuple(range(1, d + 1))
    out = np.empty((replicas, m**d))
    for r in range(replicas):
        g = rng(seed, r).standard_normal((1,) + (m,) * d)
        z = np.fft.ifftn(root * np.fft.fftn(g, axes=axes), axes=axes)
        imag = np.abs(z.imag).max()
        if imag > 1e-10 * max(1.0, np.abs(z.real).max()):
            raise ArithmeticError(f"lattice field has imaginary residue {imag:.3g}")
        out[r] = z.real.ravel()
    return out


def sample_field_lattice(teacher: KernelSpec, L: float, m: int, d: int, seed, cfg=None) -> FieldSample:
    """One Teacher draw on the periodic lattice of ``m^d`` sites."""
    values = sample_fields_lattice(teacher, L, m, d, seed, 1, cfg)
    return FieldSample(values[0], lattice_points(L, m, d), teacher)
