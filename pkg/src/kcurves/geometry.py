"""Point sets, nearest-neighbour distances and effective dimension."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._seeding import rng
from .fitting import ExponentFit, LearningCurve, fit_power_law

__all__ = [
    "Provenance",
    "PointCloud",
    "sample_hypersphere",
    "sphere_points",
    "lattice_points",
    "nn_distances",
    "delta_min_curve",
    "effective_dimension",
]

MAX_LATTICE_POINTS = 50_000_000


class Provenance(str, enum.Enum):
    HYPERSPHERE = "hypersphere"
    LATTICE = "lattice"
    EXTERNAL = "external"


@dataclass
class PointCloud:
    coords: np.ndarray
    provenance: Provenance = Provenance.EXTERNAL
    box: float | None = None  # period L of a lattice cloud

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        self.coords = c
        self.provenance = Provenance(self.provenance)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return self.n

    def subset(self, idx) -> "PointCloud":
        return PointCloud(self.coords[idx], self.provenance, self.box)


def sample_hypersphere(n: int, d: int, seed) -> PointCloud:
    """``n`` points uniform on the unit sphere of ``R^d``.

    Rows are normalized standard Gaussian vectors, so the sphere itself has
    dimension ``d - 1``.  Use :func:`sphere_points` to ask for a sphere by
    its intrinsic dimension.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    g = rng(seed).standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return PointCloud(g, Provenance.HYPERSPHERE)


def sphere_points(n: int, dim: int, seed) -> PointCloud:
    """``n`` uniform points on the ``dim``-dimensional sphere in ``R^(dim+1)``."""
    return sample_hypersphere(n, dim + 1, seed)


def lattice_points(L: float, m: int, d: int) -> PointCloud:
    """All ``m^d`` points ``L*i/m`` of the periodic grid, row-major in ``i``."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    if m**d > MAX_LATTICE_POINTS:
        raise MemoryError(f"lattice with {m}^{d} points exceeds {MAX_LATTICE_POINTS}")
    axis = L * np.arange(m) / m
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    return PointCloud(coords, Provenance.LATTICE, box=float(L))


def _brute_nn(x, box):
    n = x.shape[0]
    out = np.empty(n)
    block = max(1, 2_000_000 // max(n, 1))
    for s in range(0, n, block):
        diff = x[s : s + block, None, :] - x[None, :, :]
        if box is not None:
            diff -= box * np.round(diff / box)
        d2 = (diff * diff).sum(axis=2)
        d2[np.arange(d2.shape[0]), np.arange(s, s + d2.shape[0])] = np.inf
        out[s : s + block] = np.sqrt(d2.min(axis=1))
    return out


def _tree_nn(x, box):
    if box is not None:
        x = np.mod(x, box)
        # cKDTree needs points strictly inside [0, box)
        x[x >= box] = 0.0
        tree = cKDTree(x, boxsize=box)
    else:
        tree = cKDTree(x)
    dist, _ = tree.query(x, k=2)
    return dist[:, 1]


def nn_distances(points, box: float | None = None, method: str = "auto"):
    """Distance from every point to its nearest other point.

    Parameters
    ----------
    points : PointCloud or array_like
    box : float, optional
        Period of a torus metric ``[0, box)^d``; Euclidean when ``None``.
    method : {"auto", "brute", "tree"}
        ``brute`` is the O(n^2) reference; ``tree`` uses a k-d tree.
    """
    x = np.asarray(getattr(points, "coords", points), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    if method == "auto":
        method = "brute" if x.shape[0] <= 2000 else "tree"
    if method == "brute":
        return _brute_nn(x, box)
    if method == "tree":
        return _tree_nn(x.copy(), box)
    raise ValueError(f"unknown method {method!r}")


def delta_min_curve(points, subset_sizes, replicas: int = 10, seed=0, box=None) -> LearningCurve:
    """Mean nearest-neighbour distance of random subsets, against subset size.

    Each replica draws its subsets without replacement from its own
    random stream, derived from ``(seed, size index, replica)``.
    """
    x = np.asarray(getattr(points, "coords", points), dtype=float)
    sizes = np.asarray(subset_sizes, dtype=int)
    if np.any(np.diff(sizes) <= 0):
        raise ValueError("subset sizes must be increasing")
    if sizes[0] < 2 or sizes[-1] > x.shape[0]:
        raise ValueError("subset sizes must lie in [2, n]")
    samples = np.empty((replicas, sizes.size))
    for j, size in enumerate(sizes):
        for r in range(replicas):
            idx = rng(seed, j, r).choice(x.shape[0], size=size, replace=False)
            samples[r, j] = nn_distances(x[idx], box=box).mean()
    return LearningCurve.from_replicas(sizes, samples)


def effective_dimension(points, subset_sizes, replicas: int = 10, seed=0, window=None, box=None) -> ExponentFit:
    """Fit ``<delta_min> ~ n^(-1/d_eff)``; ``d_eff`` is ``fit.d_eff``.

    The default window is the top decade of subset sizes.
    """
    curve = delta_min_curve(points, subset_sizes, replicas, seed, box)
    return fit_power_law(curve.n, curve.value, window)
