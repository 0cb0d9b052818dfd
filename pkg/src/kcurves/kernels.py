"""Isotropic translation-invariant kernels.

Three families are supported, all parametrized by a length scale ``sigma``
and an ``amplitude`` (the value at zero distance):

* ``gaussian``  ``A exp(-r^2 / (2 sigma^2))``
* ``laplace``   ``A exp(-r / sigma)``
* ``matern``    ``A 2^(1-nu)/Gamma(nu) z^nu K_nu(z)``, ``z = sqrt(2 nu) r / sigma``

Fourier transforms use the convention ``F(w) = int K(x) exp(-i w.x) dx`` so
that ``K(0) = (2 pi)^-d int F(w) dw`` equals the amplitude.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.spatial.distance import cdist, pdist, squareform

__all__ = [
    "Family",
    "KernelSpec",
    "SpectralTail",
    "PeriodizedKernel",
    "evaluate",
    "fourier_radial",
    "log_fourier_radial",
    "spectral_exponent",
    "gram",
    "cross_gram",
]


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    MATERN = "matern"


# below this z the Matern value is replaced by its limit at the origin
_MATERN_ZMIN = 1e-8


@dataclass(frozen=True)
class SpectralTail:
    """High-frequency decay ``F(w) ~ c |w|^-alpha``.

    ``alpha`` is ``math.inf`` for kernels whose transform decays faster than
    any power (Gaussian).
    """

    alpha: float
    prefactor_known: bool = True

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.alpha)


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    sigma: float = 1.0
    nu: float = 0.5
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if self.family is Family.MATERN and not self.nu > 0:
            raise ValueError(f"Matern nu must be positive, got {self.nu}")

    @classmethod
    def gaussian(cls, sigma=1.0, amplitude=1.0):
        return cls(Family.GAUSSIAN, sigma=sigma, amplitude=amplitude)

    @classmethod
    def laplace(cls, sigma=1.0, amplitude=1.0):
        return cls(Family.LAPLACE, sigma=sigma, amplitude=amplitude)

    @classmethod
    def matern(cls, nu, sigma=1.0, amplitude=1.0):
        return cls(Family.MATERN, sigma=sigma, nu=nu, amplitude=amplitude)

    def __call__(self, r):
        return evaluate(self, r)

    def prior_variance(self, d=None) -> float:
        return self.amplitude

    def fourier(self, w, d):
        return fourier_radial(self, w, d)

    def log_fourier(self, w, d):
        return log_fourier_radial(self, w, d)

    def tail(self, d) -> SpectralTail:
        return spectral_exponent(self, d)

    def tail_prefactor(self, d) -> float:
        """Constant ``c`` in ``F(w) ~ c w^-alpha`` (0 for the Gaussian)."""
        if self.family is Family.GAUSSIAN:
            return 0.0
        if self.family is Family.LAPLACE:
            return self.amplitude * _laplace_norm(d) / self.sigma
        a2 = 2.0 * self.nu / self.sigma**2
        return self.amplitude * math.exp(_matern_lognorm(self.nu, d) + self.nu * math.log(a2))

    def cross(self, x, y):
        return cross_gram(self, x, y)

    def gram(self, x):
        return gram(self, x)


def evaluate(kernel: KernelSpec, r):
    """Kernel value at distance ``r`` (scalar or array, all entries >= 0)."""
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("distance must be finite")
    if np.any(r < 0):
        raise ValueError("distance must be nonnegative")
    u = r / kernel.sigma
    fam = kernel.family
    if fam is Family.GAUSSIAN:
        out = np.exp(-0.5 * u * u)
    elif fam is Family.LAPLACE:
        out = np.exp(-u)
    else:
        out = _matern_unit(kernel.nu, math.sqrt(2.0 * kernel.nu) * u)
    out = kernel.amplitude * out
    return out if out.ndim else float(out)


def _matern_unit(nu, z):
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    big = z >= _MATERN_ZMIN
    if not np.any(big):
        return out
    zb = z[big]
    kve = special.kve(nu, zb)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        logv = (1.0 - nu) * math.log(2.0) - special.gammaln(nu) + nu * np.log(zb) + np.log(kve) - zb
        val = np.exp(logv)
    # kve overflows only when z << sqrt(nu); there the value is 1 - z^2/(4(nu-1))
    bad = ~np.isfinite(val)
    if np.any(bad):
        val[bad] = 1.0 - zb[bad] ** 2 / (4.0 * (nu - 1.0)) if nu > 1 else 1.0
    out[big] = np.minimum(val, 1.0)
    return out


def _laplace_norm(d):
    # int exp(-|x|) exp(-i w.x) dx = c_d (1 + w^2)^(-(d+1)/2)
    return 2.0**d * math.pi ** ((d - 1) / 2.0) * math.gamma((d + 1) / 2.0)


def _matern_lognorm(nu, d):
    # log of 2^d pi^(d/2) Gamma(nu + d/2) / Gamma(nu)
    return d * math.log(2.0) + 0.5 * d * math.log(math.pi) + math.lgamma(nu + d / 2.0) - math.lgamma(nu)


def log_fourier_radial(kernel: KernelSpec, w, d: int):
    """Logarithm of :func:`fourier_radial`, finite where the transform underflows."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("frequency must be nonnegative")
    s = kernel.sigma
    logA = math.log(kernel.amplitude)
    fam = kernel.family
    if fam is Family.GAUSSIAN:
        out = logA + 0.5 * d * math.log(2 * math.pi) + d * math.log(s) - 0.5 * (s * w) ** 2
    elif fam is Family.LAPLACE:
        out = logA + math.log(_laplace_norm(d)) + d * math.log(s) - 0.5 * (d + 1) * np.log1p((s * w) ** 2)
    else:
        nu = kernel.nu
        a2 = 2.0 * nu / s**2
        lognorm = _matern_lognorm(nu, d) - 0.5 * d * math.log(a2)
        out = logA + lognorm - (nu + d / 2.0) * np.log1p(w * w / a2)
    return out if out.ndim else float(out)


def fourier_radial(kernel: KernelSpec, w, d: int):
    """d-dimensional Fourier transform of the kernel at radial frequency ``w``."""
    out = np.exp(log_fourier_radial(kernel, w, d))
    return out if out.ndim else float(out)


def spectral_exponent(kernel: KernelSpec, d: int) -> SpectralTail:
    """Decay exponent of the d-dimensional transform."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if kernel.family is Family.GAUSSIAN:
        return SpectralTail(math.inf, prefactor_known=False)
    if kernel.family is Family.LAPLACE:
        return SpectralTail(float(d + 1))
    return SpectralTail(d + 2.0 * kernel.nu)


def _as_points(x):
    coords = getattr(x, "coords", x)
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    return coords


def gram(kernel, points):
    """Symmetric Gram matrix of ``kernel`` over a point set.

    Each pairwise distance is computed once and mirrored, so the result is
    exactly symmetric.  ``kernel`` may also be a :class:`PeriodizedKernel`.
    """
    x = _as_points(points)
    if not np.all(np.isfinite(x)):
        raise ValueError("coordinates must be finite")
    if isinstance(kernel, PeriodizedKernel):
        return kernel.gram(x)
    n = x.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    k = squareform(evaluate(kernel, pdist(x)), checks=False)
    np.fill_diagonal(k, kernel.amplitude)
    return k


def cross_gram(kernel, x, y):
    """Matrix ``K[i, j] = kernel(|x_i - y_j|)``."""
    x = _as_points(x)
    y = _as_points(y)
    if isinstance(kernel, PeriodizedKernel):
        return kernel.cross(x, y)
    return evaluate(kernel, cdist(x, y))


@dataclass(frozen=True)
class PeriodizedKernel:
    """Image sum ``sum_n K(x + n L)`` over the periodic box ``[0, L)^d``.

    Evaluated directly in real space by truncating the image sum at
    ``images`` copies per axis, which converges exponentially for the
    families above when ``sigma`` is small compared with ``L * images``.
    """

    base: KernelSpec
    L: float
    images: int = 8

    def _shifts(self, d):
        r = np.arange(-self.images, self.images + 1, dtype=float) * self.L
        grids = np.meshgrid(*([r] * d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def displacement_value(self, disp):
        """Periodized kernel at an array of displacement vectors ``(..., d)``."""
        disp = np.asarray(disp, dtype=float)
        d = disp.shape[-1]
        flat = disp.reshape(-1, d)
        out = np.zeros(flat.shape[0])
        for s in self._shifts(d):
            out += evaluate(self.base, np.sqrt(((flat + s) ** 2).sum(axis=1)))
        return out.reshape(disp.shape[:-1])

    def prior_variance(self, d) -> float:
        return float(self.displacement_value(np.zeros((1, d)))[0])

    def cross(self, x, y):
        x = _as_points(x)
        y = _as_points(y)
        disp = x[:, None, :] - y[None, :, :]
        disp -= self.L * np.round(disp / self.L)
        return self.displacement_value(disp)

    def gram(self, x):
        x = _as_points(x)
        k = self.cross(x, x)
        k = 0.5 * (k + k.T)
        return k
