"""Exact expected MSE of kernel interpolation on a periodic lattice.

Training points fill the grid ``L*i/m`` of the periodic box ``[0, L)^d``
(``n = m^d`` points, spacing ``delta = L/m``).  For a Gaussian Teacher with
covariance ``K_T`` and a Student ``K_S``, the MSE averaged over Teacher draws
and over a uniform test point is a sum over the ``m^d`` frequencies of the
Brillouin zone::

    MSE = L^-d sum_w  T - 2 [T S]/S + T [S^2] / S^2

where ``F`` written alone stands for its periodization over frequency images,
``F*(w) = sum_n F(w + 2 pi n / delta)``, and ``T``, ``S`` are the Teacher and
Student transforms.

The summand is evaluated as a sum of nonnegative pieces, split between the
principal image ``n = 0`` and the rest, so the near-cancellation of the
naive form never appears.  Image sums with power-law tails are truncated
at a cube of half-width ``N`` and completed with the integral of their
asymptotic expansion plus a second-order lattice correction.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import PrecisionError
from .kernels import Family, KernelSpec, SpectralTail

__all__ = [
    "StarSumConfig",
    "RadialSpectrum",
    "star_sum",
    "star_sum_grid",
    "brillouin_frequencies",
    "lattice_mse_summands",
    "exact_lattice_mse",
    "theorem_beta",
    "smoothness_index",
]

_CHUNK = 4_000_000  # images x frequencies evaluated per block


@dataclass(frozen=True)
class StarSumConfig:
    """Truncation control for image sums.

    ``truncation`` is the starting half-width ``N`` of the image cube
    (64 for power-law integrands and 3 for Gaussian ones when left unset).
    ``N`` doubles until two successive estimates of every image sum agree to
    ``rel_tol``, or ``max_truncation`` is exceeded.
    """

    truncation: int | None = None
    rel_tol: float = 1e-10
    max_truncation: int | None = None

    def __post_init__(self):
        if self.truncation is not None and self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    def start(self, power_law: bool) -> int:
        if self.truncation is not None:
            return self.truncation
        return 64 if power_law else 3

    def start_for(self, power_law: bool, d: int) -> int:
        if self.truncation is not None or not power_law or d <= 2:
            return self.start(power_law)
        # cubes grow as N^d; the extrapolated sums converge from N = 16 on
        return 16 if d == 3 else 8

    def cap(self, d: int) -> int:
        if self.max_truncation is not None:
            return self.max_truncation
        # keep one frequency's image cube below ~1.7e7 points
        return max(4, int((1.7e7 ** (1.0 / d) - 1) / 2))


class RadialSpectrum:
    """A radial function of frequency with a known power-law expansion.

    The function is held through its logarithm so that ratios of values far
    out in a fast-decaying tail stay finite.  ``terms`` is a tuple of
    ``(coef, power)`` pairs giving the large-``u`` expansion
    ``F(u) ~ sum coef * u^-power``; it is empty for spectra that decay faster
    than any power.
    """

    def __init__(self, log_func, terms=(), label="F"):
        self.log_func = log_func
        self.terms = tuple(terms)
        self.label = label

    def __call__(self, u):
        return np.exp(self.log_func(u))

    def log(self, u):
        return self.log_func(u)

    @property
    def power_law(self) -> bool:
        return bool(self.terms)

    @classmethod
    def of_kernel(cls, kernel: KernelSpec, d: int) -> "RadialSpectrum":
        def f(u, kernel=kernel, d=d):
            return kernel.log_fourier(u, d)

        if kernel.family is Family.GAUSSIAN:
            return cls(f, (), label=kernel.family.value)
        # F = P (1 + u^2/a^2)^-p  ->  P a^2p u^-2p (1 - p a^2/u^2 + ...)
        if kernel.family is Family.LAPLACE:
            a2 = 1.0 / kernel.sigma**2
            p = (d + 1) / 2.0
        else:
            a2 = 2.0 * kernel.nu / kernel.sigma**2
            p = kernel.nu + d / 2.0
        c0 = kernel.tail_prefactor(d)
        return cls(f, ((c0, 2 * p), (-p * a2 * c0, 2 * p + 2)), label=kernel.family.value)

    def __mul__(self, other: "RadialSpectrum") -> "RadialSpectrum":
        f1, f2 = self.log_func, other.log_func
        terms = ()
        if self.terms and other.terms:
            prod = {}
            for c1, p1 in self.terms:
                for c2, p2 in other.terms:
                    prod[p1 + p2] = prod.get(p1 + p2, 0.0) + c1 * c2
            lead = sorted(prod)[:2]
            terms = tuple((prod[p], p) for p in lead)
        return RadialSpectrum(lambda u: f1(u) + f2(u), terms, label=f"{self.label}*{other.label}")


@functools.lru_cache(maxsize=None)
def _cube_exterior_constant(d: int, p: float) -> float:
    """``int_{|x|_inf > 1} |x|^-p dx`` for ``p > d``."""
    if d == 1:
        return 2.0 / (p - 1.0)
    nodes, weights = np.polynomial.legendre.leggauss(48 if d <= 3 else 16)
    grids = np.meshgrid(*([nodes] * (d - 1)), indexing="ij")
    wgrid = np.meshgrid(*([weights] * (d - 1)), indexing="ij")
    r2 = sum(g**2 for g in grids)
    w = functools.reduce(np.multiply, wgrid)
    face = float(np.sum(w * (1.0 + r2) ** (-p / 2.0)))
    return 2.0 * d * face / (p - d)


def _tail_correction(spectrum, xi2, d, N, delta):
    """Asymptotic estimate of the image sum outside the cube ``|n|_inf <= N``."""
    R = N + 0.5
    k = 2.0 * math.pi / delta
    out = np.zeros_like(xi2)
    for coef, p in spectrum.terms:
        if p <= d:
            raise ValueError(f"image sum diverges: power {p} <= dimension {d}")
        lead = R ** (d - p) * _cube_exterior_constant(d, p)
        second = p * (p + 2 - d) * R ** (d - p - 2) * _cube_exterior_constant(d, p + 2)
        out += coef * k ** (-p) * (lead + (xi2 / (2 * d) - 1.0 / 24.0) * second)
    return out


def _image_offsets(d, N):
    r = np.arange(-N, N + 1)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    n = np.stack([g.ravel() for g in grids], axis=1)
    return n[np.any(n != 0, axis=1)].astype(float)


def _rest_sums_at(spectra, W, delta, N):
    """Image sums over ``n != 0``, relative to the ``n = 0`` term.

    The cube ``|n|_inf <= N`` is summed directly and the outside estimated
    by the tail correction.  Returns an array ``(len(spectra), len(W))``.
    """
    k_pts, d = W.shape
    offsets = _image_offsets(d, N) * (2.0 * math.pi / delta)
    u0 = np.sqrt((W**2).sum(axis=1))
    log0 = np.array([sp.log(u0) for sp in spectra]).reshape(len(spectra), k_pts)
    out = np.zeros((len(spectra), k_pts))
    step = max(1, _CHUNK // max(len(offsets), 1))
    for s in range(0, k_pts, step):
        Wc = W[s : s + step]
        u = np.sqrt(((Wc[:, None, :] + offsets[None, :, :]) ** 2).sum(axis=2))
        for i, sp in enumerate(spectra):
            out[i, s : s + step] = np.exp(sp.log(u) - log0[i, s : s + step, None]).sum(axis=1)
    xi2 = ((W * delta / (2.0 * math.pi)) ** 2).sum(axis=1)
    for i, sp in enumerate(spectra):
        if sp.power_law:
            out[i] += _tail_correction(sp, xi2, d, N, delta) * np.exp(-log0[i])
    return out


def _richardson(fine, coarse, spectra, d, N):
    """Cancel the leading ``R^-q`` error left after the tail correction."""
    out = fine.copy()
    ratio = (2 * N + 0.5) / (N + 0.5)
    for i, sp in enumerate(spectra):
        if sp.power_law:
            q = min(p for _, p in sp.terms) - d + 4
            f = ratio**q
            out[i] = (f * fine[i] - coarse[i]) / (f - 1.0)
    return out


def _rest_sums(spectra, W, delta, cfg: StarSumConfig):
    W = np.atleast_2d(np.asarray(W, dtype=float))
    d = W.shape[1]
    power_law = any(sp.power_law for sp in spectra)
    N = cfg.start_for(power_law, d)
    cap = cfg.cap(d)
    raw = _rest_sums_at(spectra, W, delta, N)
    prev = None
    while True:
        if 2 * N > cap:
            raise PrecisionError(
                f"image sums did not reach rel_tol={cfg.rel_tol:g} before truncation {cap}"
            )
        fine = _rest_sums_at(spectra, W, delta, 2 * N)
        cur = _richardson(fine, raw, spectra, d, N)
        # without a power-law tail the raw sums themselves are compared
        ref = prev if power_law else raw
        N *= 2
        raw = fine
        if ref is not None:
            diff = np.abs(cur - ref)
            if np.all((diff <= cfg.rel_tol * np.abs(cur)) | (diff == 0)):
                return cur
        prev = cur


def _check_zone(W, delta):
    lim = math.pi / delta * (1 + 1e-12)
    if np.any(np.abs(W) > lim):
        raise ValueError("frequency outside the Brillouin zone [-pi/delta, pi/delta]^d")


def star_sum(spectrum, w, delta: float, cfg: StarSumConfig | None = None):
    """Periodization ``F*(w) = sum_n F(|w + 2 pi n / delta|)`` over ``n in Z^d``.

    Parameters
    ----------
    spectrum : RadialSpectrum or KernelSpec
        Integrand.  A kernel stands for its own d-dimensional transform.
    w : array_like
        One frequency (length ``d``) or a batch of shape ``(k, d)``, inside
        the Brillouin zone ``[-pi/delta, pi/delta]^d``.
    """
    cfg = cfg or StarSumConfig()
    W = np.asarray(w, dtype=float)
    single = W.ndim == 1
    W = np.atleast_2d(W)
    d = W.shape[1]
    _check_zone(W, delta)
    if isinstance(spectrum, KernelSpec):
        spectrum = RadialSpectrum.of_kernel(spectrum, d)
    principal = spectrum(np.sqrt((W**2).sum(axis=1)))
    total = principal * (1.0 + _rest_sums([spectrum], W, delta, cfg)[0])
    return float(total[0]) if single else total


def brillouin_frequencies(L: float, m: int, d: int):
    """The ``m^d`` lattice frequencies ``2 pi k / L`` of the Brillouin zone.

    ``k`` runs over ``{-ceil(m/2)+1, ..., floor(m/2)}`` on every axis.
    """
    k = np.arange(-((m + 1) // 2) + 1, m // 2 + 1)
    grids = np.meshgrid(*([k] * d), indexing="ij")
    return 2.0 * math.pi / L * np.stack([g.ravel() for g in grids], axis=1)


def _orbits(W, L):
    """Representatives of ``W`` under axis permutations and sign flips.

    Star sums and the MSE summand are invariant under both (a sign flip maps
    the zone edge onto itself modulo a lattice vector), so they need only be
    evaluated once per orbit.  Returns ``(reps, inverse)`` with
    ``W ~ reps[inverse]``.
    """
    keys = np.sort(np.abs(np.rint(W * L / (2.0 * math.pi))).astype(np.int64), axis=1)
    keys, inverse = np.unique(keys, axis=0, return_inverse=True)
    return keys * (2.0 * math.pi / L), np.ravel(inverse)


def star_sum_grid(spectrum, L: float, m: int, d: int, cfg: StarSumConfig | None = None):
    """Star sums at all ``m^d`` lattice frequencies, in FFT layout.

    Entry ``[k_1, ..., k_d]`` holds ``F*(2 pi k / L)`` with ``k`` ordered as
    :func:`numpy.fft.fftfreq` ``* m``.
    """
    cfg = cfg or StarSumConfig()
    if isinstance(spectrum, KernelSpec):
        spectrum = RadialSpectrum.of_kernel(spectrum, d)
    k = np.rint(np.fft.fftfreq(m) * m)
    grids = np.meshgrid(*([k] * d), indexing="ij")
    W_all = 2.0 * math.pi / L * np.stack([g.ravel() for g in grids], axis=1)
    W, inverse = _orbits(W_all, L)
    vals = spectrum(np.sqrt((W**2).sum(axis=1))) * (1.0 + _rest_sums([spectrum], W, L / m, cfg)[0])
    return vals[inverse].reshape((m,) * d)


def lattice_mse_summands(teacher: KernelSpec, student: KernelSpec, d: int, L: float, m: int, cfg=None):
    """Per-frequency contributions to the lattice MSE (before the ``L^-d``).

    Returns ``(frequencies, summands)``.
    """
    cfg = cfg or StarSumConfig()
    W_all = brillouin_frequencies(L, m, d)
    delta = L / m
    W, inverse = _orbits(W_all, L)
    T = RadialSpectrum.of_kernel(teacher, d)
    S = RadialSpectrum.of_kernel(student, d)
    t0 = T(np.sqrt((W**2).sum(axis=1)))
    # image sums relative to the n = 0 terms t0, s0, t0 s0, s0^2
    tau, sig, xi, kap = _rest_sums([T, S, T * S, S * S], W, delta, cfg)
    # T - 2[TS]/S + T[S^2]/S^2 regrouped by image.  The n = 0 image gives
    # t0 (Sr/S)^2 + (s0/S)^2 Tr, the others Tr - 2 Xr/S + T Qr/S^2; each
    # piece is nonnegative because s_n <= s0 inside the zone.
    g = 1.0 + sig
    summand = t0 * (
        (sig**2 + tau) / g**2
        + np.maximum(tau - 2.0 * xi / g, 0.0)
        + (1.0 + tau) * kap / g**2
    )
    return W_all, summand[inverse]


def exact_lattice_mse(teacher: KernelSpec, student: KernelSpec, d: int, L: float, m: int, cfg=None) -> float:
    """Teacher-averaged test MSE of ridgeless regression on the ``m^d`` lattice."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _, summand = lattice_mse_summands(teacher, student, d, L, m, cfg)
    # np.sum reduces contiguous float arrays pairwise
    return float(np.sum(summand)) / L**d


def _alpha(a):
    return a.alpha if isinstance(a, SpectralTail) else float(a)


def theorem_beta(alpha_T, alpha_S, d: int) -> float:
    """Asymptotic lattice exponent ``min(alpha_T - d, 2 alpha_S) / d``.

    ``alpha`` values may be floats (``math.inf`` for Gaussian kernels) or
    :class:`SpectralTail` instances.
    """
    aT, aS = _alpha(alpha_T), _alpha(alpha_S)
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not aT > d:
        raise ValueError(f"alpha_T={aT} <= d={d}: the Teacher variance K_T(0) diverges")
    if not aS > d:
        raise ValueError(f"alpha_S={aS} <= d={d}: the Student variance K_S(0) diverges")
    return min(aT - d, 2.0 * aS) / d


def smoothness_index(alpha_T, d: int):
    """Number of mean-square derivatives of the Teacher, ``floor((alpha_T - d)/2)``.

    Returns ``math.inf`` for an infinitely smooth Teacher.
    """
    aT = _alpha(alpha_T)
    if math.isinf(aT):
        return math.inf
    if not aT > d:
        raise ValueError(f"alpha_T={aT} <= d={d}")
    return int(math.floor((aT - d) / 2.0))
