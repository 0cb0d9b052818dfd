"""Kernel PCA and spectral predictions of learning curves.

Two predictors live here.  The tail power ``sum_{rho >= n} q_rho^2`` of the
label vector in the Gram eigenbasis tracks the test error at training size
``n``.  The self-consistent mode formula turns a spectrum ``lambda_rho`` and
target weights ``E w_rho^2`` into a full curve through a scalar equation for
``t(n)``.

Gram eigenvalues are used raw, not divided by the number of points; only
exponents are compared, and those do not see the normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .errors import BreakdownError, FitError, NumericalError
from .fitting import ExponentFit, LearningCurve, fit_power_law
from .kernels import SpectralTail

__all__ = [
    "SpectralDecomposition",
    "SpectralWeights",
    "kernel_pca",
    "tail_power_curve",
    "beta_from_tail",
    "default_tail_window",
    "selfconsistent_curve",
    "theta_from_alpha",
    "teacher_q",
    "asymptotic_exponent_appH",
    "density_exponent",
]


@dataclass
class SpectralDecomposition:
    """Descending Gram eigenpairs and the label projections ``q = Phi^T Z``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    projections: np.ndarray

    @property
    def n_tilde(self) -> int:
        return self.eigenvalues.size


@dataclass
class SpectralWeights:
    """Mode variances ``lam`` and target weights ``w2`` (``E w_rho^2``)."""

    lam: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        if self.lam.shape != self.w2.shape or self.lam.ndim != 1:
            raise ValueError("lam and w2 must be vectors of equal length")
        if not (np.all(np.isfinite(self.lam)) and np.all(np.isfinite(self.w2))):
            raise ValueError("weights must be finite")
        if np.any(self.w2 < 0):
            raise ValueError("w2 must be nonnegative")

    @classmethod
    def from_decomposition(cls, dec: SpectralDecomposition, rtol: float = 1e-12):
        """``w_rho^2 = q_rho^2 / lambda_rho`` over the numerically positive modes."""
        lam = dec.eigenvalues
        keep = lam > rtol * lam[0]
        return cls(lam[keep], dec.projections[keep] ** 2 / lam[keep])

    @classmethod
    def power_law(cls, n_modes: int, theta: float, q: float = 0.0):
        """``lambda_rho = rho^(-1/(theta-1))`` and ``w2 = lambda^q``."""
        rho = np.arange(1, n_modes + 1, dtype=float)
        lam = rho ** (-1.0 / (theta - 1.0))
        return cls(lam, lam**q)


def kernel_pca(gram_matrix, labels) -> SpectralDecomposition:
    """Uncentered kernel PCA: full eigendecomposition of the raw Gram matrix."""
    k = np.asarray(gram_matrix, dtype=float)
    z = np.asarray(labels, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("Gram matrix must be square")
    if z.shape[0] != k.shape[0]:
        raise ValueError("one label per Gram row expected")
    try:
        lam, phi = linalg.eigh(k, check_finite=False)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    lam = np.maximum(lam[::-1], 0.0)
    phi = phi[:, ::-1]
    return SpectralDecomposition(lam, phi, phi.T @ z)


def tail_power_curve(dec: SpectralDecomposition, n_grid) -> LearningCurve:
    """Tail power ``sum_{rho=n}^{n_tilde} q_rho^2`` at each ``n`` of the grid.

    The suffix sums come from a single cumulative pass that starts at the
    smallest modes, so the curve is exactly non-increasing.
    """
    n = np.asarray(n_grid, dtype=int)
    nt = dec.n_tilde
    if n.size == 0 or n.min() < 1 or n.max() > nt:
        raise ValueError(f"grid must lie in [1, {nt}]")
    suffix = np.cumsum(dec.projections[::-1] ** 2)[::-1]
    return LearningCurve(n, suffix[n - 1], 0.0, 1, {"n_tilde": np.full(n.size, nt)})


def default_tail_window(n_tilde: int, method: str = "truncated"):
    """Default fit window of :func:`beta_from_tail`.

    ``"truncated"``: the last decade of ranks, leaving out the final 5%.
    ``"loglog"``: ranks ``n_tilde/100`` to ``n_tilde/10``, where the
    eigenvalues of a sampled Gram matrix have converged.
    """
    if method == "loglog":
        return (n_tilde / 100.0, n_tilde / 10.0)
    return (n_tilde / 10.0, 0.95 * n_tilde)


def beta_from_tail(curve: LearningCurve, window=None, method: str = "truncated", n_tilde=None) -> ExponentFit:
    """Exponent ``beta_hat = a - 1`` from a tail-power curve.

    If ``q_rho^2 ~ rho^-a`` the tail power decays as ``n^-(a-1)``, but only
    until ``n`` approaches the number of modes, where the sum is cut off.

    ``method="truncated"`` fits the finite sum
    ``A [(n - 1/2)^-b - (n_tilde + 1/2)^-b]`` and returns ``b``, which removes
    the cutoff bias of a power law that really stops at ``n_tilde``.
    ``method="loglog"`` is a plain straight-line fit of the log curve.

    Use ``"loglog"`` on Gram spectra.  A Gram matrix keeps the full trace of
    the kernel, so the weight of the modes beyond ``n_tilde`` piles up in the
    last ranks instead of being cut off; the suffix sum at ``n << n_tilde``
    then follows the untruncated tail, and the last ranks are not a power
    law at all.  The result's ``beta`` property is ``beta_hat``.
    """
    if n_tilde is None:
        nt = curve.extra.get("n_tilde")
        n_tilde = int(np.max(nt)) if nt is not None else int(np.max(curve.n))
    if window is None:
        window = default_tail_window(n_tilde, method)
    if method == "loglog":
        return fit_power_law(curve.n, curve.value, window)
    if method != "truncated":
        raise ValueError(f"unknown method {method!r}")
    lo, hi = window
    x = np.asarray(curve.n, dtype=float)
    y = np.asarray(curve.value, dtype=float)
    sel = (x >= lo) & (x <= hi)
    x, y = x[sel], y[sel]
    if x.size < 3:
        raise FitError(f"fit window {window} holds {x.size} points, need at least 3")
    if np.any(y <= 0):
        raise ValueError("tail power must be positive in the window")
    if np.ptp(np.log(y)) == 0:
        raise FitError("tail power is constant in the window")
    ly = np.log(y)
    top = n_tilde + 0.5

    def shape(b):
        b = max(b, 1e-9)
        return np.log((x - 0.5) ** (-b) - top ** (-b))

    def resid(b):
        s = shape(b)
        # the prefactor is profiled out: log A is the mean offset
        return ly - s - np.mean(ly - s)

    start = max(fit_power_law(x, y, (lo, hi)).beta, 1e-3)
    sol = optimize.least_squares(lambda p: resid(p[0]), [start], bounds=([1e-9], [50.0]))
    b = float(sol.x[0])
    s = shape(b)
    log_a = float(np.mean(ly - s))
    r = resid(b)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(r @ r) / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(-b, log_a, (float(lo), float(hi)), r2, int(x.size))


def _solve_t(lam, n, rtol=1e-12, max_iter=200):
    """Root of ``sum lam/(t + lam n) = 1`` for each ``n`` (bisection in log t)."""
    n = np.asarray(n, dtype=float)
    total = lam.sum()
    t = np.zeros_like(n)
    t[n == 0] = total
    live = (n > 0) & (n < lam.size)
    if not np.any(live):
        return t
    nl = n[live]
    hi = np.full(nl.shape, math.log(total))
    # h(t) - 1 changes sign between t -> 0 (h = M/n > 1) and t = sum(lam)
    lo = np.full(nl.shape, math.log(total) - 50.0)
    h = lambda logt: (lam[:, None] / (np.exp(logt)[None, :] + lam[:, None] * nl[None, :])).sum(axis=0) - 1.0
    while np.any(h(lo) <= 0):
        lo = np.where(h(lo) <= 0, lo - 50.0, lo)
        if np.min(lo) < -745:
            break
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        pos = h(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo < rtol):
            break
    t[live] = np.exp(0.5 * (lo + hi))
    return t


def selfconsistent_curve(weights: SpectralWeights, n_grid) -> LearningCurve:
    """Mode-sum prediction of the expected MSE along ``n_grid``.

    For each ``n``, ``t`` solves ``t = sum lam / (1 + lam n / t)``, then
    ``gamma = sum lam^2 / (1 + lam n / t)^2`` and
    ``E MSE = sum (w2/lam) (1/lam + n/t)^-2 / (1 - n gamma / t^2)``.
    With at least as many samples as modes the root is ``t = 0`` and the
    predicted error vanishes.  ``t`` and ``gamma`` are returned as extra
    columns.
    """
    lam = weights.lam
    if np.any(lam <= 0):
        raise ValueError("all eigenvalues must be positive")
    n = np.asarray(n_grid, dtype=float)
    if np.any(n < 0):
        raise ValueError("n must be nonnegative")
    t = _solve_t(lam, n)
    mse = np.zeros_like(n)
    gamma = np.zeros_like(n)
    for i, (ni, ti) in enumerate(zip(n, t)):
        if ti == 0.0:
            continue
        one_minus_u = ti / (ti + lam * ni)
        gamma[i] = np.sum((lam * one_minus_u) ** 2)
        u = 1.0 - one_minus_u
        # 1 - n gamma / t^2 = sum u (1 - u) / n, positive while t > 0
        denom = 1.0 if ni == 0 else float(np.sum(u * one_minus_u)) / ni
        if not denom > 0:
            raise BreakdownError(f"1 - n gamma / t^2 = {denom:.3g} <= 0 at n = {ni:g}")
        mse[i] = float(np.sum(weights.w2 * lam * one_minus_u**2)) / denom
    return LearningCurve(n, mse, 0.0, 1, {"t": t, "gamma": gamma})


def _alpha(a):
    return a.alpha if isinstance(a, SpectralTail) else float(a)


def theta_from_alpha(alpha, d: int) -> float:
    """Eigenvalue-density exponent ``theta = 1 + d / alpha``."""
    a = _alpha(alpha)
    if not a > d:
        raise ValueError(f"alpha={a} must exceed d={d}")
    return 1.0 + d / a


def teacher_q(theta: float, theta_T: float) -> float:
    """Weight exponent ``q`` of a Gaussian Teacher: ``(theta - theta_T)/(theta_T - 1)``."""
    if not theta_T > 1:
        raise ValueError("theta_T must exceed 1")
    return (theta - theta_T) / (theta_T - 1.0)


def asymptotic_exponent_appH(theta: float, q: float) -> float:
    """Asymptotic mode-sum exponent ``(min(q - theta, 0) + 2) / (theta - 1)``.

    Valid for ``1 < theta < 2`` and ``q > theta - 2``, where the sum over
    modes beyond the ``n``-th converges.
    """
    if not 1.0 < theta < 2.0:
        raise ValueError(f"theta={theta} outside (1, 2)")
    if not q > theta - 2.0:
        raise ValueError(f"q={q} <= theta - 2 = {theta - 2.0}: mode sum diverges")
    return (min(q - theta, 0.0) + 2.0) / (theta - 1.0)


def density_exponent(eigenvalues, window=None) -> ExponentFit:
    """Rank-ordered decay ``lambda_rho ~ rho^-1/(theta-1)`` of a spectrum.

    Returns the fit of ``lambda`` against rank; ``theta`` is
    ``1 - 1/fit.exponent``.  The default window is ranks 10 to ``n/4``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    rho = np.arange(1, lam.size + 1)
    if window is None:
        window = (10, lam.size / 4.0)
    return fit_power_law(rho, lam, window)
