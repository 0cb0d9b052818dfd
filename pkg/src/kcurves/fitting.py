"""Power-law fits and local slopes of learning and scaling curves."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError

__all__ = ["ExponentFit", "LearningCurve", "fit_power_law", "local_slopes", "last_decade"]


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit of ``log y = log_prefactor + exponent * log x``."""

    exponent: float
    log_prefactor: float
    window: tuple
    r_squared: float
    n_points: int

    @property
    def prefactor(self) -> float:
        return float(np.exp(self.log_prefactor))

    @property
    def beta(self) -> float:
        """Learning-curve exponent of a decaying curve, ``-exponent``."""
        return -self.exponent

    @property
    def d_eff(self) -> float:
        """Dimension implied by a nearest-neighbour fit ``delta ~ n^(-1/d)``."""
        return -1.0 / self.exponent


@dataclass
class LearningCurve:
    """Mean value (MSE, error rate, distance...) against training-set size.

    ``extra`` holds additional per-point columns, each the same length as
    ``n``.
    """

    n: np.ndarray
    value: np.ndarray
    sem: np.ndarray
    replicas: np.ndarray
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n = np.asarray(self.n)
        self.value = np.asarray(self.value, dtype=float)
        m = len(self.n)
        self.sem = np.broadcast_to(np.asarray(self.sem, dtype=float), (m,)).copy()
        self.replicas = np.broadcast_to(np.asarray(self.replicas), (m,)).copy()
        if self.value.shape != (m,):
            raise ValueError("n and value must have the same length")

    @classmethod
    def from_replicas(cls, n, samples, **extra):
        """Aggregate a ``(replicas, len(n))`` array into mean and standard error."""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        r = samples.shape[0]
        mean = samples.mean(axis=0)
        sem = samples.std(axis=0, ddof=1) / np.sqrt(r) if r > 1 else np.zeros_like(mean)
        return cls(np.asarray(n), mean, sem, r, dict(extra))

    def fit(self, window=None) -> ExponentFit:
        return fit_power_law(self.n, self.value, window)


def last_decade(xs):
    xs = np.asarray(xs, dtype=float)
    hi = float(xs.max())
    return (hi / 10.0, hi)


def fit_power_law(xs, ys, window=None) -> ExponentFit:
    """Ordinary least squares of ``log y`` on ``log x``.

    Parameters
    ----------
    xs, ys : array_like
        Positive abscissae and values.
    window : (float, float), optional
        Inclusive range of ``x`` used by the fit.  Defaults to the last
        decade, ``[max(x)/10, max(x)]``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("xs and ys differ in length")
    if window is None:
        window = last_decade(xs)
    lo, hi = window
    if not lo <= hi:
        raise FitError(f"empty fit window {window}")
    sel = (xs >= lo) & (xs <= hi)
    x, y = xs[sel], ys[sel]
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive values")
    if x.size < 3:
        raise FitError(f"fit window {window} holds {x.size} points, need at least 3")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    dx, dy = lx - mx, ly - my
    sxx = dx @ dx
    if sxx == 0:
        raise FitError("all abscissae in the window coincide")
    # a flat window has slope exactly 0, not a rounding residue
    slope = 0.0 if np.ptp(ly) == 0 else (dx @ dy) / sxx
    intercept = my - slope * mx
    resid = dy - slope * dx
    ss_tot = dy @ dy
    ss_res = resid @ resid
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return ExponentFit(float(slope), float(intercept), (float(lo), float(hi)), float(r2), int(x.size))


def local_slopes(xs, ys):
    """Finite-difference slopes of ``log y`` against ``log x``.

    Returns an array of shape ``(len(xs) - 1, 2)`` holding the geometric
    midpoint of each interval and the slope over it.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise FitError("need at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("local slopes need positive values")
    lx, ly = np.log(xs), np.log(ys)
    slopes = np.diff(ly) / np.diff(lx)
    mids = np.exp(0.5 * (lx[1:] + lx[:-1]))
    return np.column_stack([mids, slopes])
