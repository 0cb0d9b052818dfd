"""Ridgeless kernel regression and its Teacher-averaged test error."""
from __future__ import annotations

import numpy as np
from scipy import linalg

from ._linalg import cholesky_jitter
from .kernels import _as_points, cross_gram, gram

__all__ = [
    "solve_interpolant",
    "predict",
    "empirical_mse",
    "expected_mse_pointwise",
    "expected_mse_closed_form",
    "nested_test_errors",
]


def solve_interpolant(gram_matrix, labels, ridge: float = 0.0, return_jitter: bool = False):
    """Coefficients ``a`` with ``(K + ridge I) a = labels``.

    The system is solved through a Cholesky factorization.  If it fails, a
    jitter is added to the diagonal and escalated, as for Teacher sampling.
    ``labels`` may be a vector or a matrix of several label columns.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    k = np.asarray(gram_matrix, dtype=float)
    y = np.asarray(labels, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] != y.shape[0]:
        raise ValueError(f"Gram {k.shape} and labels {y.shape} do not match")
    if ridge:
        k = k + ridge * np.eye(k.shape[0])
    factor, jitter = cholesky_jitter(k)
    a = linalg.cho_solve((factor, True), y, check_finite=False) if y.shape[0] else y.copy()
    return (a, jitter) if return_jitter else a


def predict(kernel, train, a, test):
    """Predictions ``sum_mu a_mu K(|x - x_mu|)`` at every test point."""
    x = _as_points(train)
    t = _as_points(test)
    if x.shape[1] != t.shape[1]:
        raise ValueError("train and test dimensions differ")
    a = np.asarray(a, dtype=float)
    if x.shape[0] == 0:
        return np.zeros((t.shape[0],) + a.shape[1:])
    return cross_gram(kernel, t, x) @ a


def empirical_mse(predictions, truths) -> float:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("empty input")
    return float(np.mean((p - t) ** 2))


def _prior_variance(kernel, d):
    return kernel.prior_variance(d)


def expected_mse_pointwise(teacher, student, train, test):
    """Teacher-averaged squared error at each test point.

    For ``Z ~ N(0, K_T)`` and the interpolant of the Student, the error at
    ``x`` has variance
    ``K_T(0) - 2 k_S(x) K_S^-1 k_T(x) + k_S(x) K_S^-1 K_T K_S^-1 k_S(x)``.
    Kernels may be :class:`KernelSpec` or :class:`PeriodizedKernel`.
    """
    x = _as_points(train)
    t = _as_points(test)
    d = t.shape[1]
    kt0 = _prior_variance(teacher, d)
    if x.shape[0] == 0:
        return np.full(t.shape[0], kt0)
    ks = gram(student, x)
    factor, _ = cholesky_jitter(ks)
    ks_x = cross_gram(student, x, t)
    b = linalg.cho_solve((factor, True), ks_x, check_finite=False)
    kt_x = cross_gram(teacher, x, t)
    if teacher == student:
        # E = K(0) - k K^-1 k, same as below with K_T = K_S
        return kt0 - np.einsum("ij,ij->j", b, kt_x)
    kt = gram(teacher, x)
    return kt0 - 2.0 * np.einsum("ij,ij->j", b, kt_x) + np.einsum("ij,ij->j", b, kt @ b)


def expected_mse_closed_form(teacher, student, train, test, weights=None) -> float:
    """Teacher-averaged test MSE, exact for Gaussian Teachers.

    Equals the expectation of :func:`empirical_mse` over Teacher draws.
    ``weights`` (summing to one) turn the test average into a quadrature.
    """
    e = expected_mse_pointwise(teacher, student, train, test)
    if weights is None:
        return float(e.mean())
    w = np.asarray(weights, dtype=float)
    if w.shape != e.shape:
        raise ValueError("one weight per test point expected")
    return float(w @ e)


def nested_test_errors(factor, cross, train_labels, test_labels, n_grid):
    """Test MSE of the interpolant on each leading subset of the training set.

    The Cholesky factor of ``K[:n, :n]`` is the leading block of the factor
    of ``K``, so one factorization serves every ``n`` of the grid.

    Parameters
    ----------
    factor : (N, N) array
        Lower Cholesky factor of the Student Gram matrix on all training points.
    cross : (n_test, N) array
        Student kernel between test and training points.
    train_labels, test_labels : arrays
        Labels, or several label columns sharing the same points.
    n_grid : increasing ints <= N
    """
    n_max = int(max(n_grid))
    # forward substitution is nested as well
    w = linalg.solve_triangular(factor[:n_max, :n_max], train_labels[:n_max], lower=True, check_finite=False)
    out = []
    for n in n_grid:
        n = int(n)
        if n == 0:
            pred = np.zeros_like(test_labels, dtype=float)
        else:
            a = linalg.solve_triangular(factor[:n, :n], w[:n], lower=True, trans="T", check_finite=False)
            pred = cross[:, :n] @ a
        out.append(np.mean((pred - test_labels) ** 2, axis=0))
    return np.array(out)
