"""Soft-margin kernel SVM trained on its dual.

The dual problem is ``min_a 1/2 a Q a - sum(a)`` subject to ``y.a = 0`` and
``0 <= a <= C``, with ``Q = diag(y) K diag(y)``.  It is solved by sequential
minimal optimization: each step moves the pair of multipliers that violates
the optimality conditions most, in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .kernels import cross_gram

__all__ = ["SvmModel", "train_soft_margin", "decision_function", "classify", "error_rate", "kkt_residual"]

DEFAULT_C = 1e4


@dataclass
class SvmModel:
    alphas: np.ndarray
    bias: float
    C: float
    labels: np.ndarray
    iterations: int = 0
    gap: float = 0.0
    history: list = field(default_factory=list)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 0)

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero((self.alphas > 0) & (self.alphas < self.C))

    def dual_objective(self, gram_matrix) -> float:
        """``sum(a) - 1/2 a Q a`` (the maximized form)."""
        ay = self.alphas * self.labels
        return float(self.alphas.sum() - 0.5 * ay @ np.asarray(gram_matrix) @ ay)


def _check_labels(labels):
    y = np.asarray(labels, dtype=float)
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == 1) or np.all(y == -1):
        raise ValueError("both classes must be present")
    return y


def train_soft_margin(gram_matrix, labels, C: float = DEFAULT_C, tol: float = 1e-3,
                      max_iter=None, record_history: bool = False) -> SvmModel:
    """Solve the soft-margin dual by maximal-violating-pair SMO.

    Stops when the violation gap ``max_{I_up} -y G - min_{I_low} -y G``
    drops below ``tol``; every training point then meets the margin
    conditions to within ``tol``.  The bias is the mean of ``y - sum a y K``
    over free support vectors (``0 < a < C``), or the midpoint of the final
    gap when there are none.

    Parameters
    ----------
    gram_matrix : (n, n) array
    labels : (n,) array of +1/-1
    C : float
        Box constraint, ``1e4`` by default.
    tol : float
        KKT tolerance.
    max_iter : int, optional
        Cap on pair updates, ``10^5 n`` by default.
    record_history : bool
        Keep the minimized dual objective after every update.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    y = _check_labels(labels)
    K = np.asarray(gram_matrix, dtype=float)
    n = y.size
    if K.shape != (n, n):
        raise ValueError("Gram matrix and labels do not match")
    if max_iter is None:
        max_iter = 100_000 * n
    a = np.zeros(n)
    G = -np.ones(n)  # gradient Q a - 1
    diagK = np.diag(K).copy()
    history = []
    it = 0
    while True:
        ymG = -y * G
        up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
        low = ((y < 0) & (a < C)) | ((y > 0) & (a > 0))
        i = int(np.flatnonzero(up)[np.argmax(ymG[up])])
        j = int(np.flatnonzero(low)[np.argmin(ymG[low])])
        gap = ymG[i] - ymG[j]
        if gap < tol:
            break
        if it >= max_iter:
            raise ConvergenceError(f"SMO did not converge in {max_iter} updates", residual=float(gap))
        eta = diagK[i] + diagK[j] - 2.0 * K[i, j]
        if eta <= 0:
            eta = 1e-12
        step = gap / eta
        # a_i moves by y_i step, a_j by -y_j step; y.a is unchanged
        step = min(step, C - a[i] if y[i] > 0 else a[i], C - a[j] if y[j] < 0 else a[j])
        a[i] += y[i] * step
        a[j] -= y[j] * step
        # snap to the box against rounding
        for k in (i, j):
            if a[k] < 1e-12 * C:
                a[k] = 0.0
            elif a[k] > C * (1 - 1e-12):
                a[k] = C
        G += step * y * (K[:, i] - K[:, j])
        it += 1
        if record_history:
            history.append(0.5 * float(a @ (G - 1.0)))
    free = (a > 0) & (a < C)
    if np.any(free):
        b = float(np.mean(-y[free] * G[free]))
    else:
        b = float(0.5 * (ymG[i] + ymG[j]))
    return SvmModel(a, b, float(C), y, it, float(gap), history)


def decision_function(model: SvmModel, kernel, train, test):
    """``f(x) = sum_mu a_mu y_mu K(x_mu, x) + b`` at every test point."""
    sv = model.support
    coef = model.alphas[sv] * model.labels[sv]
    x = np.asarray(getattr(train, "coords", train), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    k = cross_gram(kernel, test, x[sv])
    return k @ coef + model.bias


def classify(model: SvmModel, kernel, train, test):
    """Predicted labels ``sign f(x)``, with ``sign(0) = +1``."""
    f = decision_function(model, kernel, train, test)
    return np.where(f >= 0, 1.0, -1.0)


def error_rate(predicted, truths) -> float:
    """Fraction of test points whose predicted sign disagrees with the truth."""
    p = np.asarray(predicted, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape or p.size == 0:
        raise ValueError("predictions and truths must be nonempty and of equal length")
    return float(np.mean(p * t < 0))


def kkt_residual(model: SvmModel, gram_matrix) -> float:
    """Largest violation of the margin conditions on the training set.

    With margins ``m = y f(x)``: ``m >= 1`` where ``a = 0``, ``m = 1`` where
    ``0 < a < C`` and ``m <= 1`` where ``a = C``.
    """
    K = np.asarray(gram_matrix, dtype=float)
    y = model.labels
    a = model.alphas
    m = y * (K @ (a * y) + model.bias)
    C = model.C
    viol = np.zeros_like(m)
    zero = a == 0
    top = a == C
    mid = ~zero & ~top
    viol[zero] = np.maximum(0.0, 1.0 - m[zero])
    viol[mid] = np.abs(m[mid] - 1.0)
    viol[top] = np.maximum(0.0, m[top] - 1.0)
    return float(viol.max())
