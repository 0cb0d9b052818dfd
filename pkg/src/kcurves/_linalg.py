import numpy as np
from scipy import linalg

from .errors import NumericalError

MAX_RETRIES = 3


def cholesky_jitter(a, *, lower=True):
    """Cholesky factor of ``a + jitter*I`` with escalating jitter.

    The first attempt uses no jitter.  Retries add ``1e-12*trace/n`` and
    multiply it by ten each time, up to three retries.

    Returns
    -------
    factor : ndarray
        Triangular factor (lower by default).
    jitter : float
        Jitter that was finally added to the diagonal.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    base = 1e-12 * np.trace(a) / n
    jitter = 0.0
    for attempt in range(MAX_RETRIES + 1):
        if attempt:
            jitter = base * 10.0 ** (attempt - 1)
        m = a if jitter == 0.0 else a + jitter * np.eye(n)
        try:
            return linalg.cholesky(m, lower=lower, check_finite=False), jitter
        except linalg.LinAlgError:
            continue
    raise NumericalError(
        f"matrix not positive definite after jitter {jitter:.3g}", jitter=jitter
    )


def cho_solve_jitter(a, b):
    """Solve ``(a + jitter*I) x = b`` with the escalating-jitter policy."""
    factor, jitter = cholesky_jitter(a, lower=True)
    x = linalg.cho_solve((factor, True), b, check_finite=False)
    return x, jitter
