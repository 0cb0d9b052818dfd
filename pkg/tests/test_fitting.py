import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcurves.errors import FitError
from kcurves.fitting import LearningCurve, fit_power_law, last_decade, local_slopes


def test_exact_power_law():
    x = np.geomspace(1, 1000, 20)
    f = fit_power_law(x, 4 * x**-0.5, (1, 1000))
    assert f.exponent == pytest.approx(-0.5, abs=1e-12)
    assert f.prefactor == pytest.approx(4, abs=1e-12)
    assert f.r_squared == pytest.approx(1, abs=1e-12)
    assert f.beta == pytest.approx(0.5, abs=1e-12)


def test_constant():
    x = np.arange(1, 30)
    f = fit_power_law(x, np.full(x.size, 3.0), (1, 30))
    assert f.exponent == 0.0


def test_against_normal_equations():
    x = np.geomspace(1, 1e4, 40)
    y = x**-1 * (1 + 0.3 * np.sin(np.log(x)))
    f = fit_power_law(x, y, (1, 1e4))
    A = np.column_stack([np.ones(x.size), np.log(x)])
    coef = np.linalg.solve(A.T @ A, A.T @ np.log(y))
    assert f.log_prefactor == pytest.approx(coef[0], abs=1e-12)
    assert f.exponent == pytest.approx(coef[1], abs=1e-12)


def test_default_window_is_last_decade():
    x = np.geomspace(1, 1e4, 41)
    y = np.where(x < 1e3, x**-2.0, 1e6 * x**-4.0)
    f = fit_power_law(x, y)
    assert f.window == last_decade(x) == (1e3, 1e4)
    assert f.exponent == pytest.approx(-4, abs=1e-12)


def test_errors():
    with pytest.raises(FitError):
        fit_power_law([1, 2, 3, 4], [1, 2, 3, 4], (1, 2))
    with pytest.raises(ValueError):
        fit_power_law([1, 2, 3], [1, -2, 3], (1, 3))
    with pytest.raises(FitError):
        local_slopes([1], [1])


def test_local_slopes():
    s = local_slopes([1, 10], [1, 0.1])
    assert s[0, 1] == pytest.approx(-1)
    assert s[0, 0] == pytest.approx(np.sqrt(10))
    x = np.geomspace(1, 100, 9)
    assert np.allclose(local_slopes(x, 2 * x**1.7)[:, 1], 1.7)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 100), st.floats(1e-3, 1e3), st.integers(0, 20))
def test_log_affine_invariance(a, c, scale, lo_idx):
    x = np.geomspace(1, 1e3, 31)
    y = c * x**a
    f1 = fit_power_law(x, y, (1, 1e3))
    f2 = fit_power_law(scale * x, y, (scale, scale * 1e3))
    assert f2.exponent == pytest.approx(f1.exponent, abs=1e-9)
    # any sub-window of exact data gives the same exponent
    f3 = fit_power_law(x, y, (x[lo_idx], x[lo_idx + 10]))
    assert f3.exponent == pytest.approx(a, abs=1e-9)


def test_learning_curve_from_replicas():
    s = np.array([[1.0, 2.0], [3.0, 4.0]])
    c = LearningCurve.from_replicas([10, 20], s, jitter=[0, 0])
    assert np.allclose(c.value, [2, 3])
    assert np.allclose(c.sem, [np.sqrt(2) / np.sqrt(2)] * 2)
    assert np.all(c.replicas == 2)
    assert "jitter" in c.extra
