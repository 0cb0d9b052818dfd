import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcurves.geometry import lattice_points, sphere_points
from kcurves.grf import sample_fields
from kcurves.kernels import KernelSpec, PeriodizedKernel, evaluate, gram
from kcurves.regression import (
    empirical_mse,
    expected_mse_closed_form,
    nested_test_errors,
    predict,
    solve_interpolant,
)
from kcurves._linalg import cholesky_jitter

LAP = KernelSpec.laplace(1.0)


def test_identity_system():
    assert np.allclose(solve_interpolant(np.eye(2), [2.0, -1.0]), [2, -1])


def test_residual_and_inverse_oracle():
    x = sphere_points(40, 3, 0)
    K = gram(LAP, x)
    z = np.random.default_rng(0).normal(size=40)
    a = solve_interpolant(K, z)
    assert np.max(np.abs(K @ a - z)) < 1e-8 * np.max(np.abs(z))
    assert np.allclose(a, np.linalg.inv(K) @ z, atol=1e-8)


def test_ridge_limit_stable():
    x = sphere_points(30, 2, 1)
    K = gram(LAP, x)
    z = np.random.default_rng(1).normal(size=30)
    t = sphere_points(10, 2, 2)
    p1 = predict(LAP, x, solve_interpolant(K, z, ridge=1e-12), t)
    p2 = predict(LAP, x, solve_interpolant(K, z, ridge=1e-10), t)
    assert np.max(np.abs(p1 - p2)) < 1e-4 * np.max(np.abs(p1))


def test_predict():
    x = sphere_points(30, 2, 3)
    z = np.random.default_rng(3).normal(size=30)
    a = solve_interpolant(gram(LAP, x), z)
    assert np.allclose(predict(LAP, x, a, x.coords[:5]), z[:5], atol=1e-6)
    t = sphere_points(10, 2, 4).coords
    naive = np.array([sum(a[m] * evaluate(LAP, np.linalg.norm(tt - x.coords[m])) for m in range(30)) for tt in t])
    assert np.allclose(predict(LAP, x, a, t), naive, rtol=0, atol=1e-12)
    assert np.all(predict(LAP, x, np.zeros(30), t) == 0)


def test_empirical_mse():
    assert empirical_mse([1, 2], [1, 2]) == 0
    assert empirical_mse([1, 0], [0, 0]) == 0.5
    r = np.random.default_rng(5)
    p, t = r.normal(size=100), r.normal(size=100)
    d = p - t
    assert empirical_mse(p, t) == pytest.approx(sum(v * v for v in d) / 100, rel=1e-15)
    with pytest.raises(ValueError):
        empirical_mse([1, 2], [1])


@settings(max_examples=30, deadline=None)
@given(st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3), st.integers(0, 1000))
def test_scaling_equivariance(c, seed):
    x = sphere_points(15, 2, seed)
    t = sphere_points(5, 2, seed + 1)
    z = np.random.default_rng(seed).normal(size=15)
    K = gram(LAP, x)
    p = predict(LAP, x, solve_interpolant(K, z), t)
    pc = predict(LAP, x, solve_interpolant(K, c * z), t)
    assert np.allclose(pc, c * p, rtol=1e-9, atol=1e-12)
    truth = np.ones(5)
    assert empirical_mse(pc, c * truth) == pytest.approx(c * c * empirical_mse(p, truth), rel=1e-9)


def test_closed_form_special_cases():
    x = sphere_points(20, 2, 0)
    assert expected_mse_closed_form(LAP, LAP, x, x.coords[:7]) == pytest.approx(0, abs=1e-8)
    empty = np.zeros((0, 3))
    assert expected_mse_closed_form(KernelSpec.laplace(1, 2.5), LAP, empty, x) == 2.5


def test_closed_form_matches_monte_carlo():
    pk = PeriodizedKernel(KernelSpec.laplace(0.2), 1.0, 20)
    train = lattice_points(1.0, 16, 1).coords
    test = (np.arange(64) + 0.5)[:, None] / 64
    pts = np.vstack([train, test])
    z, _ = sample_fields(pk, pts, seed=3, replicas=10_000)
    a = solve_interpolant(gram(pk, train), z[:, :16].T)
    pred = predict(pk, train, a, test)
    per = np.mean((pred.T - z[:, 16:]) ** 2, axis=1)
    exact = expected_mse_closed_form(pk, pk, train, test)
    assert abs(per.mean() - exact) < 3 * per.std(ddof=1) / np.sqrt(len(per))


def test_mismatched_closed_form_matches_monte_carlo():
    T, S = KernelSpec.matern(1.5, 0.5), KernelSpec.laplace(0.7)
    train = sphere_points(25, 2, 0).coords
    test = sphere_points(30, 2, 1).coords
    z, _ = sample_fields(T, np.vstack([train, test]), seed=9, replicas=10_000)
    a = solve_interpolant(gram(S, train), z[:, :25].T)
    per = np.mean((predict(S, train, a, test).T - z[:, 25:]) ** 2, axis=1)
    exact = expected_mse_closed_form(T, S, train, test)
    assert abs(per.mean() - exact) < 3 * per.std(ddof=1) / np.sqrt(len(per))


@pytest.mark.parametrize("seed", range(10))
def test_adding_points_never_hurts_bayes_student(seed):
    pts = sphere_points(31, 2, seed).coords
    test = sphere_points(50, 2, seed + 100).coords
    vals = [expected_mse_closed_form(LAP, LAP, pts[:n], test) for n in range(0, 31, 3)]
    assert np.all(np.diff(vals) <= 1e-12)


def test_nested_errors_match_direct_solves():
    x = sphere_points(60, 3, 0).coords
    t = sphere_points(20, 3, 1).coords
    r = np.random.default_rng(0)
    z, zt = r.normal(size=60), r.normal(size=20)
    L, _ = cholesky_jitter(gram(LAP, x))
    cross = LAP.cross(t, x)
    grid = [5, 17, 60]
    got = nested_test_errors(L, cross, z, zt, grid)
    for g, n in zip(got, grid):
        a = solve_interpolant(gram(LAP, x[:n]), z[:n])
        assert g == pytest.approx(empirical_mse(predict(LAP, x[:n], a, t), zt), rel=1e-10)
