import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from kcurves.errors import FitError
from kcurves.fitting import LearningCurve
from kcurves.geometry import sphere_points
from kcurves.kernels import KernelSpec, gram, spectral_exponent
from kcurves.lattice import theorem_beta
from kcurves.spectral import (
    SpectralDecomposition,
    SpectralWeights,
    asymptotic_exponent_appH,
    beta_from_tail,
    density_exponent,
    kernel_pca,
    selfconsistent_curve,
    tail_power_curve,
    teacher_q,
    theta_from_alpha,
)


def test_identity_gram():
    z = np.random.default_rng(0).normal(size=20)
    dec = kernel_pca(np.eye(20), z)
    assert np.allclose(dec.eigenvalues, 1)
    assert np.sum(dec.projections**2) == pytest.approx(z @ z, rel=1e-12)


def test_rank_one():
    v = np.arange(1.0, 11.0)
    dec = kernel_pca(np.outer(v, v), np.ones(10))
    assert dec.eigenvalues[0] == pytest.approx(v @ v, rel=1e-12)
    assert np.all(dec.eigenvalues[1:] < 1e-10 * dec.eigenvalues[0])


def test_orthonormal_and_parseval():
    x = sphere_points(200, 3, 0)
    z = np.random.default_rng(1).normal(size=200)
    dec = kernel_pca(gram(KernelSpec.laplace(3.0), x), z)
    phi = dec.eigenvectors
    assert np.max(np.abs(phi.T @ phi - np.eye(200))) < 1e-8
    assert np.all(np.diff(dec.eigenvalues) <= 0)
    curve = tail_power_curve(dec, [1, 50, 200])
    assert curve.value[0] == pytest.approx(z @ z, rel=1e-8)
    assert curve.value[-1] == pytest.approx(dec.projections[-1] ** 2, rel=1e-12)


def test_bad_inputs():
    with pytest.raises(ValueError):
        kernel_pca(np.eye(3), np.ones(4))
    dec = kernel_pca(np.eye(3), np.ones(3))
    with pytest.raises(ValueError):
        tail_power_curve(dec, [1, 4])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10_000))
def test_tail_power_non_increasing(n, seed):
    r = np.random.default_rng(seed)
    a = r.normal(size=(n, n))
    dec = kernel_pca(a @ a.T, r.normal(size=n))
    v = tail_power_curve(dec, np.arange(1, n + 1)).value
    assert np.all(v >= 0)
    assert np.all(np.diff(v) <= 0)


def test_gram_spectrum_density_exponent():
    # Laplace in d=3 decays as w^-4, so theta = 1 + 3/4
    lam = kernel_pca(gram(KernelSpec.laplace(3.0), sphere_points(300, 3, 0)), np.ones(300)).eigenvalues
    theta = 1.0 - 1.0 / density_exponent(lam).exponent
    assert theta == pytest.approx(theta_from_alpha(spectral_exponent(KernelSpec.laplace(), 3), 3), rel=0.05)


@pytest.mark.slow
def test_gram_eigenvalues_converge():
    k = KernelSpec.laplace(3.0)
    a = linalg.eigvalsh(gram(k, sphere_points(2048, 3, 1)))[::-1][:10] / 2048
    b = linalg.eigvalsh(gram(k, sphere_points(4096, 3, 2)))[::-1][:10] / 4096
    assert np.all(np.abs(a / b - 1) < 0.1)


def test_beta_from_tail_synthetic():
    nt = 10_000
    q2 = np.arange(1, nt + 1, dtype=float) ** -1.5
    dec = SpectralDecomposition(np.ones(nt), np.empty((0, 0)), np.sqrt(q2))
    curve = tail_power_curve(dec, np.unique(np.geomspace(1, nt, 200).astype(int)))
    assert beta_from_tail(curve).beta == pytest.approx(0.5, abs=0.02)
    assert beta_from_tail(curve, method="loglog").beta > 0  # plain fit, biased by the cutoff


def test_beta_from_tail_degenerate():
    c = LearningCurve(np.array([1, 2, 3, 4]), np.ones(4), 0.0, 1)
    with pytest.raises(FitError):
        beta_from_tail(c, window=(1, 2), n_tilde=4)
    with pytest.raises(FitError):
        beta_from_tail(c, window=(1, 4), n_tilde=4)


def test_selfconsistent_n_zero_is_prior_power():
    w = SpectralWeights.power_law(500, 1.5, 0.3)
    c = selfconsistent_curve(w, [0])
    assert c.extra["t"][0] == pytest.approx(w.lam.sum())
    assert c.value[0] == pytest.approx(np.sum(w.w2 * w.lam), rel=1e-12)


@pytest.mark.parametrize("n", [0.1, 0.5, 0.9])
def test_selfconsistent_single_mode(n):
    # t = 1/(1 + n/t) gives t = 1 - n; then gamma = t^2 and E = (1-n)^2 / (1-n) = 1 - n
    c = selfconsistent_curve(SpectralWeights([1.0], [1.0]), [n])
    assert c.extra["t"][0] == pytest.approx(1 - n, rel=1e-10)
    assert c.value[0] == pytest.approx(1 - n, rel=1e-9)


def test_selfconsistent_equal_modes():
    # M equal modes: t = lam (M - n)/M and E = w2 lam (M - n)/M
    M = 10
    w = SpectralWeights(np.full(M, 2.0), np.full(M, 0.5))
    c = selfconsistent_curve(w, [0, 1, 3, 9, 10, 20])
    assert np.allclose(c.value, 0.5 * 2.0 * np.array([10, 9, 7, 1, 0, 0]), rtol=1e-9)


def test_selfconsistent_monotone():
    w = SpectralWeights.power_law(20_000, 1.5, 0.0)
    v = selfconsistent_curve(w, np.geomspace(1, 5000, 30)).value
    assert np.all(np.diff(v) < 0)


@pytest.mark.parametrize("d,aT,aS", [(1, 2, 2), (2, 3, 3), (1, 4, 2)])
def test_selfconsistent_power_law_slope(d, aT, aS):
    theta, thT = 1 + d / aS, 1 + d / aT
    M = 100_000
    c = selfconsistent_curve(SpectralWeights.power_law(M, theta, teacher_q(theta, thT)), np.geomspace(M / 400, M / 40, 12))
    b = c.fit((M / 400, M / 40)).beta
    assert b == pytest.approx(theorem_beta(aT, aS, d), rel=0.1)


def test_mode_sum_exponent_examples():
    assert theta_from_alpha(3, 2) == pytest.approx(5 / 3)
    assert asymptotic_exponent_appH(1.5, 2.0) == pytest.approx(2 / 0.5)
    assert asymptotic_exponent_appH(1.5, teacher_q(1.5, 1.5)) == pytest.approx(1.0) == theorem_beta(2, 2, 1)
    with pytest.raises(ValueError):
        asymptotic_exponent_appH(1.5, -0.6)
    with pytest.raises(ValueError):
        asymptotic_exponent_appH(2.5, 1.0)
    with pytest.raises(ValueError):
        theta_from_alpha(2, 3)


def test_mode_sum_exponent_matches_lattice_on_grid():
    r = np.random.default_rng(0)
    checked = 0
    while checked < 100:
        d = int(r.integers(1, 6))
        aS = d + r.uniform(d, 3 * d)  # theta_S < 2 needs alpha_S > d
        aT = d + r.uniform(0.05, 4 * d)
        theta, thT = theta_from_alpha(aS, d), theta_from_alpha(aT, d)
        got = asymptotic_exponent_appH(theta, teacher_q(theta, thT))
        assert abs(got - theorem_beta(aT, aS, d)) < 1e-12 * max(1.0, got)
        checked += 1
    assert math.isfinite(got)
