import numpy as np
import pytest
from scipy import stats

from kcurves.geometry import PointCloud, lattice_points, sphere_points
from kcurves.grf import sample_field, sample_field_lattice, sample_fields, sample_fields_lattice
from kcurves.kernels import KernelSpec, PeriodizedKernel, gram

LAP = KernelSpec.laplace(0.2)


def test_single_point_variance():
    z, _ = sample_fields(KernelSpec.laplace(), np.zeros((1, 3)), seed=0, replicas=100_000)
    assert z.var() == pytest.approx(1.0, abs=0.02)


def test_coincident_points():
    f = sample_field(KernelSpec.gaussian(), np.zeros((2, 2)), seed=1)
    assert f.jitter > 0
    assert abs(f.values[0] - f.values[1]) < 1e-5


def test_replicas_reproducible_independently():
    pts = sphere_points(20, 2, 0)
    z, _ = sample_fields(LAP, pts, seed=7, replicas=5)
    assert np.array_equal(z[3], sample_fields(LAP, pts, seed=7, replicas=4)[0][3])
    assert np.allclose(sample_field(LAP, pts, seed=7).values, z[0], rtol=0, atol=1e-12)


def test_hypersphere_covariance():
    pts = sphere_points(50, 2, seed=3)
    k = KernelSpec.laplace(1.0)
    z, _ = sample_fields(k, pts, seed=4, replicas=20_000)
    assert np.max(np.abs(z.T @ z / len(z) - gram(k, pts))) < 5e-2


def test_lattice_single_site():
    z = sample_fields_lattice(LAP, 1.0, 1, 1, seed=0, replicas=10_000)
    k0 = PeriodizedKernel(LAP, 1.0, 20).prior_variance(1)
    se = k0 * np.sqrt(2 / len(z))
    assert abs(z.var() - k0) < 3 * se


def test_lattice_covariance_matches_periodized_kernel():
    m = 32
    z = sample_fields_lattice(LAP, 1.0, m, 1, seed=11, replicas=10_000)
    # circular autocovariance per replica, then mean and standard error over replicas
    c = np.stack([np.mean(z * np.roll(z, -k, axis=1), axis=1) for k in range(m)], axis=1)
    mean, se = c.mean(axis=0), c.std(axis=0, ddof=1) / np.sqrt(len(c))
    ref = PeriodizedKernel(LAP, 1.0, 20).displacement_value((np.arange(m) / m)[:, None])
    assert np.all(np.abs(mean - ref) < 3 * se)


def test_lattice_stationary_and_isotropic_d2():
    m = 8
    z = sample_fields_lattice(KernelSpec.laplace(0.3), 1.0, m, 2, seed=5, replicas=4000).reshape(-1, m, m)
    cx = np.mean(z * np.roll(z, -1, axis=1), axis=(1, 2))
    cy = np.mean(z * np.roll(z, -1, axis=2), axis=(1, 2))
    diff = cx - cy
    assert abs(diff.mean()) < 3 * diff.std(ddof=1) / np.sqrt(len(diff))


def test_lattice_field_is_real_and_shaped():
    f = sample_field_lattice(LAP, 1.0, 16, 2, seed=0)
    assert f.values.shape == (256,)
    assert f.points.n == 256
    assert np.all(np.isfinite(f.values))


def test_lattice_and_gram_sampling_agree_in_law():
    m, R = 16, 10_000
    pk = PeriodizedKernel(LAP, 1.0, 20)
    a = sample_fields_lattice(LAP, 1.0, m, 1, seed=1, replicas=R)
    b, _ = sample_fields(pk, lattice_points(1.0, m, 1), seed=2, replicas=R)
    for site in (0, 7):
        assert stats.levene(a[:, site], b[:, site]).pvalue > 0.01
        assert stats.ks_2samp(a[:, site], b[:, site]).pvalue > 0.01


def test_field_sample_validation():
    with pytest.raises(ValueError):
        from kcurves.grf import FieldSample

        FieldSample(np.zeros(3), PointCloud(np.zeros((2, 1))), LAP)
