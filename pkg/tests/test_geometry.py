import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcurves.geometry import (
    Provenance,
    delta_min_curve,
    effective_dimension,
    lattice_points,
    nn_distances,
    sample_hypersphere,
    sphere_points,
)


def test_hypersphere_norms_and_determinism():
    p = sample_hypersphere(500, 4, seed=3)
    assert p.coords.shape == (500, 4)
    assert np.allclose(np.linalg.norm(p.coords, axis=1), 1, atol=1e-14)
    assert np.array_equal(p.coords, sample_hypersphere(500, 4, seed=3).coords)
    assert p.provenance is Provenance.HYPERSPHERE
    assert sphere_points(10, 2, 0).d == 3


def test_hypersphere_is_isotropic():
    x = sample_hypersphere(40000, 3, seed=1).coords
    assert np.abs(x.mean(axis=0)).max() < 0.02
    assert np.allclose(x.T @ x / len(x), np.eye(3) / 3, atol=0.01)


def test_lattice():
    p = lattice_points(2.0, 4, 2)
    assert p.n == 16 and p.box == 2.0
    assert np.allclose(p.coords[:4], [[0, 0], [0, 0.5], [0, 1.0], [0, 1.5]])
    with pytest.raises(MemoryError):
        lattice_points(1.0, 10**4, 2)


def _naive_nn(x, box=None):
    n = len(x)
    out = np.empty(n)
    for i in range(n):
        best = np.inf
        for j in range(n):
            if i != j:
                d = x[i] - x[j]
                if box is not None:
                    d = d - box * np.round(d / box)
                best = min(best, np.sqrt(np.sum(d * d)))
        out[i] = best
    return out


def test_nn_matches_double_loop():
    x = sample_hypersphere(100, 3, seed=5).coords
    assert np.array_equal(nn_distances(x, method="brute"), _naive_nn(x))
    assert nn_distances(x).mean() == _naive_nn(x).mean()


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 200), st.integers(1, 5), st.integers(0, 10**6), st.booleans())
def test_tree_agrees_with_brute(n, d, seed, periodic):
    x = np.random.default_rng(seed).uniform(0, 1, size=(n, d))
    box = 1.0 if periodic else None
    assert np.allclose(nn_distances(x, box, "tree"), nn_distances(x, box, "brute"), atol=1e-12, rtol=0)


def test_periodic_lattice_nn():
    p = lattice_points(1.0, 8, 2)
    assert np.allclose(nn_distances(p, box=1.0), 1 / 8)


def test_delta_min_lattice_exact_exponent():
    # points of a regular 1-d grid: subsets have mean gaps ~ 1/n
    x = np.linspace(0, 1, 2001)[:, None]
    c = delta_min_curve(x, [20, 50, 100, 200, 500, 1000, 2000], replicas=4, seed=0)
    assert np.all(np.diff(c.value) < 0)


@pytest.mark.parametrize("d", [2, 3])
def test_effective_dimension_hypersphere(d):
    pts = sphere_points(6000, d, seed=d)
    f = effective_dimension(pts, [300, 600, 1200, 2400, 4800, 6000], replicas=4, seed=1)
    assert f.d_eff == pytest.approx(d, abs=0.5)
