"""
Predicting the exponent from the Gram spectrum
==============================================

Project the labels on the eigenvectors of the Student Gram matrix.  If the
squared projections decay as rho^-a, the tail power sum_{rho >= n} q_rho^2
decays as n^-(a-1), and a - 1 estimates the learning-curve exponent without
training a single model.
"""
import numpy as np

from kcurves import KernelSpec, gram, kernel_pca, sphere_points, tail_power_curve
from kcurves.spectral import beta_from_tail
from kcurves._linalg import cholesky_jitter

n_tilde, d = 2048, 3
k = KernelSpec.laplace(float(d))
x = sphere_points(n_tilde, d, seed=0)
K = gram(k, x)
L, _ = cholesky_jitter(K)
z = L @ np.random.default_rng(1).standard_normal(n_tilde)  # one Teacher draw

dec = kernel_pca(K, z)
grid = np.unique(np.geomspace(1, n_tilde, 60).astype(int))
curve = tail_power_curve(dec, grid)
print("tail power at n = 1 equals |Z|^2:", np.isclose(curve.value[0], z @ z))

fit = beta_from_tail(curve, method="loglog")
print(f"beta_hat = {fit.beta:.3f} from ranks {fit.window[0]:g} to {fit.window[1]:g}; 1/d = {1 / d:.3f}")

# the last decade of ranks is distorted by the finite sample
late = beta_from_tail(curve, (n_tilde / 10, 0.95 * n_tilde), method="loglog")
print(f"the same fit over the last decade gives {late.beta:.3f}")
