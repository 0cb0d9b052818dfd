"""
Exact learning curves on a periodic lattice
===========================================

On a regular grid of n = m^d points in the unit torus the Teacher-averaged
test error of ridgeless regression has a closed form as a sum over the
Brillouin zone.  Here we evaluate it for a few kernel pairs and compare the
fitted exponent with the prediction min(alpha_T - d, 2 alpha_S) / d.
In d=3 only grids up to m=8 are cheap, and the slope there is still well
short of its asymptote.
"""
import numpy as np

from kcurves import KernelSpec, theorem_beta
from kcurves.experiments import lattice_mse_curve

lap = KernelSpec.laplace(0.1)
pairs = [
    ("laplace / laplace", lap, lap, [1, 2, 3]),
    ("matern 1.5 / laplace", KernelSpec.matern(1.5, 0.1), lap, [1, 2]),
    ("gaussian / laplace", KernelSpec.gaussian(0.1), lap, [1]),
]
m_for = {1: [64, 128, 256, 512, 1024], 2: [16, 24, 32, 48, 64], 3: [4, 6, 8]}

for name, T, S, dims in pairs:
    for d in dims:
        c = lattice_mse_curve(T, S, d, m_for[d])
        fit = c.fit((c.n[0], c.n[-1]))
        pred = theorem_beta(T.tail(d), S.tail(d), d)
        print(f"{name:22s} d={d}: beta = {fit.beta:.3f}, predicted {pred:.3f}")

# A Gaussian Teacher with a Gaussian Student decays faster than any power:
# the local slope keeps steepening.
g = KernelSpec.gaussian(0.05)
c = lattice_mse_curve(g, g, 1, [8, 16, 32, 64, 128])
print("gaussian / gaussian local slopes:", np.round(np.diff(np.log(c.value)) / np.diff(np.log(c.n)), 2))
