"""
Learning curves from a mode sum
===============================

Given eigenvalues lambda_rho and target weights w_rho^2, a scalar equation
for t(n) produces the whole expected learning curve.  With power-law inputs
its slope tends to (min(q - theta, 0) + 2) / (theta - 1).
"""
import numpy as np

from kcurves import theorem_beta
from kcurves.spectral import SpectralWeights, asymptotic_exponent_appH, selfconsistent_curve, teacher_q, theta_from_alpha

M = 100_000
grid = np.geomspace(M / 400, M / 40, 12)
for d, aT, aS in [(1, 2, 2), (2, 3, 3), (1, 4, 2), (3, 5, 5)]:
    theta, thT = theta_from_alpha(aS, d), theta_from_alpha(aT, d)
    q = teacher_q(theta, thT)
    curve = selfconsistent_curve(SpectralWeights.power_law(M, theta, q), grid)
    fit = curve.fit((grid[0], grid[-1]))
    print(f"d={d} alpha_T={aT} alpha_S={aS}: slope {fit.beta:.3f}, "
          f"asymptotic {asymptotic_exponent_appH(theta, q):.3f}, lattice {theorem_beta(aT, aS, d):.3f}")

# with as many samples as modes the predicted error vanishes
w = SpectralWeights(np.full(10, 2.0), np.full(10, 0.5))
print("ten equal modes:", selfconsistent_curve(w, [0, 5, 10]).value)
