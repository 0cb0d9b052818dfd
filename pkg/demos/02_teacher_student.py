"""
Teacher-Student regression on the sphere
========================================

A Gaussian field with Laplace covariance is sampled on random points of the
d-sphere and interpolated with the same kernel.  The test error decays as
n^-beta with beta close to 1/d, so learning slows down sharply with the
dimension.  A few replicas are enough to see the trend.
"""
import numpy as np

from kcurves import KernelSpec
from kcurves.experiments import geometric_grid, teacher_student_curve

grid = geometric_grid(16, 1024, 12)
for d in (1, 2, 3):
    k = KernelSpec.laplace(float(d))
    curve = teacher_student_curve(k, k, d, grid, replicas=10, n_test=500, seed=d)
    fit = curve.fit()
    print(f"d={d}: beta = {fit.beta:.3f} over n in [{fit.window[0]:g}, {fit.window[1]:g}] (1/d = {1 / d:.3f})")

# a Matern Teacher is smoother, and a Laplace Student can exploit that up to
# beta = min(2 nu, 4) on the circle
T, S = KernelSpec.matern(1.5, 1.0), KernelSpec.laplace(1.0)
curve = teacher_student_curve(T, S, 1, grid, replicas=10, n_test=500, seed=7)
print(f"matern 1.5 teacher, laplace student, d=1: beta = {curve.fit().beta:.2f}")
print("mean test error:", np.array2string(curve.value, precision=2))
