"""
Kernel SVM on the sign of a random field
========================================

Labels are the sign of a Teacher field on the circle; a soft-margin SVM
with a Laplace kernel learns them, and its test error drops with n.
"""
import numpy as np

from kcurves import KernelSpec, gram, sample_field, sphere_points
from kcurves.svm import classify, error_rate, kkt_residual, train_soft_margin

k = KernelSpec.laplace(1.0)
pts = sphere_points(3000, 1, seed=0)
y = np.where(sample_field(KernelSpec.matern(1.5, 0.5), pts, seed=1).values >= 0, 1.0, -1.0)
train, test = pts.coords[:2000], pts.coords[2000:]

for n in (32, 128, 512, 2000):
    K = gram(k, train[:n])
    model = train_soft_margin(K, y[:n])
    err = error_rate(classify(model, k, train[:n], test), y[2000:])
    print(f"n={n:5d}: test error {err:.3f}, {model.support.size} support vectors, "
          f"KKT residual {kkt_residual(model, K):.1e}")
