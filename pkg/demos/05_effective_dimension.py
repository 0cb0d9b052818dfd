"""
Effective dimension from nearest neighbours
===========================================

In d dimensions the typical distance to the nearest of n points shrinks as
n^(-1/d).  Fitting that law on random subsets recovers the dimension of the
manifold the data lives on, whatever the ambient dimension.
"""
import numpy as np

from kcurves import effective_dimension, sphere_points
from kcurves.geometry import PointCloud

sizes = np.unique(np.geomspace(100, 20_000, 10).astype(int))
for d in (2, 3, 5):
    fit = effective_dimension(sphere_points(20_000, d, seed=d), sizes, replicas=5, seed=d)
    print(f"{d}-sphere in R^{d + 1}: d_eff = {fit.d_eff:.2f}")

# a 2-d sheet embedded linearly in 50 dimensions is still 2-d
rng = np.random.default_rng(0)
flat = rng.uniform(size=(20_000, 2)) @ rng.normal(size=(2, 50))
print(f"plane in R^50: d_eff = {effective_dimension(PointCloud(flat), sizes, 5, 0).d_eff:.2f}")
