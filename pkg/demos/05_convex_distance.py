"""Convex distance to a set, solved as a minimum-norm point in a hull.

Run: python demos/05_convex_distance.py
"""
import numpy as np

from dobrushin_lab import bounds
from dobrushin_lab.convexdist import (
    ConvexDistanceInstance, convex_distance, convex_distance_experiment, convex_distance_oracle,
)
from dobrushin_lab.selfbounding import ProductSpace

# %% A small instance, against the exhaustive oracle
inst = ConvexDistanceInstance(np.zeros(5, dtype=int), np.array([[1, 1, 0, 0, 0], [0, 0, 1, 1, 0],
                                                                [0, 0, 0, 0, 1]]))
r = convex_distance(inst)
print("d_T =", round(r.value, 6), " oracle =", round(convex_distance_oracle(inst), 6))
print("optimal direction", np.round(r.optimal_direction, 4))

# %% E exp(rate d_T^2) P(S) <= 1 for independent bits, computed exactly on {0,1}^10
pts = ProductSpace.cube(10).points()
probs = np.full(len(pts), 1 / len(pts))
S = pts[pts.sum(axis=1) >= 5]
for norm1 in (0.0, 0.2):
    rate = bounds.convex_distance_rate(norm1)
    rep = convex_distance_experiment(pts, S, rate, probs)
    print(f"|A|_1={norm1}: rate {rate:.4f}, E exp(rate d_T^2) = {rep.lhs:.4f} <= {rep.rhs:.4f}")
