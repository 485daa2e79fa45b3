"""Travelling salesman and spanning-tree functionals of random points.

Shows the Lipschitz witnesses built from a space-filling tour and runs a
small campaign.  At this size the concentration bounds are capped at 1.
Run: python demos/04_geometry.py
"""
import numpy as np

from dobrushin_lab.geometry import (
    CostFunction, PointSet, exact_tsp, heuristic_tsp, mst, mst_invariant_check, space_filling_tour,
    tsp_witness_alpha, tsp_witness_budget,
)
from dobrushin_lab.harness import ExperimentConfig, run_experiment

rng = np.random.default_rng(11)

# %% Exact and heuristic tours on 10 points, for a symmetric and an asymmetric cost
ps = PointSet.random(10, rng)
for L in (CostFunction.euclidean(), CostFunction.with_ratio(2.0)):
    e, h = exact_tsp(ps, L), heuristic_tsp(ps, L)
    print(f"{L.name:>12}: exact {e.cost:.4f}  heuristic {h.cost:.4f}")

# %% Witness weights from the space-filling tour; their squares stay within 64 C^2
L = CostFunction.with_ratio(1.5)
alpha = tsp_witness_alpha(space_filling_tour(ps, L), ps, L)
print("sum alpha^2 =", round(float((alpha ** 2).sum()), 3), "<=", tsp_witness_budget(L.C_ratio))

# move three points and compare the change in the optimum with the witness
moved = np.zeros(10, dtype=bool)
moved[:3] = True
y = ps.points.copy()
y[moved] = rng.random((3, 2))
drop = exact_tsp(ps, L).cost - exact_tsp(PointSet(y), L).cost
print(f"T(x) - T(y) = {drop:.4f} <= {alpha[moved].sum():.4f}")

# %% Minimum spanning trees of many points keep bounded degree and sum of squared edges
big = PointSet.random(1000, rng)
inv = mst_invariant_check(mst(big), 1000)
print(f"MST n=1000: sum e^2={inv.sum_sq_edges:.3f}, max degree={inv.max_degree}, ok={inv.passed}")

# %% Sampling 8 of the 20 grid points and measuring the tour length
rep = run_experiment(ExperimentConfig("TSP", {"grid": [4, 5], "n": 8}, [0.05, 0.1, 0.2], 1000, 2))
print(rep.render())
