"""Coupled Glauber chains contract at the rate set by |A|_1.

Run: python demos/06_coupling.py
"""
import numpy as np

from dobrushin_lab.models.coupling import curie_weiss_coupled_runs, disagreement_bound

n, beta, runs = 10, 0.5, 5000
rng = np.random.default_rng(21)
d = curie_weiss_coupled_runs(n, beta, 0.0, runs, 100, rng)
norm1 = beta * (1 - 1 / n)
print(" k   mean Hamming distance   bound")
for k in (0, 10, 25, 50, 100):
    print(f"{k:3d}   {d[:, k].mean():8.4f} +- {d[:, k].std() / np.sqrt(runs):.4f}   "
          f"{float(disagreement_bound(n, norm1, n, k)):.4f}")
