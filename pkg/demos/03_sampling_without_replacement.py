"""Sampling without replacement as a weakly dependent vector.

The inhomogeneity rho controls the Dobrushin norm of the coordinate model.
Run: python demos/03_sampling_without_replacement.py
"""
import numpy as np

from dobrushin_lab.dobrushin import (
    SubsetLaw, inhomogeneity_exact, swr_lemma_check, weighted_swr_rho_bound,
)
from dobrushin_lab.harness import ExperimentConfig, run_experiment

# %% Uniform designs: rho = n / (N - n + 1), exactly
for N, n in [(10, 2), (10, 5), (12, 6)]:
    inh = inhomogeneity_exact(SubsetLaw.uniform(N, n))
    print(f"N={N:2d} n={n}  rho={inh.rho}  r2={inh.r2}")

# %% Weighted draws inflate rho, and the closed-form bound tracks it
p = np.linspace(1, 2, 8)
p /= p.sum()
law = SubsetLaw.weighted_swr(p, 3)
inh = inhomogeneity_exact(law)
print("weighted rho =", float(inh.rho), " bound =", weighted_swr_rho_bound(p.max(), p.min(), 3, 8))
print("rho < 1 (concentration bounds apply):", inh.rho < 1)
chk = swr_lemma_check(law)
print("coordinate-model matrix within the lemma bound:", chk.holds)

# %% Monte Carlo: the number of marked items in the sample
cfg = ExperimentConfig("SWR", {"N": 40, "n": 10}, [1, 2, 3, 4], 4000, 5)
print(run_experiment(cfg).render())
