"""Curie-Weiss: interdependence matrix, exact magnetization law, and the tail bounds.

Run: python demos/02_curie_weiss.py
"""
import numpy as np

from dobrushin_lab import bounds
from dobrushin_lab.dobrushin import curie_weiss_matrix, exact_matrix
from dobrushin_lab.models.curie_weiss import cw_exact_magnetization_law, cw_glauber_chains, curie_weiss_model

# %% The exact matrix sits below the closed-form beta/n entries
n, beta = 5, 0.6
A = exact_matrix(curie_weiss_model(n, beta, 0.0))
print(np.round(A.entries, 4))
print("exact |A|_1 =", round(A.norm_1, 5), " closed form beta(1-1/n) =", beta * (1 - 1 / n),
      " beta/n matrix |A|_1 =", curie_weiss_matrix(n, beta).norm_1)

# %% For n = 100 the magnetization law is computed exactly from binomial weights
n, beta, h = 100, 0.5, 0.5
law = cw_exact_magnetization_law(n, beta, h)
t = np.linspace(0.02, 0.3, 8)
print("E m =", round(law.mean_m, 4))
print(" t      P(m - Em >= t)  bound    P(m - Em <= -t)  bound")
up = bounds.application_values("CW_UP", t, beta=beta, h=h, n=n)
lo = bounds.application_values("CW_LOW", t, beta=beta, h=h, n=n)
for row in zip(t, law.upper_tail(t), up, law.lower_tail(t), lo):
    print("{:.3f}  {:.3e}       {:.4f}   {:.3e}        {:.4f}".format(*row))

# %% Glauber dynamics reproduces the exact mean
rng = np.random.default_rng(3)
sums = cw_glauber_chains(n, beta, h, chains=400, samples=5, rng=rng)
print("Glauber mean m:", round(float(sums.mean()) / n, 4), " exact:", round(law.mean_m, 4))
