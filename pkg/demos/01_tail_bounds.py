"""Closed-form tail bounds for self-bounding functions of dependent coordinates.

Walks through how the upper and lower tails react as the interdependence
norm |A|_1 grows towards 1, and where the lower-tail regime switches.
Run: python demos/01_tail_bounds.py
"""
import numpy as np

from dobrushin_lab import bounds
from dobrushin_lab.bounds import BoundSpec

# %% A (1, 0)-self-bounding function with mean 100
t = np.array([5.0, 10, 20, 40])
for norm1 in (0.0, 0.25, 0.5, 0.9):
    s = BoundSpec(a=1.0, b=0.0, mean_g=100.0, norm1=norm1)
    up = bounds.tail_upper_star(t, s)
    weak = bounds.tail_upper_weak(t, s)
    print(f"|A|_1={norm1:4.2f}  star upper {np.round(up, 4)}  weak upper {np.round(weak, 4)}")

# %% The weak-class tail is always the looser one; the ratio of log-tails is 2
s = BoundSpec(1.0, 0.0, 100.0, 0.5)
print("log ratio weak/star:", np.log(bounds.tail_upper_weak(t, s)) / np.log(bounds.tail_upper_star(t, s)))

# %% Lower tail: the regime depends on a relative to the root a_c
a_c = bounds.solve_ac()
print(f"a_c = {a_c:.10f}, K_c = {bounds.k_c():.6f}")
for a in (0.1, a_c, 0.5, 1.0):
    s = BoundSpec(a=a, b=0.0, mean_g=100.0, norm1=0.3)
    print(f"a={a:.4f} regime={bounds.lower_tail_regime(s):>6}  lower tail {np.round(bounds.tail_lower(t, s), 4)}")

# %% Each tail is a Bernstein curve exp(-t^2 / (2 (D + C t))) evaluated at theta = t / (D + C t)
s = BoundSpec(1.0, 2.0, 50.0, 0.4)
D, C = bounds.star_bernstein_parameters(s)
print("D, C =", D, C, " max |difference| =",
      np.abs(bounds.bernstein_tail(D, C, t) - bounds.tail_upper_star(t, s)).max())

# %% Composed constants used by the applications
for chk in bounds.constant_composition_checks():
    print(f"{chk.name:>14}: {chk.lhs} {chk.relation} {chk.rhs}  {'ok' if chk.passed else 'FAILED'}")
