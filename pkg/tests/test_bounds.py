import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar
from scipy.stats import binom

from dobrushin_lab import bounds as B
from dobrushin_lab.bounds import BoundSpec
from dobrushin_lab.errors import DomainError, HypothesisViolation

specs = st.builds(BoundSpec, a=st.floats(0.01, 5), b=st.floats(0, 5),
                  mean_g=st.floats(0, 200), norm1=st.floats(0, 0.95))
ts = st.floats(0, 100)


# --- worked values, recomputed by hand ----------------------------------------------

def test_mgf_values():
    s = BoundSpec(1, 0, 100, 0)
    assert B.mgf_star_upper(0.0, s) == 0
    assert B.mgf_star_upper(0.25, s) == pytest.approx(100 * 0.0625 / 1.5)
    assert B.mgf_star_upper(2.0, BoundSpec(0, 1, 7, 0.5)) == pytest.approx(4.0)
    assert B.mgf_weak_upper(0.1, BoundSpec(4, 0, 1, 0)) == pytest.approx(0.2)
    assert B.mgf_weak_upper(0.25, s) == pytest.approx(12.5)
    assert B.mgf_weak_upper(0.25, s) >= B.mgf_star_upper(0.25, s)
    with pytest.raises(DomainError):
        B.mgf_star_upper(1.5, s)
    with pytest.raises(DomainError):
        B.mgf_weak_upper(0.6, s)
    with pytest.raises(DomainError):
        B.mgf_star_upper(-0.1, s)


def test_tail_values():
    s = BoundSpec(1, 0, 100, 0)
    assert B.tail_upper_star(0.0, s) == 1.0
    assert B.tail_upper_star(20.0, s) == pytest.approx(math.exp(-400 / 240))
    assert B.tail_upper_star(20.0, s) == pytest.approx(0.18888, abs=5e-6)
    assert B.tail_upper_weak(2.0, BoundSpec(4, 0, 1, 0)) == pytest.approx(math.exp(-1 / 12))
    assert B.tail_lower(0.0, s) == 1.0
    assert B.lower_tail_regime(s) == "gaussian"
    assert B.tail_lower(20.0, s) == pytest.approx(math.exp(-0.5))
    s2 = BoundSpec(0.1, 0, 100, 0)
    assert B.lower_tail_regime(s2) == "bernstein"
    assert B.tail_lower(20.0, s2) == pytest.approx(math.exp(-400 / (50 + 40 / 3)))
    assert B.bernstein_tail(1, 0, 2.0) == pytest.approx(math.exp(-2))
    assert B.bernstein_tail(2, 1, 2.0) == pytest.approx(math.exp(-0.5))
    assert B.bernstein_tail(2, 1, 0.0) == 1.0


def test_tail_degrades_as_norm_approaches_one():
    vals = [B.tail_upper_star(5.0, BoundSpec(1, 0, 10, e)) for e in (0, 0.9, 0.999, 1 - 1e-12)]
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(1.0, abs=1e-9)


def test_ac_root():
    a = B.solve_ac()
    assert 0.285 < a < 0.286
    assert abs(B.ac_residual(a)) < 1e-10
    K = B.k_c()
    assert abs(math.expm1(K) / K - 1.6) < 1e-10
    assert K == pytest.approx(1 / (4 * a))


def test_convex_distance_helpers():
    assert B.convex_distance_rhs(1.0) == 1.0
    assert B.convex_distance_rhs(0.5, 0.0) == 2.0
    assert B.convex_distance_rate(0.0) == pytest.approx(1 / 26.1)
    for eta in np.linspace(0, 0.99, 12):
        assert B.INDEPENDENT_CONVEX_RATE > B.convex_distance_rate(eta)
    with pytest.raises(DomainError):
        B.convex_distance_rhs(0.0)
    with pytest.raises(DomainError):
        B.convex_distance_rate(1.0)
    assert B.nonuniform_tail(0.0, 64, 0) == 1.0
    assert B.nonuniform_tail(40.0, 64, 0) == pytest.approx(2 * math.exp(-1600 / 1670.4))
    assert B.nonuniform_tail(40.0, 64, 0) == pytest.approx(0.76743, abs=5e-6)


def test_application_values():
    got = B.application_values("TSP", 50.0, rho=4 / 7, C_cost=1.0)[0]
    assert got == pytest.approx(min(1.0, 4 * math.exp(-2500 * (3 / 7) / 1671)))
    got = B.application_values("CW_UP", 0.2, beta=0.5, h=0.0, n=100)[0]
    assert got == pytest.approx(math.exp(-100 * 0.5 * 0.04 / (16 * 1.8)))
    got = B.application_values("SUBGRAPH_LOW", 10.0, n=10, n_S=3, e_S=3, norm1=0.2, mean_N=15)[0]
    assert got == pytest.approx(math.exp(-0.8 * 100 / (8 * 8 * 3 * 15)))
    assert got < 1
    got = B.application_values("SUBGRAPH_UP", 10.0, n=10, n_S=3, e_S=3, norm1=0.2, mean_N=15)[0]
    assert got == pytest.approx(math.exp(-0.8 * 100 / (2 * 8 * 3 * 25)))
    got = B.application_values("CW_LOW", 0.2, beta=0.5, h=1.0, n=100)[0]
    K = 1 - math.tanh(1.0) + 4 / (0.5 * 10)
    assert got == pytest.approx(math.exp(-100 * 0.5 * 0.04 / (4 * K + 0.8)))
    assert B.application_values("SWR_CONVEX", 10.0, C_budget=2.0)[0] == pytest.approx(
        min(1, 4 * math.exp(-100 / 32)))
    assert B.application_values("SWR_TSP", 100.0, C_cost=1.0)[0] == pytest.approx(
        4 * math.exp(-10000 / 1024))
    assert B.application_values("STEINER", 2000.0, rho=0.5)[0] == pytest.approx(
        4 * math.exp(-4e6 * 0.5 / 520000))


@pytest.mark.parametrize("which,params", [
    ("TSP", dict(rho=1.2, C_cost=1.0)),
    ("TSP", dict(rho=0.2, C_cost=0.5)),
    ("STEINER", dict(rho=1.0)),
    ("CW_UP", dict(beta=1.0, h=0.0, n=10)),
    ("CW_LOW", dict(beta=0.5, h=-1.0, n=10)),
    ("SUBGRAPH_UP", dict(n=10, n_S=3, e_S=3, norm1=1.0, mean_N=1.0)),
    ("SWR_CONVEX", dict(C_budget=0.0)),
    ("TSP", dict(rho=0.2)),
])
def test_application_domain_errors(which, params):
    with pytest.raises(DomainError):
        B.application_values(which, [1.0], **params)


def test_application_tails_are_curves():
    c = B.application_tails("CW_UP", np.linspace(0, 1, 11), beta=0.3, h=0.5, n=50)
    assert c.values[0] == 1.0 and np.all(np.diff(c.values) <= 0)
    again = B.TailCurve.from_csv(c.to_csv())
    assert np.array_equal(again.values, c.values)
    with pytest.raises(DomainError):
        B.TailCurve(np.array([1.0, 0.0]), np.array([0.5, 0.6]))
    with pytest.raises(DomainError):
        B.TailCurve(np.array([0.0]), np.array([1.5]))


def test_constant_composition_is_exact():
    checks = {c.name: c for c in B.constant_composition_checks()}
    assert all(c.passed for c in checks.values())
    assert checks["tsp"].lhs == Fraction(8352, 5)
    assert checks["steiner"].lhs == 513648
    assert checks["swr_tsp"].lhs == 1024


def test_bound_spec_validation():
    with pytest.raises(DomainError):
        BoundSpec(-1, 0, 1, 0)
    with pytest.raises(DomainError):
        BoundSpec(1, 0, 1, 1.0)
    with pytest.raises(DomainError):
        BoundSpec(1, 0, 1, 0.5, norm_inf=1.5)
    with pytest.raises(DomainError):
        B.tail_upper_star(-1.0, BoundSpec(1, 0, 1, 0))


def test_warn_if_outside():
    with pytest.warns(HypothesisViolation):
        B.warn_if_outside(False, "beta too large")


# --- properties ----------------------------------------------------------------------

@given(specs, ts, ts)
def test_upper_tails_nonincreasing_and_weak_dominates(s, t1, t2):
    lo, hi = sorted((t1, t2))
    for fn in (B.tail_upper_star, B.tail_upper_weak, B.tail_lower):
        assert 0 <= fn(hi, s) <= fn(lo, s) + 1e-15 <= 1 + 1e-15
    assert B.tail_upper_weak(lo, s) >= B.tail_upper_star(lo, s)


@given(specs, st.floats(0, 0.999))
def test_weak_mgf_dominates_star(s, frac):
    theta = frac * B.weak_theta_max(s)
    assert B.mgf_weak_upper(theta, s) >= B.mgf_star_upper(theta, s) - 1e-12


@given(specs, st.floats(0.01, 100))
def test_tails_follow_from_mgf_by_chernoff(s, t):
    if s.variance_proxy <= 1e-9:
        return
    for mgf, params, tail in ((B.mgf_star_upper, B.star_bernstein_parameters, B.tail_upper_star),
                              (B.mgf_weak_upper, B.weak_bernstein_parameters, B.tail_upper_weak)):
        D, C = params(s)
        theta = B.chernoff_theta(D, C, t)
        log_tail = mgf(theta, s) - theta * t
        assert math.exp(log_tail) == pytest.approx(tail(t, s), rel=1e-9, abs=1e-300)
        assert tail(t, s) == pytest.approx(B.bernstein_tail(D, C, t), rel=1e-12)


@pytest.mark.parametrize("a,b,mean,eta,t", [(1, 0, 10, 0, 3), (0.5, 1, 4, 0.3, 2), (2, 0, 5, 0.5, 4)])
def test_closed_form_tail_never_beats_optimal_chernoff(a, b, mean, eta, t):
    s = BoundSpec(a, b, mean, eta)
    hi = B.star_theta_max(s)
    res = minimize_scalar(lambda th: B.mgf_star_upper(th, s) - th * t, bounds=(0, hi * (1 - 1e-9)),
                          method="bounded", options={"xatol": 1e-12})
    assert math.exp(res.fun) <= B.tail_upper_star(t, s) + 1e-9


@pytest.mark.parametrize("n,p", [(20, 0.3), (50, 0.5), (100, 0.1)])
def test_binomial_count_obeys_star_bounds(n, p):
    # n_- of independent spins is (1, 0)-*-self-bounding with |A|_1 = 0
    s = BoundSpec(1, 0, n * p, 0)
    t = np.arange(1, n // 2)
    upper = binom.sf(np.ceil(n * p + t) - 1, n, p)
    lower = binom.cdf(np.floor(n * p - t), n, p)
    assert np.all(upper <= B.tail_upper_star(t, s) + 1e-12)
    assert np.all(lower <= B.tail_lower(t, s) + 1e-12)
