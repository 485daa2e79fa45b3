from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dobrushin_lab.errors import DimensionError, DomainError, InfeasibleCouplingError
from dobrushin_lab.finite_dist import (FiniteDistribution, build_coupling, coupling_components,
                                       sample_coupling, tv_distance)


def rational_dist(draw, k):
    w = draw(st.lists(st.integers(0, 12), min_size=k, max_size=k).filter(lambda v: sum(v) > 0))
    s = sum(w)
    return FiniteDistribution(np.array([F(x, s) for x in w], dtype=object))


@st.composite
def rational_pair(draw):
    k = draw(st.integers(1, 6))
    return rational_dist(draw, k), rational_dist(draw, k)


@st.composite
def float_triple(draw):
    k = draw(st.integers(2, 6))
    out = []
    for _ in range(3):
        w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k)))
        out.append(FiniteDistribution(w / w.sum()))
    return out


def test_validation():
    with pytest.raises(DomainError):
        FiniteDistribution(np.array([0.5, 0.6]))
    with pytest.raises(DomainError):
        FiniteDistribution(np.array([1.5, -0.5]))
    with pytest.raises(DimensionError):
        tv_distance(FiniteDistribution.bernoulli(0.5), FiniteDistribution(np.ones(3) / 3))


def test_tv_examples():
    assert tv_distance(FiniteDistribution.bernoulli(0.5), FiniteDistribution.bernoulli(0.9)) == pytest.approx(0.4)
    p = FiniteDistribution(np.array([0.2, 0.3, 0.5]))
    assert tv_distance(p, p) == 0
    assert tv_distance(FiniteDistribution.point_mass(0, 3), FiniteDistribution.point_mass(2, 3)) == 1.0


def test_tv_matches_supremum_over_events():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.random(5), rng.random(5)
        p, q = FiniteDistribution(a / a.sum()), FiniteDistribution(b / b.sum())
        sup = max(abs(p.probs[list(s)].sum() - q.probs[list(s)].sum())
                  for r in range(6) for s in __import__("itertools").combinations(range(5), r))
        assert tv_distance(p, q) == pytest.approx(sup, abs=1e-14)


def test_bernoulli_coupling_at_tv():
    p, q = FiniteDistribution.bernoulli(F(1, 2)), FiniteDistribution.bernoulli(F(9, 10))
    c = build_coupling(p, q, F(2, 5))
    assert c.off_diagonal_mass == F(2, 5)
    assert list(c.row_marginal) == list(p.probs)
    assert list(c.col_marginal) == list(q.probs)


def test_identical_marginals_q_zero_is_diagonal():
    p = FiniteDistribution(np.array([F(1, 3), F(1, 6), F(1, 2)], dtype=object))
    c = build_coupling(p, p, 0)
    assert c.off_diagonal_mass == 0
    assert [c.joint[i, i] for i in range(3)] == list(p.probs)


def test_q_one_is_product():
    p = FiniteDistribution(np.array([0.2, 0.8]))
    q = FiniteDistribution(np.array([0.6, 0.4]))
    c = build_coupling(p, q, 1.0)
    np.testing.assert_allclose(c.joint, np.outer(p.probs, q.probs), atol=1e-15)


def test_errors():
    p, q = FiniteDistribution.bernoulli(0.5), FiniteDistribution.bernoulli(0.9)
    with pytest.raises(InfeasibleCouplingError):
        build_coupling(p, q, 0.3)
    with pytest.raises(DomainError):
        build_coupling(p, q, 1.2)


def test_disjoint_supports_force_q_one():
    p, q = FiniteDistribution.point_mass(0, 2), FiniteDistribution.point_mass(1, 2)
    mu_b, mu_c, mu_d = coupling_components(p, q, 1.0)
    assert mu_b is None
    assert build_coupling(p, q, 1.0).off_diagonal_mass == pytest.approx(1.0)


@given(rational_pair(), st.fractions(0, 1))
def test_coupling_marginals_exact(pair, frac):
    p, q = pair
    tv = tv_distance(p, q)
    budget = tv + (1 - tv) * frac
    c = build_coupling(p, q, budget)
    assert list(c.row_marginal) == list(p.probs)
    assert list(c.col_marginal) == list(q.probs)
    assert all(x >= 0 for x in c.joint.ravel())
    assert c.off_diagonal_mass <= budget


@given(rational_pair())
def test_maximal_coupling_at_tv(pair):
    p, q = pair
    tv = tv_distance(p, q)
    assert build_coupling(p, q, tv).off_diagonal_mass == tv


@given(float_triple())
def test_tv_is_a_metric(tr):
    p, q, r = tr
    assert tv_distance(p, q) == pytest.approx(tv_distance(q, p))
    assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12


def test_sampled_coupling_frequencies(rng):
    p = FiniteDistribution(np.array([0.5, 0.3, 0.2]))
    q = FiniteDistribution(np.array([0.2, 0.3, 0.5]))
    joint = build_coupling(p, q, 0.5).joint
    counts = np.zeros((3, 3))
    for _ in range(20000):
        x, y = sample_coupling(p, q, 0.5, rng)
        counts[x, y] += 1
    np.testing.assert_allclose(counts / 20000, joint, atol=0.015)
