import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from dobrushin_lab.bounds import convex_distance_rate
from dobrushin_lab.convexdist import (
    ConvexDistanceInstance, away_step_frank_wolfe, convex_distance, convex_distance_experiment,
    convex_distance_oracle, dt_squared_lipschitz_check, ordered_sample_space,
    weighted_hamming_to_set, wolfe_min_norm,
)
from dobrushin_lab.errors import CapacityError, DegenerateLawError, DimensionError, DomainError
from dobrushin_lab.selfbounding import ProductSpace


def random_instance(rng, n, m, k=2):
    return ConvexDistanceInstance(rng.integers(0, k, size=n), rng.integers(0, k, size=(m, n)))


def slsqp_value(P):
    """Min-norm point of the hull of the rows of P by a generic constrained solver."""
    m = P.shape[0]
    res = minimize(lambda w: float((w @ P) @ (w @ P)), np.full(m, 1.0 / m),
                   jac=lambda w: 2 * P @ (w @ P), method="SLSQP", bounds=[(0, 1)] * m,
                   constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1}],
                   options={"ftol": 1e-14, "maxiter": 500})
    return math.sqrt(max(res.fun, 0.0))


def test_worked_values():
    # x differs from both points of S, in disjoint coordinates
    inst = ConvexDistanceInstance(np.array([0, 0]), np.array([[1, 0], [0, 1]]))
    r = convex_distance(inst)
    assert r.value == pytest.approx(1 / math.sqrt(2))
    assert np.allclose(r.optimal_weights, [0.5, 0.5])
    assert np.allclose(r.optimal_direction, [1 / math.sqrt(2)] * 2)
    assert convex_distance(ConvexDistanceInstance(np.zeros(3), np.zeros((1, 3)))).value == 0
    far = ConvexDistanceInstance(np.zeros(4), np.ones((1, 4)))
    assert convex_distance(far).value == pytest.approx(2.0)


def test_solver_matches_oracle_and_generic_solver():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        inst = random_instance(rng, n, m, k=int(rng.integers(2, 4)))
        r = convex_distance(inst)
        assert r.value == pytest.approx(convex_distance_oracle(inst), abs=1e-8)
        assert r.optimal_weights.sum() == pytest.approx(1.0)
        assert np.all(r.optimal_weights >= 0)
        V = inst.indicator_vectors()
        if r.value > 0:
            assert r.value == pytest.approx(slsqp_value(V), abs=1e-5)


def test_frank_wolfe_agrees_with_wolfe(rng):
    for _ in range(30):
        P = rng.integers(0, 2, size=(8, 6)).astype(float)
        P = P[P.any(axis=1)]
        if P.shape[0] == 0:
            continue
        w1, gap1, ok = wolfe_min_norm(P)
        w2, gap2 = away_step_frank_wolfe(P, tol=1e-12)
        assert ok
        assert np.linalg.norm(w1 @ P) == pytest.approx(np.linalg.norm(w2 @ P), abs=1e-5)


def test_frank_wolfe_fallback_path():
    # Wolfe with a one-iteration budget cannot converge, forcing the fallback
    P = np.eye(5)
    w, gap, ok = wolfe_min_norm(P, max_iter=1)
    assert not ok
    w2, gap2 = away_step_frank_wolfe(P, w0=w)
    assert np.linalg.norm(w2 @ P) == pytest.approx(1 / math.sqrt(5), abs=1e-4)


@settings(max_examples=50)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_dt_dominates_every_weighted_hamming_distance(n, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, int(rng.integers(1, 6)))
    r = convex_distance(inst)
    for _ in range(20):
        c = rng.random(n)
        c /= np.linalg.norm(c)
        assert weighted_hamming_to_set(c, inst) <= r.value + 1e-9
    # the optimal direction attains the supremum
    assert weighted_hamming_to_set(r.optimal_direction, inst) == pytest.approx(r.value, abs=1e-8)


@settings(max_examples=50)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_dt_decreases_when_set_grows(n, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, 3)
    bigger = ConvexDistanceInstance(inst.x, np.vstack([inst.S, rng.integers(0, 2, size=(2, n))]))
    assert convex_distance(bigger).value <= convex_distance(inst).value + 1e-9
    assert convex_distance(inst).value <= math.sqrt(n) + 1e-12


@pytest.mark.parametrize("size", [1, 2, 3])
def test_dt_squared_steps_on_cube(size):
    space = ProductSpace.cube(4)
    pts = space.points()
    for S in itertools.combinations(range(len(pts)), size):
        rep = dt_squared_lipschitz_check(space, pts[list(S)])
        assert rep.passed, (S, rep)


def test_lipschitz_check_capacity():
    with pytest.raises(CapacityError):
        dt_squared_lipschitz_check(ProductSpace.cube(14), np.zeros((1, 14)))


def test_exact_inequality_for_independent_bits():
    n = 8
    pts = ProductSpace.cube(n).points()
    probs = np.full(len(pts), 1 / len(pts))
    S = pts[pts.sum(axis=1) <= 2]
    for rate in (convex_distance_rate(0.0), 0.25):
        rep = convex_distance_experiment(pts, S, rate, probs)
        assert rep.exact and rep.satisfied and rep.lhs <= rep.rhs
        assert rep.mu_S == pytest.approx(len(S) / len(pts))


def test_sampled_inequality_for_swr(rng):
    pts = ordered_sample_space(6, 2)
    assert len(pts) == 30
    draws = pts[rng.integers(len(pts), size=3000)]
    S = pts[pts[:, 0] < 3]
    rep = convex_distance_experiment(draws, S, 1 / 16)
    assert not rep.exact and rep.ci_low <= rep.lhs <= rep.ci_high
    assert rep.satisfied
    assert rep.mu_S == pytest.approx(0.5, abs=0.05)


def test_instance_io_and_validation():
    inst = ConvexDistanceInstance(np.array([0, 1, 2]), np.array([[0, 1, 1], [2, 1, 2]]))
    again = ConvexDistanceInstance.from_json(inst.to_json())
    assert np.array_equal(inst.S, again.S) and np.array_equal(inst.x, again.x)
    assert ConvexDistanceInstance(np.zeros(2), np.zeros(2)).S.shape == (1, 2)
    with pytest.raises(DimensionError):
        ConvexDistanceInstance(np.zeros(2), np.zeros((2, 3)))
    with pytest.raises(DomainError):
        ConvexDistanceInstance(np.zeros(2), np.zeros((0, 2)))
    with pytest.raises(CapacityError):
        convex_distance_oracle(ConvexDistanceInstance(np.zeros(7), np.eye(7)))
    with pytest.raises(DegenerateLawError):
        convex_distance_experiment(np.zeros((3, 2)), np.ones((1, 2)), 0.1)
