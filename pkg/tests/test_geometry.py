import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from dobrushin_lab.errors import CapacityError, DomainError
from dobrushin_lab.geometry import (
    _all_trees,
    CostFunction, PointSet, brute_force_mst_length, brute_force_tsp, euclidean_matrix, exact_tsp,
    heuristic_tsp, held_karp, hilbert_index, make_tour, mst, mst_invariant_check,
    mst_witness_alpha, space_filling_tour, steiner_upper, tour_cost, tsp_witness_alpha,
    tsp_witness_budget,
)

COSTS = [CostFunction.euclidean(), CostFunction.with_ratio(1.5), CostFunction.with_ratio(2.0)]


def test_euclidean_matrix_matches_cdist(rng):
    p = rng.random((12, 2))
    assert np.allclose(euclidean_matrix(p), cdist(p, p))


@pytest.mark.parametrize("L", COSTS, ids=lambda c: c.name)
def test_exact_tsp_matches_brute_force(L):
    rng = np.random.default_rng(21)
    for _ in range(15):
        n = int(rng.integers(2, 9))
        ps = PointSet.random(n, rng)
        t = exact_tsp(ps, L)
        cost = L.matrix(ps.points)
        assert t.cost == pytest.approx(brute_force_tsp(cost), abs=1e-12)
        assert sorted(t.order.tolist()) == list(range(n))
        assert t.cost == pytest.approx(tour_cost(cost, t.order))


def test_held_karp_asymmetric_matrix(rng):
    cost = rng.random((7, 7))
    np.fill_diagonal(cost, 0)
    best, order = held_karp(cost)
    assert best == pytest.approx(brute_force_tsp(cost))
    assert best == pytest.approx(tour_cost(cost, order))
    with pytest.raises(CapacityError):
        held_karp(np.zeros((15, 15)))


def test_elevation_cost_ratio_and_triangle_inequality(rng):
    for C in (1.0, 1.5, 2.0):
        L = CostFunction.with_ratio(C)
        assert L.C_ratio == C
        assert L.ratio_spot_check(rng, 2000) <= 1e-12
        m = L.matrix(rng.random((15, 2)))
        # L(i, k) <= L(i, j) + L(j, k)
        assert np.all(m[:, None, :] <= m[:, :, None] + m[None, :, :] + 1e-12)
    assert not CostFunction.with_ratio(2.0).symmetric
    with pytest.raises(DomainError):
        CostFunction.elevation(-0.1)


def test_hilbert_index_is_a_bijection():
    side = 8
    ix, iy = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    h = hilbert_index(ix.ravel(), iy.ravel(), side)
    assert sorted(h.tolist()) == list(range(side * side))
    # consecutive cells along the curve are grid neighbours
    order = np.argsort(h)
    steps = np.abs(np.diff(ix.ravel()[order])) + np.abs(np.diff(iy.ravel()[order]))
    assert np.all(steps == 1)


@settings(max_examples=40)
@given(st.integers(2, 400), st.integers(0, 2 ** 32 - 1))
def test_space_filling_tour_edge_squares(n, seed):
    ps = PointSet.random(n, np.random.default_rng(seed))
    t = space_filling_tour(ps)
    assert sorted(t.order.tolist()) == list(range(n))
    assert t.sum_sq_euclidean <= 4.0 + 1e-12


def test_space_filling_tour_on_corners():
    ps = PointSet(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
    t = space_filling_tour(ps)
    assert t.sum_sq_euclidean == pytest.approx(4.0)
    alpha = tsp_witness_alpha(t, ps)
    assert np.allclose(alpha, 4.0)
    assert (alpha ** 2).sum() == pytest.approx(tsp_witness_budget(1.0))


def test_two_point_witness():
    ps = PointSet(np.array([[0.1, 0.2], [0.4, 0.6]]))
    t = space_filling_tour(ps)
    alpha = tsp_witness_alpha(t, ps)
    assert np.allclose(alpha, 4 * 0.5)
    assert (alpha ** 2).sum() == pytest.approx(32 * 0.25)


@pytest.mark.parametrize("L", COSTS, ids=lambda c: c.name)
def test_tsp_witness_budget_and_lipschitz(L):
    rng = np.random.default_rng(8)
    for _ in range(40):
        n = int(rng.integers(3, 8))
        x = PointSet.random(n, rng)
        sf = space_filling_tour(x, L)
        alpha = tsp_witness_alpha(sf, x, L)
        assert (alpha ** 2).sum() <= tsp_witness_budget(L.C_ratio) + 1e-9
        assert exact_tsp(x, L).cost <= sf.cost + 1e-12
        moved = rng.random(n) < 0.4
        yp = x.points.copy()
        yp[moved] = rng.random((int(moved.sum()), 2))
        y = PointSet(yp)
        assert exact_tsp(x, L).cost - exact_tsp(y, L).cost <= alpha[moved].sum() + 1e-9


@pytest.mark.parametrize("L", COSTS, ids=lambda c: c.name)
def test_heuristic_tsp_close_to_exact(L):
    rng = np.random.default_rng(4)
    gaps = []
    for _ in range(10):
        ps = PointSet.random(10, rng)
        h = heuristic_tsp(ps, L)
        e = exact_tsp(ps, L)
        assert h.cost >= e.cost - 1e-12
        gaps.append(h.cost / e.cost - 1)
    assert np.mean(gaps) < 0.05


def test_mst_matches_brute_force_and_scipy():
    rng = np.random.default_rng(13)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        ps = PointSet.random(n, rng)
        t = mst(ps)
        assert t.total_length == pytest.approx(brute_force_mst_length(ps), abs=1e-12)
        ref = minimum_spanning_tree(euclidean_matrix(ps.points)).sum()
        assert t.total_length == pytest.approx(ref, abs=1e-12)
        assert t.edges.shape == (n - 1, 2)
    big = PointSet.random(300, rng)
    assert mst(big).total_length == pytest.approx(
        minimum_spanning_tree(euclidean_matrix(big.points)).sum(), rel=1e-12)


@pytest.mark.parametrize("n", [2, 10, 100, 1000])
def test_mst_invariants(n, rng):
    ps = PointSet.random(n, rng)
    t = mst(ps)
    inv = mst_invariant_check(t, n)
    assert inv.passed
    assert inv.max_degree == t.degrees(n).max() <= 6
    assert mst_witness_alpha(t, n).sum() == pytest.approx(4 * t.total_length)


def test_mst_collinear_and_triangle():
    ps = PointSet(np.array([[0, 0], [0.5, 0], [1, 0]], dtype=float))
    inv = mst_invariant_check(mst(ps), 3)
    assert inv.sum_sq_edges == pytest.approx(0.5) and inv.max_degree <= 2
    tri = PointSet(np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]))
    assert steiner_upper(tri) == pytest.approx(2.0)
    assert steiner_upper(tri) > math.sqrt(3)


def test_point_set_io_and_validation(rng):
    ps = PointSet.random(5, rng)
    again = PointSet.from_csv(ps.to_csv())
    assert np.array_equal(ps.points, again.points)
    assert np.array_equal(PointSet.from_csv("0.1,0.2\n0.3,0.4\n").points,
                          np.array([[0.1, 0.2], [0.3, 0.4]]))
    g = PointSet.grid(5, 8)
    assert g.n == 40 and not g.has_duplicates()
    with pytest.raises(DomainError):
        PointSet(np.array([[1.5, 0.0]]))
    with pytest.raises(DomainError):
        PointSet(np.zeros((3, 3)))
    with pytest.raises(DomainError):
        mst(PointSet(np.array([[0.1, 0.1], [0.1, 0.1]])))
    with pytest.raises(DomainError):
        make_tour(ps, euclidean_matrix(ps.points), [0, 0, 1, 2, 3])
    with pytest.raises(DomainError):
        space_filling_tour(PointSet(np.array([[0.5, 0.5]])))
    with pytest.raises(CapacityError):
        brute_force_mst_length(PointSet.random(9, rng))


def test_all_labelled_trees_counted():
    for n in range(2, 7):
        trees = _all_trees(n)
        assert len(trees) == n ** (n - 2)
        assert len({tuple(sorted(map(tuple, np.sort(t, axis=1).tolist()))) for t in trees}) == len(trees)
