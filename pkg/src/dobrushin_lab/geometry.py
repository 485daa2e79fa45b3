"""Tours and spanning trees of point sets in the unit square.

Tour costs use a cost function ``L`` with ``|x - y| <= L(x, y) <= C |x - y|``
that need not be symmetric.  The exact solver is Held-Karp; larger instances
use a space-filling-curve start improved by local search.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import CapacityError, DomainError

EXACT_TSP_MAX = 14
HILBERT_EXTRA_DEPTH = 4
_IMPROVE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise DomainError("points must have shape (n, 2)")
        if np.any(p < 0) or np.any(p > 1):
            raise DomainError("points must lie in the unit square")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def subset(self, idx) -> "PointSet":
        return PointSet(self.points[np.asarray(idx)])

    def has_duplicates(self) -> bool:
        return np.unique(self.points, axis=0).shape[0] != self.n

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "PointSet":
        return cls(rng.random((n, 2)))

    @classmethod
    def grid(cls, rows: int, cols: int) -> "PointSet":
        """Cell centres of a ``rows x cols`` grid, row-major."""
        ys, xs = np.meshgrid((np.arange(rows) + 0.5) / rows, (np.arange(cols) + 0.5) / cols,
                             indexing="ij")
        return cls(np.column_stack([xs.ravel(), ys.ravel()]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in self.points:
            w.writerow([repr(float(x)), repr(float(y))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PointSet":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        return cls(np.array([[float(r[0]), float(r[1])] for r in rows]))


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def euclidean_matrix(p: np.ndarray) -> np.ndarray:
    diff = p[:, None, :] - p[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


@dataclass(frozen=True)
class CostFunction:
    """``matrix(points)`` returns the ``n x n`` cost matrix ``L[i, j] = L(p_i, p_j)``."""

    matrix: Callable
    C_ratio: float = 1.0
    symmetric: bool = True
    name: str = "custom"

    def __post_init__(self):
        if self.C_ratio < 1:
            raise DomainError("C_ratio must be at least 1")

    def evaluate(self, x, y) -> float:
        return float(self.matrix(np.array([x, y], dtype=float))[0, 1])

    @classmethod
    def euclidean(cls) -> "CostFunction":
        return cls(euclidean_matrix, 1.0, True, "euclidean")

    @classmethod
    def elevation(cls, kappa: float) -> "CostFunction":
        """Euclidean length plus ``kappa`` times the climb in a 1-Lipschitz height.

        The height ``z(p) = (sin 3 p_x + cos 2 p_y) / sqrt(13)`` has gradient
        norm at most 1, so ``|x - y| <= L(x, y) <= (1 + kappa) |x - y|`` and
        ``L`` satisfies the triangle inequality while being asymmetric.
        """
        if kappa < 0:
            raise DomainError("kappa must be nonnegative")

        def matrix(p):
            z = (np.sin(3 * p[:, 0]) + np.cos(2 * p[:, 1])) / math.sqrt(13.0)
            climb = np.maximum(0.0, z[None, :] - z[:, None])
            return euclidean_matrix(p) + kappa * climb

        return cls(matrix, 1.0 + kappa, kappa == 0, f"elevation({kappa})")

    @classmethod
    def with_ratio(cls, C: float) -> "CostFunction":
        return cls.euclidean() if C == 1 else cls.elevation(C - 1.0)

    def ratio_spot_check(self, rng: np.random.Generator, pairs: int = 10_000) -> float:
        """Worst violation of ``|x-y| <= L <= C |x-y|`` over random pairs (<= 0 is fine)."""
        worst = -math.inf
        for _ in range(pairs // 500 + (pairs % 500 > 0)):
            p = rng.random((1000, 2))
            x, y = p[:500], p[500:]
            both = np.stack([x, y], axis=1)
            L = np.array([self.matrix(b)[0, 1] for b in both])
            d = np.sqrt(((x - y) ** 2).sum(axis=1))
            worst = max(worst, float(np.max(np.maximum(d - L, L - self.C_ratio * d))))
        return worst


class Tour(NamedTuple):
    order: np.ndarray
    cost: float
    sum_sq_euclidean: float


def tour_cost(cost: np.ndarray, order) -> float:
    o = np.asarray(order)
    return float(cost[o, np.roll(o, -1)].sum())


def make_tour(ps: PointSet, cost: np.ndarray, order) -> Tour:
    o = np.asarray(order, dtype=np.int64)
    if sorted(o.tolist()) != list(range(ps.n)):
        raise DomainError("order must be a permutation of the point indices")
    e = ps.points[o] - ps.points[np.roll(o, -1)]
    return Tour(o, tour_cost(cost, o), float((e ** 2).sum()))


# --- space-filling order ------------------------------------------------------

def hilbert_index(ix: np.ndarray, iy: np.ndarray, side: int) -> np.ndarray:
    """Position along the Hilbert curve of integer cells ``(ix, iy)`` on a ``side x side`` grid."""
    x = ix.astype(np.int64).copy()
    y = iy.astype(np.int64).copy()
    d = np.zeros_like(x)
    s = side // 2
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        flip = ry == 0
        swap_x = np.where(flip & (rx == 1), side - 1 - x, x)
        swap_y = np.where(flip & (rx == 1), side - 1 - y, y)
        x, y = np.where(flip, swap_y, swap_x), np.where(flip, swap_x, swap_y)
        s //= 2
    return d


_DIHEDRAL = [
    lambda p: p,
    lambda p: np.column_stack([1 - p[:, 0], p[:, 1]]),
    lambda p: np.column_stack([p[:, 0], 1 - p[:, 1]]),
    lambda p: 1 - p,
    lambda p: p[:, ::-1],
    lambda p: np.column_stack([1 - p[:, 1], p[:, 0]]),
    lambda p: np.column_stack([p[:, 1], 1 - p[:, 0]]),
    lambda p: 1 - p[:, ::-1],
]


def hilbert_order(points: np.ndarray, depth: int) -> np.ndarray:
    side = 1 << depth
    cells = np.minimum((points * side).astype(np.int64), side - 1)
    h = hilbert_index(cells[:, 0], cells[:, 1], side)
    return np.lexsort((np.arange(len(points)), points[:, 1], points[:, 0], h))


def space_filling_tour(ps: PointSet, L: CostFunction | None = None) -> Tour:
    """Hilbert-curve tour at depth ``ceil(log4 n) + 4``.

    The curve is tried in all eight orientations of the square and the order
    with the smallest sum of squared edge lengths is kept (first one on ties).
    """
    if ps.n < 2:
        raise DomainError("a tour needs at least 2 points")
    depth = math.ceil(math.log(ps.n, 4)) + HILBERT_EXTRA_DEPTH
    best = None
    for f in _DIHEDRAL:
        order = hilbert_order(f(ps.points), depth)
        e = ps.points[order] - ps.points[np.roll(order, -1)]
        sq = float((e ** 2).sum())
        if best is None or sq < best[0] - _IMPROVE_TOL:
            best = (sq, order)
    cost = (L or CostFunction.euclidean()).matrix(ps.points)
    return make_tour(ps, cost, best[1])


# --- exact TSP --------------------------------------------------------------------

def held_karp(cost: np.ndarray) -> tuple:
    """Optimal directed tour for a cost matrix with ``n <= 14``; returns ``(cost, order)``."""
    n = cost.shape[0]
    if n > EXACT_TSP_MAX:
        raise CapacityError(f"exact TSP is limited to n <= {EXACT_TSP_MAX}")
    if n <= 3:
        if n <= 2:
            order = list(range(n))
            return tour_cost(cost, order) if n else 0.0, order
        a, b = tour_cost(cost, [0, 1, 2]), tour_cost(cost, [0, 2, 1])
        return (a, [0, 1, 2]) if a <= b else (b, [0, 2, 1])
    m = n - 1
    c = cost[1:, 1:]
    full = 1 << m
    dp = np.full((full, m), np.inf)
    parent = np.full((full, m), -1, dtype=np.int64)
    for k in range(m):
        dp[1 << k, k] = cost[0, k + 1]
    bits = np.array([1 << k for k in range(m)], dtype=np.int64)
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        ks = np.nonzero(mask & bits)[0]
        subs = mask ^ bits[ks]
        cand = dp[subs] + c[:, ks].T          # (len(ks), m): from j to k
        j = np.argmin(cand, axis=1)
        dp[mask, ks] = cand[np.arange(ks.size), j]
        parent[mask, ks] = j
    total = dp[full - 1] + cost[1:, 0]
    k = int(np.argmin(total))
    best = float(total[k])
    order = []
    mask = full - 1
    while k >= 0 and mask:
        order.append(k + 1)
        pk = int(parent[mask, k])
        mask ^= 1 << k
        k = pk
    return best, [0] + order[::-1]


def exact_tsp(ps: PointSet, L: CostFunction | None = None) -> Tour:
    cost = (L or CostFunction.euclidean()).matrix(ps.points)
    if ps.n > EXACT_TSP_MAX:
        raise CapacityError(f"exact TSP is limited to n <= {EXACT_TSP_MAX}")
    _, order = held_karp(cost)
    return make_tour(ps, cost, order)


def brute_force_tsp(cost: np.ndarray) -> float:
    n = cost.shape[0]
    if n > 9:
        raise CapacityError("brute force TSP is limited to n <= 9")
    if n <= 1:
        return 0.0
    best = math.inf
    for perm in itertools.permutations(range(1, n)):
        best = min(best, tour_cost(cost, (0,) + perm))
    return best


# --- local search -------------------------------------------------------------------

def two_opt(cost: np.ndarray, order) -> np.ndarray:
    """First-improvement 2-opt for symmetric costs."""
    o = np.array(order, dtype=np.int64)
    n = o.size
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a, b = o[i], o[i + 1]
            js = np.arange(i + 2, n if i > 0 else n - 1)
            if js.size == 0:
                continue
            c_, d_ = o[js], o[(js + 1) % n]
            delta = cost[a, c_] + cost[b, d_] - cost[a, b] - cost[c_, d_]
            k = int(np.argmin(delta))
            if delta[k] < -_IMPROVE_TOL:
                j = js[k]
                o[i + 1:j + 1] = o[i + 1:j + 1][::-1]
                improved = True
    return o


def or_opt(cost: np.ndarray, order, max_segment: int = 3) -> np.ndarray:
    """Move segments of up to ``max_segment`` points, keeping their direction."""
    o = list(np.asarray(order, dtype=np.int64))
    n = len(o)
    improved = True
    while improved:
        improved = False
        for s in range(1, min(max_segment, n - 2) + 1):
            i = 0
            while i < n:
                seg = [o[(i + k) % n] for k in range(s)]
                prev, nxt = o[(i - 1) % n], o[(i + s) % n]
                rest = [v for v in o if v not in seg]
                gain = cost[prev, seg[0]] + cost[seg[-1], nxt] - cost[prev, nxt]
                r = np.array(rest)
                r_next = np.roll(r, -1)
                ins = cost[r, seg[0]] + cost[seg[-1], r_next] - cost[r, r_next]
                k = int(np.argmin(ins))
                if ins[k] < gain - _IMPROVE_TOL:
                    o = rest[:k + 1] + seg + rest[k + 1:]
                    improved = True
                i += 1
    return np.array(o, dtype=np.int64)


def heuristic_tsp(ps: PointSet, L: CostFunction | None = None) -> Tour:
    """Space-filling start, then 2-opt and or-opt (or-opt only for asymmetric costs)."""
    L = L or CostFunction.euclidean()
    cost = L.matrix(ps.points)
    order = space_filling_tour(ps, L).order
    if ps.n <= 3:
        return exact_tsp(ps, L)
    best = tour_cost(cost, order)
    while True:
        if L.symmetric:
            order = two_opt(cost, order)
        order = or_opt(cost, order)
        new = tour_cost(cost, order)
        if new >= best - _IMPROVE_TOL:
            break
        best = new
    return make_tour(ps, cost, order)


def tsp_witness_alpha(t: Tour, ps: PointSet, L: CostFunction | None = None) -> np.ndarray:
    """``alpha_i = 2 [L(prev, i) + L(i, next)]`` along the tour, indexed by point."""
    cost = (L or CostFunction.euclidean()).matrix(ps.points)
    o = t.order
    nxt = np.roll(o, -1)
    prv = np.roll(o, 1)
    alpha = np.empty(o.size)
    alpha[o] = 2.0 * (cost[prv, o] + cost[o, nxt])
    return alpha


def tsp_witness_budget(C_ratio: float) -> float:
    return 64.0 * C_ratio ** 2


# --- spanning trees ---------------------------------------------------------------------

class SpanningTree(NamedTuple):
    edges: np.ndarray          # (n-1, 2), each row (parent, child)
    total_length: float
    edge_lengths: np.ndarray
    max_degree: int

    def degrees(self, n: int) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=n)


def mst(ps: PointSet) -> SpanningTree:
    """Euclidean minimum spanning tree by dense Prim from vertex 0."""
    n = ps.n
    if n < 2:
        raise DomainError("need at least 2 points")
    if ps.has_duplicates():
        raise DomainError("points must be distinct")
    d = euclidean_matrix(ps.points)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    key = d[0].copy()
    link = np.zeros(n, dtype=np.int64)
    edges = np.empty((n - 1, 2), dtype=np.int64)
    lengths = np.empty(n - 1)
    for k in range(n - 1):
        cand = np.where(in_tree, np.inf, key)
        v = int(np.argmin(cand))
        edges[k] = (link[v], v)
        lengths[k] = cand[v]
        in_tree[v] = True
        closer = (d[v] < key) & ~in_tree
        key[closer] = d[v][closer]
        link[closer] = v
    deg = np.bincount(edges.ravel(), minlength=n)
    return SpanningTree(edges, float(lengths.sum()), lengths, int(deg.max()))


class MSTInvariants(NamedTuple):
    sum_sq_edges: float
    max_degree: int
    witness_square_sum: float
    edges_ok: bool
    degree_ok: bool
    witness_ok: bool

    @property
    def passed(self) -> bool:
        return self.edges_ok and self.degree_ok and self.witness_ok


def mst_witness_alpha(t: SpanningTree, n: int) -> np.ndarray:
    """``alpha_i`` = twice the total length of the tree edges at vertex ``i``."""
    inc = np.zeros(n)
    np.add.at(inc, t.edges[:, 0], t.edge_lengths)
    np.add.at(inc, t.edges[:, 1], t.edge_lengths)
    return 2.0 * inc


def mst_invariant_check(t: SpanningTree, n: int | None = None) -> MSTInvariants:
    n = int(t.edges.max()) + 1 if n is None else n
    sq = float((t.edge_lengths ** 2).sum())
    w = float((mst_witness_alpha(t, n) ** 2).sum())
    return MSTInvariants(sq, t.max_degree, w, sq <= 410, t.max_degree <= 6, w <= 19680)


def steiner_upper(ps: PointSet) -> float:
    """MST length, an upper bound on the Steiner tree length."""
    return mst(ps).total_length


@lru_cache(maxsize=None)
def _all_trees(n: int) -> np.ndarray:
    """Edge lists of all ``n^(n-2)`` labelled trees via Pruefer decoding."""
    if n == 2:
        return np.array([[[0, 1]]], dtype=np.int64)
    out = []
    for seq in itertools.product(range(n), repeat=n - 2):
        deg = [1] * n
        for v in seq:
            deg[v] += 1
        edges = []
        for v in seq:
            leaf = next(u for u in range(n) if deg[u] == 1)
            edges.append((leaf, v))
            deg[leaf] -= 1
            deg[v] -= 1
        u, w = [x for x in range(n) if deg[x] == 1]
        edges.append((u, w))
        out.append(edges)
    return np.array(out, dtype=np.int64)


def brute_force_mst_length(ps: PointSet) -> float:
    if ps.n > 8:
        raise CapacityError("spanning-tree enumeration is limited to n <= 8")
    d = euclidean_matrix(ps.points)
    trees = _all_trees(ps.n)
    return float(d[trees[..., 0], trees[..., 1]].sum(axis=1).min())
