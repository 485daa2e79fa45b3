"""Exhaustive checks of the self-bounding classes on finite product spaces.

Four classes are handled:

* ``SB``    - ``0 <= g - g_i <= 1`` and ``sum_i (g - g_i) <= a g + b``
* ``WSB``   - ``sum_i (g - g_i)^2 <= a g + b``
* ``STAR``  - a witness ``alpha`` in ``[0, 1]^n`` with
  ``g(x) - g(y) <= sum_{x_i != y_i} alpha_i(x)`` and ``sum_i alpha_i <= a g + b``
* ``WSTAR`` - a nonnegative witness with the same pair condition and
  ``sum_i alpha_i^2 <= a g + b``

where ``g_i`` is the infimum of ``g`` over coordinate ``i``.  Margins are
always "right side minus left side", so negative margins are violations.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import CapacityError, DimensionError, DomainError
from .models.ergm import EdgeGraph, GraphMotif, binomial_scale, motif_copies

MAX_PAIR_CHECKS = 10 ** 8
MARGIN_TOL = 1e-12
_BLOCK_CELLS = 4_000_000


class Variant(str, Enum):
    SB = "SB"
    WSB = "WSB"
    STAR = "STAR"
    WSTAR = "WSTAR"


@dataclass(frozen=True)
class ProductSpace:
    """Finite product ``Lambda_1 x ... x Lambda_n`` of explicit value lists."""

    alphabets: tuple

    def __post_init__(self):
        alph = tuple(tuple(a) for a in self.alphabets)
        if not alph or any(len(a) == 0 for a in alph):
            raise DomainError("every coordinate needs a non-empty alphabet")
        object.__setattr__(self, "alphabets", alph)

    @classmethod
    def cube(cls, n: int, values=(0, 1)) -> "ProductSpace":
        return cls(tuple(tuple(values) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.alphabets)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.alphabets)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def points(self) -> np.ndarray:
        """All points in lexicographic order, shape ``(size, n)``."""
        return np.array(list(itertools.product(*self.alphabets)))


@dataclass(frozen=True)
class WitnessedFunction:
    g: Callable
    alpha: Optional[Callable]
    a: float
    b: float
    variant: Variant = Variant.STAR

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError("a and b must be nonnegative")
        object.__setattr__(self, "variant", Variant(self.variant))


@dataclass
class VerificationReport:
    holds: bool
    checked_pairs: int
    worst_pair: Optional[tuple] = None
    worst_point: Optional[tuple] = None
    violations: dict = field(default_factory=dict)
    variant: str = ""

    def to_json(self) -> str:
        def conv(v):
            if v is None:
                return None
            x, *rest = v
            return [np.asarray(x).tolist()] + [
                np.asarray(r).tolist() if isinstance(r, np.ndarray)
                else r if isinstance(r, str) else float(r) for r in rest]

        return json.dumps({
            "variant": self.variant,
            "holds": self.holds,
            "checked_pairs": self.checked_pairs,
            "worst_pair": conv(self.worst_pair),
            "worst_point": conv(self.worst_point),
            "violations": self.violations,
        }, sort_keys=True)


def _check_capacity(space: ProductSpace, pairs: bool = True) -> None:
    load = space.size ** 2 if pairs else space.size
    if load > MAX_PAIR_CHECKS:
        raise CapacityError(f"{load} checks exceed the budget of {MAX_PAIR_CHECKS}")


def _evaluate(space: ProductSpace, w: WitnessedFunction):
    pts = space.points()
    g = np.array([float(w.g(p)) for p in pts])
    alpha = np.array([np.asarray(w.alpha(p), dtype=float) for p in pts])
    if alpha.shape != pts.shape:
        raise DimensionError("alpha(x) must have one entry per coordinate")
    return pts, g, alpha


def pair_margins(pts: np.ndarray, g: np.ndarray, alpha: np.ndarray):
    """Minimum of ``sum_{x_i != y_i} alpha_i(x) - (g(x) - g(y))`` over all pairs.

    Returns ``(margin, ix, iy, violations)``; ties resolve to the first pair
    in lexicographic ``(x, y)`` order.
    """
    M, n = pts.shape
    block = max(1, _BLOCK_CELLS // max(1, M * n))
    best = (math.inf, -1, -1)
    bad = 0
    for start in range(0, M, block):
        stop = min(M, start + block)
        diff = pts[start:stop, None, :] != pts[None, :, :]
        rhs = np.einsum("bmn,bn->bm", diff, alpha[start:stop])
        margin = rhs - (g[start:stop, None] - g[None, :])
        bad += int(np.count_nonzero(margin < -MARGIN_TOL))
        k = int(np.argmin(margin))
        val = float(margin.flat[k])
        if val < best[0]:
            best = (val, start + k // M, k % M)
    return best[0], best[1], best[2], bad


def _point_report(pts, values, name, violations, worst):
    k = int(np.argmin(values))
    bad = int(np.count_nonzero(values < -MARGIN_TOL))
    if bad:
        violations[name] = bad
    if worst is None or values[k] < worst[1]:
        return (pts[k], float(values[k]), name)
    return worst


def verify_star(w: WitnessedFunction, space: ProductSpace) -> VerificationReport:
    """Check a witnessed function against its class over every point and pair."""
    if w.variant in (Variant.SB, Variant.WSB):
        return verify_sb(w.g, space, w.a, w.b, weak=w.variant is Variant.WSB)
    if w.alpha is None:
        raise DomainError("*-classes need a witness alpha")
    _check_capacity(space)
    pts, g, alpha = _evaluate(space, w)
    budget = w.a * g + w.b
    violations: dict = {}
    worst_pt = None
    worst_pt = _point_report(pts, alpha.min(axis=1), "alpha_nonnegative", violations, worst_pt)
    if w.variant is Variant.STAR:
        worst_pt = _point_report(pts, 1.0 - alpha.max(axis=1), "alpha_at_most_one", violations, worst_pt)
        worst_pt = _point_report(pts, budget - alpha.sum(axis=1), "sum_budget", violations, worst_pt)
    else:
        worst_pt = _point_report(pts, budget - (alpha ** 2).sum(axis=1), "square_sum_budget",
                                 violations, worst_pt)
    margin, ix, iy, bad = pair_margins(pts, g, alpha)
    if bad:
        violations["pair"] = bad
    return VerificationReport(
        holds=not violations,
        checked_pairs=len(pts) ** 2,
        worst_pair=(pts[ix], pts[iy], margin),
        worst_point=worst_pt,
        violations=violations,
        variant=w.variant.value,
    )


def coordinate_infima(gt: np.ndarray) -> list:
    """``g_i`` as arrays broadcastable against ``gt`` (minimum along axis ``i``)."""
    return [gt.min(axis=i, keepdims=True) for i in range(gt.ndim)]


def verify_sb(g: Callable, space: ProductSpace, a: float, b: float,
              weak: bool = False) -> VerificationReport:
    """Check the (weakly) self-bounding conditions with ``g_i`` the coordinate infimum."""
    if a < 0 or b < 0:
        raise DomainError("a and b must be nonnegative")
    _check_capacity(space)
    pts = space.points()
    gt = np.array([float(g(p)) for p in pts]).reshape(space.shape)
    incs = np.stack([gt - gi for gi in coordinate_infima(gt)], axis=-1).reshape(len(pts), space.n)
    gv = gt.reshape(-1)
    budget = a * gv + b
    violations: dict = {}
    worst = None
    if weak:
        worst = _point_report(pts, budget - (incs ** 2).sum(axis=1), "square_sum_budget",
                              violations, worst)
    else:
        worst = _point_report(pts, 1.0 - incs.max(axis=1), "increment_at_most_one", violations, worst)
        worst = _point_report(pts, budget - incs.sum(axis=1), "sum_budget", violations, worst)
    return VerificationReport(
        holds=not violations,
        checked_pairs=len(pts) * space.n,
        worst_point=worst,
        violations=violations,
        variant=(Variant.WSB if weak else Variant.SB).value,
    )


def subgraph_witness(x, motif: GraphMotif, n_vertices: Optional[int] = None) -> np.ndarray:
    """Per-edge witness for the scaled motif count ``N_S / C(n-2, n_S-2)``.

    Each copy of the motif (a vertex subset whose induced graph contains it)
    charges the edges of its first embedding; the charge per edge is divided
    by ``C(n-2, n_S-2)``.
    """
    g = _as_graph(x, n_vertices)
    if motif.n_vertices > g.n_vertices:
        raise DomainError("motif has more vertices than the host graph")
    counts = np.zeros(g.edges.size)
    for _, slots in motif_copies(g, motif):
        counts[list(slots)] += 1
    return counts / binomial_scale(g.n_vertices, motif)


def scaled_subgraph_count(x, motif: GraphMotif, n_vertices: Optional[int] = None) -> float:
    g = _as_graph(x, n_vertices)
    return sum(1 for _ in motif_copies(g, motif)) / binomial_scale(g.n_vertices, motif)


def _as_graph(x, n_vertices: Optional[int]) -> EdgeGraph:
    if isinstance(x, EdgeGraph):
        return x
    e = np.asarray(x)
    if n_vertices is None:
        n_vertices = int(round((1 + math.sqrt(1 + 8 * e.size)) / 2))
    return EdgeGraph(n_vertices, e)


def n_minus_witness() -> WitnessedFunction:
    """``n_-(sigma)`` with ``alpha_i = 1[sigma_i = -1]``, a (1, 0)-* witness."""
    return WitnessedFunction(
        g=lambda s: float(np.count_nonzero(np.asarray(s) == -1)),
        alpha=lambda s: (np.asarray(s) == -1).astype(float),
        a=1.0, b=0.0, variant=Variant.STAR)


def subgraph_witnessed(motif: GraphMotif, n_vertices: int) -> WitnessedFunction:
    return WitnessedFunction(
        g=lambda x: scaled_subgraph_count(x, motif, n_vertices),
        alpha=lambda x: subgraph_witness(x, motif, n_vertices),
        a=float(motif.n_edges), b=0.0, variant=Variant.STAR)
