"""Talagrand's convex distance to a finite set.

For a point ``x`` and finite ``S``, ``d_T(x, S)`` is the Euclidean norm of the
minimum-norm point of the convex hull of the disagreement vectors
``v(y) = 1[x != y]``, ``y in S``.  The solver is Wolfe's min-norm-point
algorithm with an away-step Frank-Wolfe fallback; ``convex_distance_oracle``
is an independent exhaustive active-set search for small ``S``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.stats import norm as normal

from .errors import CapacityError, DegenerateLawError, DimensionError, DomainError
from .selfbounding import ProductSpace, pair_margins

GAP_TOL = 1e-10
FW_MAX_ITER = 100_000
WOLFE_MAX_ITER = 10_000
ORACLE_MAX_SET = 6


@dataclass(frozen=True, eq=False)
class ConvexDistanceInstance:
    x: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x)
        S = np.asarray(self.S)
        if S.ndim == 1:
            S = S[None, :]
        if S.shape[0] == 0:
            raise DomainError("S must be non-empty")
        if x.ndim != 1 or S.shape[1] != x.size:
            raise DimensionError("x and the points of S must have the same length")
        if S.shape[0] > 10 ** 4 or x.size > 10 ** 4:
            raise CapacityError("instance exceeds 10^4 points or coordinates")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "S", S)

    @property
    def n(self) -> int:
        return self.x.size

    def indicator_vectors(self) -> np.ndarray:
        return (self.S != self.x[None, :]).astype(float)

    @classmethod
    def from_json(cls, text: str) -> "ConvexDistanceInstance":
        obj = json.loads(text)
        return cls(np.array(obj["x"]), np.array(obj["S"]))

    def to_json(self) -> str:
        return json.dumps({"x": self.x.tolist(), "S": self.S.tolist()})


class ConvexDistanceResult(NamedTuple):
    value: float
    optimal_weights: np.ndarray
    optimal_direction: np.ndarray
    gap: float
    method: str


def _affine_min_norm(P: np.ndarray) -> np.ndarray:
    """Weights ``mu`` (summing to 1) of the min-norm point of the affine hull of the rows."""
    k = P.shape[0]
    G = P @ P.T
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = G
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    mu = sol[:k]
    return mu / mu.sum()


def wolfe_min_norm(P: np.ndarray, tol: float = GAP_TOL, max_iter: int = WOLFE_MAX_ITER):
    """Wolfe's algorithm on the rows of ``P``; returns ``(weights, gap, converged)``."""
    m = P.shape[0]
    norms = (P ** 2).sum(axis=1)
    start = int(np.argmin(norms))
    active = [start]
    lam = np.array([1.0])
    z = P[start].copy()
    scale = max(1.0, float(norms.max()))
    gap = math.inf
    for _ in range(max_iter):
        dots = P @ z
        j = int(np.argmin(dots))
        gap = float(z @ z - dots[j])
        if gap <= tol * scale or j in active:
            break
        active.append(j)
        lam = np.append(lam, 0.0)
        for _ in range(max_iter):
            mu = _affine_min_norm(P[active])
            if np.all(mu > 1e-14):
                lam = mu
                break
            neg = mu <= 1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, lam / (lam - mu), np.inf)
            theta = float(min(1.0, np.min(ratios)))
            lam = theta * mu + (1.0 - theta) * lam
            keep = lam > 1e-14
            if keep.all():
                keep[int(np.argmin(lam))] = False
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep]
            lam /= lam.sum()
        z = lam @ P[active]
    else:
        return _expand(active, lam, m), gap, False
    dots = P @ z
    gap = float(z @ z - dots.min())
    return _expand(active, lam, m), gap, gap <= tol * scale


def _expand(active, lam, m):
    w = np.zeros(m)
    w[active] = lam
    return w


def away_step_frank_wolfe(P: np.ndarray, tol: float = GAP_TOL, max_iter: int = FW_MAX_ITER,
                          w0: Optional[np.ndarray] = None):
    m = P.shape[0]
    w = np.zeros(m)
    if w0 is None:
        w[int(np.argmin((P ** 2).sum(axis=1)))] = 1.0
    else:
        w = w0.copy()
    gap = math.inf
    for _ in range(max_iter):
        z = w @ P
        grad = P @ z                     # half-gradient with respect to the weights
        s = int(np.argmin(grad))
        gap = float(z @ z - grad[s])
        if gap <= tol:
            break
        support = np.nonzero(w > 0)[0]
        a = support[int(np.argmax(grad[support]))]
        away_gap = float(grad[a] - z @ z)
        if gap >= away_gap:
            d = P[s] - z
            gmax = 1.0
            direction = -w
            direction[s] += 1.0
        else:
            d = z - P[a]
            gmax = w[a] / (1.0 - w[a]) if w[a] < 1 else math.inf
            direction = w.copy()
            direction[a] -= 1.0
        dd = float(d @ d)
        if dd == 0:
            break
        step = min(gmax, max(0.0, -float(z @ d) / dd))
        w = np.maximum(w + step * direction, 0.0)
        w /= w.sum()
    return w, gap


def convex_distance(inst: ConvexDistanceInstance, tol: float = GAP_TOL) -> ConvexDistanceResult:
    V = inst.indicator_vectors()
    m, n = V.shape
    hit = np.nonzero(~V.any(axis=1))[0]
    if hit.size:
        w = np.zeros(m)
        w[hit[0]] = 1.0
        return ConvexDistanceResult(0.0, w, np.full(n, 1.0 / math.sqrt(n)), 0.0, "member")
    U, first, inverse = np.unique(V, axis=0, return_index=True, return_inverse=True)
    wu, gap, ok = wolfe_min_norm(U, tol)
    method = "wolfe"
    if not ok:
        wu, gap = away_step_frank_wolfe(U, tol, w0=wu)
        method = "frank-wolfe"
    z = wu @ U
    value = float(np.sqrt(z @ z))
    w = np.zeros(m)
    w[first] = wu
    direction = z / value if value > 0 else np.full(n, 1.0 / math.sqrt(n))
    return ConvexDistanceResult(value, w, direction, gap, method)


def convex_distance_oracle(inst: ConvexDistanceInstance) -> float:
    """Smallest norm over nonnegative affine combinations of every subset of ``S``.

    Each subset is reduced to unconstrained least squares by eliminating the
    last weight; subsets whose optimum has a negative weight are discarded.
    """
    V = np.unique(inst.indicator_vectors(), axis=0)
    if V.shape[0] > ORACLE_MAX_SET:
        raise CapacityError(f"oracle is limited to |S| <= {ORACLE_MAX_SET}")
    best = math.inf
    for r in range(1, V.shape[0] + 1):
        for sub in itertools.combinations(range(V.shape[0]), r):
            last = V[sub[-1]]
            if r == 1:
                best = min(best, float(np.linalg.norm(last)))
                continue
            D = (V[list(sub[:-1])] - last).T
            coef = np.linalg.lstsq(D, -last, rcond=None)[0]
            weights = np.append(coef, 1.0 - coef.sum())
            if np.all(weights >= -1e-12):
                best = min(best, float(np.linalg.norm(last + D @ coef)))
    return best


def weighted_hamming_to_set(c: np.ndarray, inst: ConvexDistanceInstance) -> float:
    """``d_c(x, S) = min_y sum_i c_i 1[x_i != y_i]``."""
    return float((inst.indicator_vectors() @ c).min())


# --- properties over a whole space ---------------------------------------------------

def all_distances(points: np.ndarray, S: np.ndarray) -> tuple:
    """``d_T`` and optimal directions for every row of ``points``."""
    vals = np.empty(len(points))
    dirs = np.empty(points.shape, dtype=float)
    for k, x in enumerate(points):
        r = convex_distance(ConvexDistanceInstance(x, S))
        vals[k] = r.value
        dirs[k] = r.optimal_direction
    return vals, dirs


class LipschitzReport(NamedTuple):
    max_step: float
    lipschitz_ok: bool
    witness_margin: float
    witness_ok: bool
    square_budget_ok: bool
    points: int

    @property
    def passed(self) -> bool:
        return self.lipschitz_ok and self.witness_ok and self.square_budget_ok


def dt_squared_lipschitz_check(space: ProductSpace, S, tol: float = 1e-9) -> LipschitzReport:
    """One-coordinate steps of ``d_T^2`` lie in ``[-1, 1]``, and ``alpha = 2 d_T c``
    is a weak (4, 0) witness for ``d_T^2`` on the whole space."""
    if space.size > 10 ** 4:
        raise CapacityError("space exceeds 10^4 points")
    pts = space.points()
    S = np.asarray(S)
    d, c = all_distances(pts, S)
    d2 = d ** 2
    grid = d2.reshape(space.shape)
    step = 0.0
    for i in range(space.n):
        g = np.moveaxis(grid, i, -1)
        step = max(step, float((g.max(axis=-1) - g.min(axis=-1)).max()))
    alpha = 2.0 * d[:, None] * c
    margin, _, _, _ = pair_margins(pts, d2, alpha)
    square_ok = bool(np.all((alpha ** 2).sum(axis=1) <= 4.0 * d2 + tol))
    return LipschitzReport(step, step <= 1.0 + tol, margin, margin >= -tol, square_ok, len(pts))


# --- the exponential inequality ----------------------------------------------------------

class ConvexExperimentReport(NamedTuple):
    lhs: float
    ci_low: float
    ci_high: float
    rhs: float
    mu_S: float
    rate: float
    exact: bool

    @property
    def satisfied(self) -> bool:
        return self.ci_low <= self.rhs


def _in_set(points: np.ndarray, S: np.ndarray) -> np.ndarray:
    keys = {tuple(s) for s in S.tolist()}
    return np.array([tuple(p) in keys for p in points.tolist()])


def convex_distance_experiment(points: np.ndarray, S, rate: float,
                               probs: Optional[np.ndarray] = None,
                               confidence: float = 0.99) -> ConvexExperimentReport:
    """Compare ``E exp(rate d_T(X, S)^2)`` with ``1 / mu(S)``.

    With ``probs`` the rows of ``points`` are the whole support and the
    comparison is exact; otherwise they are samples and ``mu(S)`` and the
    left side are estimated (normal-approximation interval on the left side).
    """
    points = np.asarray(points)
    S = np.asarray(S)
    uniq, inv = np.unique(points, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    d, _ = all_distances(uniq, S)
    vals = np.exp(rate * d[inv] ** 2)
    inside = _in_set(points, S)
    if probs is not None:
        p = np.asarray(probs, dtype=float)
        mu = float(p[inside].sum())
        if mu <= 0:
            raise DegenerateLawError("mu(S) is zero")
        lhs = float(p @ vals)
        return ConvexExperimentReport(lhs, lhs, lhs, 1.0 / mu, mu, rate, True)
    mu = float(inside.mean())
    if mu <= 0:
        raise DegenerateLawError("no sample fell in S")
    lhs = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.inf
    z = float(normal.ppf(0.5 + confidence / 2))
    return ConvexExperimentReport(lhs, lhs - z * se, lhs + z * se, 1.0 / mu, mu, rate, False)


def ordered_sample_space(N: int, n: int) -> np.ndarray:
    """All ordered samples of ``n`` distinct elements of ``range(N)``."""
    return np.array(list(itertools.permutations(range(N), n)))
