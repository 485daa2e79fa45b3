"""Dobrushin interdependence matrices and the inhomogeneity coefficient.

The matrix entry ``a[i, j]`` bounds how far the conditional law of
coordinate ``i`` can move in total variation when coordinate ``j`` alone is
changed.  ``exact_matrix`` computes the smallest such entries by exhaustive
enumeration; ``curie_weiss_matrix`` is the analytic matrix for the mean-field
Ising model.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import CapacityError, DegenerateLawError, DimensionError, DomainError
from .finite_dist import FiniteDistribution

MAX_CONDITIONAL_EVALS = 10 ** 7
NORM_TOL = 1e-10


def _power_norm2(a: np.ndarray, rtol: float = NORM_TOL, max_iter: int = 100_000) -> float:
    """Largest singular value by power iteration on ``A^T A``."""
    n = a.shape[0]
    if not np.any(a):
        return 0.0
    ata = a.T @ a
    v = np.full(n, 1.0 / math.sqrt(n))
    # a positive start vector is not orthogonal to the Perron vector of a
    # nonnegative matrix; add a deterministic tilt for the general case
    v = v + np.linspace(0.0, 1e-3, n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = ata @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_lam = float(v @ w)
        v = w / nw
        if abs(new_lam - lam) <= rtol * max(new_lam, 1e-300):
            lam = new_lam
            break
        lam = new_lam
    return math.sqrt(max(lam, 0.0))


@dataclass(frozen=True, eq=False)
class InterdependenceMatrix:
    """Nonnegative n x n matrix with zero diagonal, plus its operator norms."""

    entries: np.ndarray
    norm_1: float = field(init=False)
    norm_inf: float = field(init=False)
    norm_2: float = field(init=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError("interdependence matrix must be square")
        if np.any(a < 0):
            raise DomainError("entries must be nonnegative")
        if np.any(np.diag(a) != 0):
            raise DomainError("diagonal entries must be zero")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "norm_1", float(a.sum(axis=0).max()))
        object.__setattr__(self, "norm_inf", float(a.sum(axis=1).max()))
        object.__setattr__(self, "norm_2", _power_norm2(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def satisfies_dobrushin(self) -> bool:
        """The two hypotheses used throughout: ``|A|_1 < 1`` and ``|A|_inf <= 1``."""
        return self.norm_1 < 1.0 and self.norm_inf <= 1.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "norm_1", "norm_inf", "norm_2"])
        w.writerow([self.n, repr(self.norm_1), repr(self.norm_inf), repr(self.norm_2)])
        for row in self.entries:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "InterdependenceMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        n = int(rows[1][0])
        entries = np.array([[float(x) for x in r] for r in rows[2:2 + n]])
        return cls(entries)


@dataclass(frozen=True)
class ConditionalModel:
    """Single-site conditional laws of a finite product-space random vector.

    ``conditional(i, x)`` returns the law of coordinate ``i`` given the other
    coordinates of ``x`` (``x[i]`` is ignored), as a probability vector or
    ``FiniteDistribution``; ``None`` marks a conditioning event of
    probability zero.  ``dependencies[i]``, when given, lists the only
    coordinates the ``i``-th conditional may depend on; ``exact_matrix`` then
    enumerates those alone.
    """

    alphabet_sizes: tuple
    conditional: Callable
    dependencies: Optional[tuple] = None
    joint: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.alphabet_sizes)

    @classmethod
    def from_joint(cls, weights: np.ndarray) -> "ConditionalModel":
        """Model whose conditionals are read off an unnormalized joint table."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise DomainError("joint weights must be nonnegative with positive total")

        def conditional(i, x):
            idx = list(x)
            idx[i] = slice(None)
            col = w[tuple(idx)]
            s = col.sum()
            return None if s <= 0 else col / s

        return cls(tuple(w.shape), conditional, None, w)

    def state_count(self) -> int:
        return math.prod(self.alphabet_sizes)

    def states(self):
        return itertools.product(*(range(k) for k in self.alphabet_sizes))


def _probs(out) -> Optional[np.ndarray]:
    if out is None:
        return None
    if isinstance(out, FiniteDistribution):
        return out.as_float()
    return np.asarray(out, dtype=float)


def _max_tv_along(cond: np.ndarray, axis: int) -> float:
    """Max tv between conditional laws (last axis) differing along ``axis``."""
    c = np.moveaxis(cond, axis, 0)
    best = 0.0
    k = c.shape[0]
    for v in range(k):
        for w in range(v + 1, k):
            d = 0.5 * np.abs(c[v] - c[w]).sum(axis=-1)
            d = d[~np.isnan(d)]
            if d.size:
                best = max(best, float(d.max()))
    return min(best, 1.0)


def _conditional_tensor(model: ConditionalModel, i: int, deps: Sequence[int]) -> np.ndarray:
    sizes = model.alphabet_sizes
    shape = tuple(sizes[j] for j in deps) + (sizes[i],)
    if model.joint is not None and len(deps) == model.n - 1:
        w = model.joint
        s = w.sum(axis=i, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(s > 0, w / np.where(s > 0, s, 1.0), np.nan)
        return np.moveaxis(cond, i, -1)
    out = np.empty(shape)
    x = [0] * model.n
    for cfg in itertools.product(*(range(sizes[j]) for j in deps)):
        for j, v in zip(deps, cfg):
            x[j] = v
        p = _probs(model.conditional(i, tuple(x)))
        out[cfg] = np.nan if p is None else p
    return out


def exact_matrix(model: ConditionalModel, max_evaluations: int = MAX_CONDITIONAL_EVALS,
                 workers: int = 1) -> InterdependenceMatrix:
    """Smallest Dobrushin matrix for single-coordinate discrepancies.

    ``a[i, j]`` is the maximum, over configurations that differ only in
    coordinate ``j``, of the tv distance between the two conditionals of
    coordinate ``i``.  Conditioning events of probability zero are skipped.
    """
    n = model.n
    sizes = model.alphabet_sizes
    deps = []
    for i in range(n):
        if model.dependencies is not None:
            d = tuple(sorted(j for j in model.dependencies[i] if j != i))
        else:
            d = tuple(j for j in range(n) if j != i)
        deps.append(d)
    evals = sum(math.prod(sizes[j] for j in d) for d in deps)
    if evals > max_evaluations:
        raise CapacityError(f"{evals} conditional evaluations exceed {max_evaluations}")

    def row(i):
        cond = _conditional_tensor(model, i, deps[i])
        r = np.zeros(n)
        for axis, j in enumerate(deps[i]):
            r[j] = _max_tv_along(cond, axis)
        return r

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(row, range(n)))
    else:
        rows = [row(i) for i in range(n)]
    return InterdependenceMatrix(np.vstack(rows))


def dobrushin_violation(model: ConditionalModel, matrix: InterdependenceMatrix,
                        max_states: int = 10 ** 4) -> float:
    """Largest excess of ``tv(mu_i(.|x), mu_i(.|y))`` over ``sum_j a_ij [x_j != y_j]``.

    Checks every pair of states (not only neighbours); a value ``<= 0`` means
    the matrix is a valid interdependence matrix for the model.
    """
    total = model.state_count()
    if total > max_states:
        raise CapacityError(f"{total} states exceed {max_states}")
    states = np.array(list(model.states()))
    a = matrix.entries
    worst = -math.inf
    for i in range(model.n):
        conds = [_probs(model.conditional(i, tuple(s))) for s in states]
        valid = np.array([c is not None for c in conds])
        width = model.alphabet_sizes[i]
        cmat = np.array([c if c is not None else np.full(width, np.nan) for c in conds])
        for u in range(total):
            if not valid[u]:
                continue
            tv = 0.5 * np.abs(cmat[u] - cmat).sum(axis=1)
            diff = states[u] != states
            diff[:, i] = False
            rhs = diff @ a[i]
            excess = (tv - rhs)[valid]
            worst = max(worst, float(excess.max()))
    return worst


def curie_weiss_matrix(n: int, beta: float) -> InterdependenceMatrix:
    """Matrix with every off-diagonal entry ``beta / n``.

    All three operator norms equal ``beta * (1 - 1/n)``.
    """
    if n < 2:
        raise DomainError("Curie-Weiss matrix needs n >= 2")
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    a = np.full((n, n), beta / n)
    np.fill_diagonal(a, 0.0)
    return InterdependenceMatrix(a)


# ---------------------------------------------------------------------------
# Laws on size-n subsets of {0, ..., N-1}
# ---------------------------------------------------------------------------

def _swr_set_probability(p: Sequence, items: Sequence[int]):
    """Probability that sequential weighted sampling picks exactly ``items`` first."""
    m = len(items)
    local = [p[i] for i in items]
    prob = {0: 1}
    mass = {0: 0}
    for mask in range(1, 1 << m):
        total = 0
        for k in range(m):
            bit = 1 << k
            if mask & bit:
                prev = mask ^ bit
                total += prob[prev] * local[k] / (1 - mass[prev])
        prob[mask] = total
        low = mask & -mask
        mass[mask] = mass[mask ^ low] + local[low.bit_length() - 1]
    return prob[(1 << m) - 1]


@dataclass(frozen=True)
class SubsetLaw:
    """Unnormalized law on the size-``n`` subsets of ``range(N)``.

    ``weight`` receives a sorted tuple of indices.
    """

    N: int
    n: int
    weight: Callable

    def __post_init__(self):
        if not 0 <= self.n <= self.N:
            raise DomainError("need 0 <= n <= N")

    @classmethod
    def uniform(cls, N: int, n: int) -> "SubsetLaw":
        return cls(N, n, lambda s: Fraction(1))

    @classmethod
    def weighted_swr(cls, p: Sequence, n: int) -> "SubsetLaw":
        """Law of the unordered set drawn by sequential weighted sampling.

        ``p`` must be strictly positive and sum to one (floats or Fractions).
        """
        p = list(p)
        if any(x <= 0 for x in p):
            raise DomainError("weighted sampling needs strictly positive p")
        if abs(sum(p) - 1) > 1e-12:
            raise DomainError("p must sum to 1")
        return cls(len(p), n, lambda s: _swr_set_probability(p, s))

    def weights(self) -> dict:
        """Map bitmask -> weight over all C(N, n) subsets."""
        out = {}
        for combo in itertools.combinations(range(self.N), self.n):
            mask = 0
            for c in combo:
                mask |= 1 << c
            out[mask] = self.weight(combo)
        return out


class Inhomogeneity(NamedTuple):
    r1: object
    r2: object
    rho: object


def inhomogeneity_exact(law: SubsetLaw, max_subsets: int = 10 ** 6) -> Inhomogeneity:
    """Exhaustive evaluation of the two conditional-ratio suprema and rho.

    ``r1`` is the largest probability of completing a fixed (n-1)-set with a
    particular element; ``r2`` the largest change in the probability of
    completing an (n-2)-set plus ``b`` versus plus ``c`` with the same third
    element ``d`` (``b, c, d`` distinct).  ``rho = n (r1 + (N - n) r2)``.
    Arithmetic follows the weight type, so Fraction weights give exact values.
    """
    N, n = law.N, law.n
    if n == 0 or n >= N:
        raise DomainError("need 1 <= n < N")
    if math.comb(N, n) > max_subsets:
        raise CapacityError(f"C({N},{n}) subsets exceed {max_subsets}")
    w = law.weights()

    r1 = 0
    for combo in itertools.combinations(range(N), n - 1):
        base = sum(1 << c for c in combo)
        outside = [b for b in range(N) if not base >> b & 1]
        vals = [w[base | 1 << b] for b in outside]
        denom = sum(vals)
        if denom <= 0:
            raise DegenerateLawError(f"(n-1)-set {combo} has zero completion mass")
        r1 = max(r1, max(vals) / denom)

    r2 = 0
    if n >= 2:
        for combo in itertools.combinations(range(N), n - 2):
            base = sum(1 << c for c in combo)
            outside = [b for b in range(N) if not base >> b & 1]
            ratio = {}
            for b in outside:
                vals = {d: w[base | 1 << b | 1 << d] for d in outside if d != b}
                denom = sum(vals.values())
                if denom <= 0:
                    raise DegenerateLawError(f"set {combo}+{b} has zero completion mass")
                for d, v in vals.items():
                    ratio[b, d] = v / denom
            for d in outside:
                col = [ratio[b, d] for b in outside if b != d]
                if len(col) >= 2:
                    r2 = max(r2, max(col) - min(col))
    return Inhomogeneity(r1, r2, n * (r1 + (N - n) * r2))


def uniform_swr_inhomogeneity(N: int, n: int) -> Inhomogeneity:
    """Closed form for uniform subsets: ``r1 = 1/(N-n+1)``, ``r2 = 0``."""
    if not 1 <= n < N:
        raise DomainError("need 1 <= n < N")
    r1 = Fraction(1, N - n + 1)
    return Inhomogeneity(r1, Fraction(0), n * r1)


def weighted_swr_rho_bound(p_max: float, p_min: float, n: int, N: int) -> float:
    """Upper bound ``(r + r^2)/2 * n/(N - n)`` with ``r = p_max / p_min``."""
    if not 0 < p_min <= p_max:
        raise DomainError("need 0 < p_min <= p_max")
    if n >= N:
        raise DomainError("need n < N")
    if n < 0:
        raise DomainError("need n >= 0")
    r = p_max / p_min
    return 0.5 * (r + r * r) * n / (N - n)


def subset_coordinate_model(law: SubsetLaw, max_states: int = 10 ** 7) -> ConditionalModel:
    """Exchangeable ordering of a random subset: ``P(X = x) = mu({x}) / n!``."""
    N, n = law.N, law.n
    if N ** n > max_states:
        raise CapacityError(f"{N}^{n} states exceed {max_states}")
    joint = np.zeros((N,) * n)
    fact = math.factorial(n)
    for combo in itertools.combinations(range(N), n):
        val = float(law.weight(combo)) / fact
        for perm in itertools.permutations(combo):
            joint[perm] = val
    return ConditionalModel.from_joint(joint)


def swr_lemma_matrix_bound(law: SubsetLaw):
    """The bound ``rho`` on both norms of the coordinate model's Dobrushin matrix."""
    return inhomogeneity_exact(law).rho


class LemmaCheck(NamedTuple):
    rho: float
    matrix: InterdependenceMatrix
    holds: bool


def swr_lemma_check(law: SubsetLaw, tol: float = 1e-9) -> LemmaCheck:
    """Compare rho against the exact matrix of the induced coordinate model."""
    rho = float(swr_lemma_matrix_bound(law))
    if law.n == 1:
        mat = InterdependenceMatrix(np.zeros((1, 1)))
    else:
        mat = exact_matrix(subset_coordinate_model(law))
    holds = mat.norm_1 <= rho + tol and mat.norm_inf <= rho + tol
    return LemmaCheck(rho, mat, holds)
