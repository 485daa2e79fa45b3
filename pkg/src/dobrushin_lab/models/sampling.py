"""Weighted and uniform sampling without replacement."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True, eq=False)
class IndexSample:
    """Ordered draw of ``n`` distinct indices from ``range(N)``."""

    N: int
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if np.unique(idx).size != idx.size:
            raise DomainError("indices must be distinct")
        if idx.size and (idx.min() < 0 or idx.max() >= self.N):
            raise DomainError("indices out of range")
        object.__setattr__(self, "indices", idx)

    @property
    def as_set(self) -> frozenset:
        return frozenset(int(i) for i in self.indices)


def _check_weights(p, n: int) -> np.ndarray:
    w = np.asarray(p, dtype=float)
    if w.ndim != 1:
        raise DomainError("weights must be a vector")
    if np.any(w <= 0):
        raise DomainError("all weights must be strictly positive")
    if not 0 <= n <= w.size:
        raise DomainError("need 0 <= n <= N")
    return w


def weighted_swr_sample(p, n: int, rng: np.random.Generator,
                        method: str = "sequential") -> IndexSample:
    """Draw ``n`` indices, each chosen with probability proportional to ``p``
    among those not yet drawn.

    ``method="clocks"`` instead takes the ``n`` smallest of independent
    exponential variables with rates ``p``; the two give the same law.
    """
    w = _check_weights(p, n)
    N = w.size
    if method == "sequential":
        alive = np.ones(N, dtype=bool)
        out = np.empty(n, dtype=np.int64)
        for k in range(n):
            ww = np.where(alive, w, 0.0)
            i = int(rng.choice(N, p=ww / ww.sum()))
            out[k] = i
            alive[i] = False
        return IndexSample(N, out)
    if method == "clocks":
        clocks = rng.exponential(size=N) / w
        return IndexSample(N, np.argsort(clocks, kind="stable")[:n])
    raise DomainError(f"unknown method {method!r}")


def weighted_swr_batch(p, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent draws via exponential clocks, shape ``(size, n)``."""
    w = _check_weights(p, n)
    clocks = rng.exponential(size=(size, w.size)) / w
    return np.argsort(clocks, axis=1, kind="stable")[:, :n]


def uniform_swr_batch(N: int, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform ordered samples without replacement, shape ``(size, n)``."""
    if not 0 <= n <= N:
        raise DomainError("need 0 <= n <= N")
    keys = rng.random((size, N))
    return np.argsort(keys, axis=1, kind="stable")[:, :n]


def sequential_set_probability(p: Sequence, subset: Sequence[int]):
    """Probability that the sequential scheme returns ``subset`` (any order).

    Sums the product of successive conditional probabilities over all
    orderings; exact when ``p`` holds Fractions.
    """
    total = 0
    full = sum(p)
    for order in itertools.permutations(subset):
        prob, remaining = 1, full
        for i in order:
            prob = prob * p[i] / remaining
            remaining = remaining - p[i]
        total += prob
    return total


def clocks_set_probability(p: Sequence, subset: Sequence[int]):
    """Probability that ``subset`` holds the ``|subset|`` smallest exponential clocks.

    With ``c`` the total rate outside the subset,
    ``P = c * sum_{T subset} (-1)^{|T|} / (p_T + c)`` by integrating the
    joint clock density directly (no reference to the sequential scheme).
    """
    inside = [p[i] for i in subset]
    c = sum(p) - sum(inside)
    if c == 0:
        return Fraction(1) if isinstance(c, Fraction) else 1.0
    total = 0
    for r in range(len(inside) + 1):
        for T in itertools.combinations(inside, r):
            total += (-1) ** r / (sum(T) + c)
    return c * total
