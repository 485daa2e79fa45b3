"""Finite distributions, total variation distance and the q-coupling.

All routines accept either float probabilities or ``fractions.Fraction``
entries; with fractions every operation below is exact, which is what the
marginal checks in the test-suite rely on.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InfeasibleCouplingError

PROB_TOL = 1e-12


def _as_prob_array(probs) -> np.ndarray:
    arr = np.asarray(probs)
    if arr.dtype == object:
        return arr.copy()
    return np.asarray(arr, dtype=float).copy()


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability vector over the alphabet ``{0, ..., support_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_prob_array(self.probs)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError("probs must be a non-empty 1-d vector")
        if any(p < 0 for p in arr):
            raise DomainError("probabilities must be nonnegative")
        if abs(sum(arr) - 1) > PROB_TOL:
            raise DomainError(f"probabilities sum to {sum(arr)}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def support_size(self) -> int:
        return int(self.probs.size)

    @property
    def is_exact(self) -> bool:
        return self.probs.dtype == object

    @classmethod
    def bernoulli(cls, p) -> "FiniteDistribution":
        """Law on {0, 1} with mass ``p`` at 1."""
        return cls(np.array([1 - p, p], dtype=object if isinstance(p, Fraction) else float))

    @classmethod
    def point_mass(cls, k: int, size: int) -> "FiniteDistribution":
        probs = np.zeros(size)
        probs[k] = 1.0
        return cls(probs)

    @classmethod
    def from_weights(cls, weights) -> "FiniteDistribution":
        w = _as_prob_array(weights)
        total = sum(w)
        if total <= 0:
            raise DomainError("weights must have positive total")
        return cls(w / total)

    def as_float(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.support_size, p=self.as_float()))


@dataclass(frozen=True, eq=False)
class CouplingTable:
    """Joint law of (X, Y) indexed by ``joint[x, y]``, built with budget ``q``."""

    joint: np.ndarray
    q: float

    @property
    def row_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def off_diagonal_mass(self):
        return self.joint.sum() - np.trace(self.joint)


def _check_same_support(p: FiniteDistribution, q: FiniteDistribution) -> None:
    if p.support_size != q.support_size:
        raise DimensionError(
            f"support sizes differ: {p.support_size} vs {q.support_size}")


def tv_distance(p: FiniteDistribution, q: FiniteDistribution):
    """Total variation distance, ``sum |p_i - q_i| / 2``."""
    _check_same_support(p, q)
    diff = sum(abs(a - b) for a, b in zip(p.probs, q.probs))
    if p.is_exact and q.is_exact:
        return Fraction(diff) / 2
    return min(1.0, float(diff) / 2.0)


def coupling_components(p: FiniteDistribution, q_dist: FiniteDistribution, q):
    """Laws of the shared draw B and the split draws C, D for budget ``q``.

    Returns ``(mu_b, mu_c, mu_d)``. ``mu_b`` is None when the chains can never
    agree (tv = 1, which forces q = 1) and ``mu_c``/``mu_d`` are None when
    q = 0. Otherwise ``(1 - q) mu_b + q mu_c = p`` and likewise for ``mu_d``.
    """
    _check_same_support(p, q_dist)
    if q > 1:
        raise DomainError(f"q = {q} exceeds 1")
    tv = tv_distance(p, q_dist)
    if q < tv - PROB_TOL:
        raise InfeasibleCouplingError(f"q = {q} is below the tv distance {tv}")

    f = p.probs
    g = q_dist.probs
    h = np.array([min(a, b) for a, b in zip(f, g)], dtype=f.dtype if f.dtype == g.dtype else float)
    one_minus_tv = 1 - tv

    mu_b = None if one_minus_tv <= PROB_TOL else h / one_minus_tv
    if q <= 0:
        return mu_b, None, None
    if mu_b is None:
        # tv = 1: h vanishes identically
        return None, f.copy(), g.copy()
    scale = (q - 1) / one_minus_tv
    mu_c = (h * scale + f) / q
    mu_d = (h * scale + g) / q
    if mu_c.dtype != object:
        # clip round-off below zero (exact mass is nonnegative)
        mu_c = np.clip(mu_c, 0.0, None)
        mu_d = np.clip(mu_d, 0.0, None)
    return mu_b, mu_c, mu_d


def build_coupling(p: FiniteDistribution, q_dist: FiniteDistribution, q) -> CouplingTable:
    """Joint table of ``X = (1-chi) B + chi C``, ``Y = (1-chi) B + chi D``.

    chi ~ Bernoulli(q) and B, C, D are independent, so

        joint = (1 - q) diag(mu_B) + q outer(mu_C, mu_D).

    Any ``q`` in ``[tv(p, q_dist), 1]`` is accepted; ``q = tv`` yields a
    maximal coupling and ``q = 1`` the product coupling.
    """
    mu_b, mu_c, mu_d = coupling_components(p, q_dist, q)
    k = p.support_size
    exact = p.is_exact and q_dist.is_exact and not isinstance(q, float)
    dtype = object if exact else float
    joint = np.zeros((k, k), dtype=dtype)
    if exact:
        joint[...] = Fraction(0)
    if mu_b is not None and q < 1:
        joint += np.diag(mu_b.astype(dtype)) * (1 - q)
    if mu_c is not None:
        joint += np.outer(mu_c.astype(dtype), mu_d.astype(dtype)) * q
    return CouplingTable(joint=joint, q=q)


def sample_coupling(p: FiniteDistribution, q_dist: FiniteDistribution, q,
                    rng: np.random.Generator, chi: Optional[int] = None) -> tuple[int, int]:
    """Draw one (X, Y) pair from the q-coupling.

    ``chi`` may be supplied by the caller when the disagreement indicator is
    produced by an outer construction (it must then be Bernoulli(q)).
    """
    mu_b, mu_c, mu_d = coupling_components(p, q_dist, q)
    if chi is None:
        chi = int(rng.random() < float(q))
    if chi == 0:
        if mu_b is None:
            raise InfeasibleCouplingError("chi = 0 is impossible when tv = 1")
        b = _draw(mu_b, rng)
        return b, b
    if mu_c is None:
        raise InfeasibleCouplingError("chi = 1 is impossible when q = 0")
    return _draw(mu_c, rng), _draw(mu_d, rng)


def _draw(weights: Sequence, rng: np.random.Generator) -> int:
    w = np.asarray(weights, dtype=float)
    return int(rng.choice(w.size, p=w / w.sum()))
