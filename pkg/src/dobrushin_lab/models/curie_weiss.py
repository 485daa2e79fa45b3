"""Curie-Weiss spin model: Glauber dynamics and the exact magnetization law.

Density convention (single inverse temperature)::

    p(sigma) ∝ exp((beta / n) * sum_{i<j} sigma_i sigma_j + h * sum_i sigma_i)

so that ``P(sigma_i = +1 | rest) = r(beta * m_i + h)`` with
``m_i = sum_{j != i} sigma_j / n`` and ``r(t) = 1 / (1 + exp(-2t))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln, logsumexp

from ..dobrushin import ConditionalModel
from ..errors import DomainError
from ..finite_dist import FiniteDistribution

# tolerance for "m >= E m + t" comparisons; keeps tail probabilities
# conservative when a support point sits exactly on a threshold
_EDGE_TOL = 1e-12


def spin_up_probability(t):
    """``r(t) = exp(t) / (exp(t) + exp(-t))``."""
    return expit(2.0 * np.asarray(t, dtype=float))


def local_field(state: np.ndarray, i: int) -> float:
    """``m_i(x) = (1/n) * sum_{j != i} x_j``."""
    n = state.size
    return (float(state.sum()) - float(state[i])) / n


def cw_conditional_up(state: np.ndarray, i: int, beta: float, h: float) -> float:
    return float(spin_up_probability(beta * local_field(state, i) + h))


def n_minus(state: np.ndarray) -> int:
    """Number of ``-1`` spins."""
    return int(np.count_nonzero(np.asarray(state) == -1))


def cw_glauber_step(state: np.ndarray, beta: float, h: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Resample one uniformly chosen spin from its conditional law."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    new = np.array(state, copy=True)
    i = int(rng.integers(new.size))
    p_up = cw_conditional_up(new, i, beta, h)
    new[i] = 1 if rng.random() < p_up else -1
    return new


def cw_glauber_chains(n: int, beta: float, h: float, chains: int, samples: int,
                      rng: np.random.Generator, burn_in: int | None = None,
                      thin: int | None = None, x0: np.ndarray | None = None) -> np.ndarray:
    """Run ``chains`` independent Glauber chains in lock-step.

    Returns the spin sums ``sum_i sigma_i`` with shape ``(chains, samples)``.
    ``burn_in`` and ``thin`` count single-site updates and default to
    ``100 n`` and ``n``.
    """
    burn_in = 100 * n if burn_in is None else burn_in
    thin = n if thin is None else thin
    if x0 is None:
        x = rng.choice(np.array([-1, 1], dtype=np.int8), size=(chains, n))
    else:
        x = np.broadcast_to(np.asarray(x0, dtype=np.int8), (chains, n)).copy()
    s = x.sum(axis=1, dtype=np.int64)
    rows = np.arange(chains)
    out = np.empty((chains, samples), dtype=np.int64)

    def step():
        nonlocal s
        i = rng.integers(n, size=chains)
        xi = x[rows, i].astype(np.int64)
        field = beta * (s - xi) / n + h
        new = np.where(rng.random(chains) < spin_up_probability(field), 1, -1)
        s = s + new - xi
        x[rows, i] = new

    for _ in range(burn_in):
        step()
    for k in range(samples):
        for _ in range(thin):
            step()
        out[:, k] = s
    return out


@dataclass(frozen=True, eq=False)
class MagnetizationLaw:
    """Exact law of the spin sum ``k = sum_i sigma_i`` on ``{-n, -n+2, ..., n}``."""

    n: int
    sums: np.ndarray
    dist: FiniteDistribution

    @property
    def probs(self) -> np.ndarray:
        return self.dist.as_float()

    @property
    def magnetizations(self) -> np.ndarray:
        return self.sums / self.n

    @property
    def mean_m(self) -> float:
        return float(self.probs @ self.magnetizations)

    @property
    def mean_n_minus(self) -> float:
        return float(self.probs @ ((self.n - self.sums) / 2))

    def upper_tail(self, t) -> np.ndarray:
        """``P(m >= E m + t)`` for each threshold."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        m = self.magnetizations
        mask = m[None, :] >= self.mean_m + t[:, None] - _EDGE_TOL
        return mask @ self.probs

    def lower_tail(self, t) -> np.ndarray:
        """``P(m <= E m - t)`` for each threshold."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        m = self.magnetizations
        mask = m[None, :] <= self.mean_m - t[:, None] + _EDGE_TOL
        return mask @ self.probs

    def sample_sums(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.sums, size=size, p=self.probs)

    def sample_configurations(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Exact configuration draws: the law is exchangeable given the sum."""
        k = self.sample_sums(rng, size)
        ups = (self.n + k) // 2
        keys = rng.random((size, self.n))
        ranks = keys.argsort(axis=1).argsort(axis=1)
        return np.where(ranks < ups[:, None], 1, -1).astype(np.int8)


def cw_exact_magnetization_law(n: int, beta: float, h: float) -> MagnetizationLaw:
    """``P(sum = k) ∝ C(n, (n+k)/2) exp(beta (k^2 - n) / (2n) + h k)``, in log space."""
    if n < 1:
        raise DomainError("n must be positive")
    if n > 10 ** 4:
        raise DomainError("n above 10^4 is outside the supported range")
    ups = np.arange(n + 1)
    k = 2 * ups - n
    log_binom = gammaln(n + 1) - gammaln(ups + 1) - gammaln(n - ups + 1)
    logw = log_binom + beta * (k.astype(float) ** 2 - n) / (2.0 * n) + h * k
    probs = np.exp(logw - logsumexp(logw))
    probs /= probs.sum()
    return MagnetizationLaw(n, k, FiniteDistribution(probs))


def curie_weiss_model(n: int, beta: float, h: float) -> ConditionalModel:
    """Conditional model on alphabet index ``{0, 1}`` standing for spins ``{-1, +1}``."""

    def conditional(i, x):
        spins = 2 * np.asarray(x) - 1
        p = cw_conditional_up(spins, i, beta, h)
        return np.array([1.0 - p, p])

    return ConditionalModel((2,) * n, conditional)
