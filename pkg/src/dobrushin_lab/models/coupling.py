"""Two Glauber chains driven by a shared site choice and a q-coupling.

At each step a site ``I`` is chosen uniformly.  A random unit vector ``xi``
equals ``e_i`` with probability ``a[I, i]`` (and is zero otherwise), and the
indicator ``chi = <xi, L>`` decides whether the two chains update ``I`` from a
shared draw or from the split draws of the q-coupling with
``q = sum_i a[I, i] L_i``.  Under a valid interdependence matrix this keeps
each chain a Glauber chain while ``E|L(k)|_1`` contracts geometrically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..dobrushin import ConditionalModel, InterdependenceMatrix
from ..errors import DimensionError, DomainError, InfeasibleCouplingError
from ..finite_dist import FiniteDistribution, _draw, coupling_components, tv_distance

_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CoupledChainState:
    x: np.ndarray
    y: np.ndarray
    disagreement: np.ndarray = field(init=False)
    step: int = 0

    def __post_init__(self):
        x = np.asarray(self.x).copy()
        y = np.asarray(self.y).copy()
        if x.shape != y.shape:
            raise DimensionError("chains must share a shape")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "disagreement", (x != y).astype(np.int8))

    @property
    def distance(self) -> int:
        return int(self.disagreement.sum())


def _law(model: ConditionalModel, i: int, state) -> FiniteDistribution:
    out = model.conditional(i, tuple(int(v) for v in state))
    if out is None:
        raise DomainError("chain entered a zero-probability state")
    if isinstance(out, FiniteDistribution):
        return out
    return FiniteDistribution(np.asarray(out, dtype=float))


def coupled_step(model: ConditionalModel, A: InterdependenceMatrix, state: CoupledChainState,
                 rng: np.random.Generator) -> CoupledChainState:
    n = model.n
    a = A.entries
    L = state.disagreement
    site = int(rng.integers(n))
    row = a[site]
    # xi = e_j with probability a[site, j]; index n stands for xi = 0
    u = rng.random()
    j = int(np.searchsorted(np.cumsum(row), u, side="right"))
    chi = int(L[j]) if j < n else 0
    q = float(row @ L)
    px = _law(model, site, state.x)
    py = _law(model, site, state.y)
    tv = float(tv_distance(px, py))
    if q < tv - _TOL:
        raise InfeasibleCouplingError(
            f"site {site}: q = {q:.6g} below tv = {tv:.6g}; matrix is not valid for the model")
    mu_b, mu_c, mu_d = coupling_components(px, py, min(max(q, tv), 1.0))
    x = state.x.copy()
    y = state.y.copy()
    if chi == 0:
        b = _draw(mu_b, rng)
        x[site] = y[site] = b
    else:
        x[site] = _draw(mu_c, rng)
        y[site] = _draw(mu_d, rng)
    return CoupledChainState(x, y, step=state.step + 1)


def coupled_glauber_run(model: ConditionalModel, A: InterdependenceMatrix, x0, y0, steps: int,
                        rng: np.random.Generator, record_states: bool = False):
    """Run the coupled pair for ``steps`` updates.

    Returns ``(distances, states)`` where ``distances[k] = |L(k)|_1`` for
    ``k = 0..steps`` and ``states`` is the list of ``CoupledChainState`` (only
    when ``record_states``; otherwise just the final state).
    """
    if A.n != model.n:
        raise DimensionError("matrix size does not match the model")
    if A.norm_inf > 1.0 + _TOL:
        raise DomainError("row sums of A must not exceed 1")
    state = CoupledChainState(np.asarray(x0), np.asarray(y0))
    dist = np.empty(steps + 1, dtype=np.int64)
    dist[0] = state.distance
    states = [state] if record_states else None
    for k in range(steps):
        state = coupled_step(model, A, state, rng)
        dist[k + 1] = state.distance
        if record_states:
            states.append(state)
    return dist, (states if record_states else [state])


def curie_weiss_coupled_runs(n: int, beta: float, h: float, runs: int, steps: int,
                             rng: np.random.Generator, x0=None, y0=None) -> np.ndarray:
    """Vectorized coupled Curie-Weiss chains with the matrix ``a_ij = beta/n``.

    Returns ``|L(k)|_1`` with shape ``(runs, steps + 1)``.  Defaults start
    from all ``+1`` against all ``-1``.
    """
    x = np.ones((runs, n), dtype=np.int64) if x0 is None else np.broadcast_to(x0, (runs, n)).astype(np.int64)
    y = -np.ones((runs, n), dtype=np.int64) if y0 is None else np.broadcast_to(y0, (runs, n)).astype(np.int64)
    x = x.copy()
    y = y.copy()
    rows = np.arange(runs)
    a = beta / n
    out = np.empty((runs, steps + 1), dtype=np.int64)
    out[:, 0] = (x != y).sum(axis=1)
    sx = x.sum(axis=1)
    sy = y.sum(axis=1)
    for k in range(steps):
        site = rng.integers(n, size=runs)
        # xi: pick j != site uniformly, keep it with probability beta (n-1)/n
        j = rng.integers(n - 1, size=runs)
        j = j + (j >= site)
        keep = rng.random(runs) < a * (n - 1)
        L = x != y
        chi = keep & L[rows, j]
        q = a * (L.sum(axis=1) - L[rows, site])
        xi_old = x[rows, site]
        yi_old = y[rows, site]
        px = expit(2.0 * (beta * (sx - xi_old) / n + h))
        py = expit(2.0 * (beta * (sy - yi_old) / n + h))
        lo = np.minimum(px, py)
        tv = np.abs(px - py)
        if np.any(q < tv - _TOL):
            raise InfeasibleCouplingError("q below tv in Curie-Weiss coupling")
        u = rng.random(runs)
        shared = np.where(u < lo / (1.0 - tv), 1, -1)
        qs = np.where(q > 0, q, 1.0)
        cx = np.clip((lo * (q - 1.0) / (1.0 - tv) + px) / qs, 0.0, 1.0)
        cy = np.clip((lo * (q - 1.0) / (1.0 - tv) + py) / qs, 0.0, 1.0)
        v1 = rng.random(runs)
        v2 = rng.random(runs)
        new_x = np.where(chi, np.where(v1 < cx, 1, -1), shared)
        new_y = np.where(chi, np.where(v2 < cy, 1, -1), shared)
        x[rows, site] = new_x
        y[rows, site] = new_y
        sx += new_x - xi_old
        sy += new_y - yi_old
        out[:, k + 1] = (x != y).sum(axis=1)
    return out


def disagreement_bound(initial: float, norm1: float, n: int, k) -> np.ndarray:
    """``|L(0)|_1 (1 - (1 - |A|_1)/n)^k``, the contraction of the expected distance."""
    return initial * (1.0 - (1.0 - norm1) / n) ** np.asarray(k, dtype=float)
