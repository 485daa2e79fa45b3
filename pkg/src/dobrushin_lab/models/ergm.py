"""Edge-triangle exponential random graphs and subgraph counting.

Graphs on ``n`` vertices are edge-indicator vectors of length ``n(n-1)/2`` in
upper-triangle order ``(0,1), (0,2), ..., (0,n-1), (1,2), ...``.  The
two-parameter model has density proportional to

    exp(2 * beta1 * E + (6 * beta2 / n) * Delta)

with E the edge count and Delta the triangle count.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from ..dobrushin import ConditionalModel
from ..errors import DimensionError, DomainError


@lru_cache(maxsize=None)
def edge_pairs(n: int) -> tuple:
    return tuple(itertools.combinations(range(n), 2))


@lru_cache(maxsize=None)
def _slot_table(n: int) -> np.ndarray:
    table = -np.ones((n, n), dtype=np.int64)
    for s, (i, j) in enumerate(edge_pairs(n)):
        table[i, j] = table[j, i] = s
    return table


def edge_slot(i: int, j: int, n: int) -> int:
    if i == j:
        raise DomainError("no self loops")
    return int(_slot_table(n)[i, j])


@dataclass(frozen=True, eq=False)
class EdgeGraph:
    n_vertices: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.uint8).copy()
        if e.shape != (self.n_vertices * (self.n_vertices - 1) // 2,):
            raise DimensionError("edge vector length must be n(n-1)/2")
        if np.any(e > 1):
            raise DomainError("edge indicators must be 0/1")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def empty(cls, n: int) -> "EdgeGraph":
        return cls(n, np.zeros(n * (n - 1) // 2))

    @classmethod
    def complete(cls, n: int) -> "EdgeGraph":
        return cls(n, np.ones(n * (n - 1) // 2))

    @classmethod
    def from_edge_list(cls, n: int, pairs) -> "EdgeGraph":
        e = np.zeros(n * (n - 1) // 2)
        for i, j in pairs:
            e[edge_slot(i, j, n)] = 1
        return cls(n, e)

    @classmethod
    def cycle(cls, n: int) -> "EdgeGraph":
        return cls.from_edge_list(n, [(k, (k + 1) % n) for k in range(n)])

    def adjacency(self) -> np.ndarray:
        n = self.n_vertices
        a = np.zeros((n, n), dtype=np.uint8)
        iu = np.triu_indices(n, 1)
        a[iu] = self.edges
        return a | a.T

    def with_edge(self, slot: int, value: int) -> "EdgeGraph":
        e = self.edges.copy()
        e[slot] = value
        return EdgeGraph(self.n_vertices, e)

    @property
    def edge_count(self) -> int:
        return int(self.edges.sum())


@dataclass(frozen=True)
class GraphMotif:
    """A small pattern graph given by its vertex count and edge list."""

    n_vertices: int
    edges: tuple

    def __post_init__(self):
        if self.n_vertices < 2 or not self.edges:
            raise DomainError("motif needs at least 2 vertices and 1 edge")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def triangle(cls) -> "GraphMotif":
        return cls(3, ((0, 1), (0, 2), (1, 2)))

    @classmethod
    def single_edge(cls) -> "GraphMotif":
        return cls(2, ((0, 1),))

    @classmethod
    def two_star(cls) -> "GraphMotif":
        return cls(3, ((0, 1), (0, 2)))

    @classmethod
    def four_cycle(cls) -> "GraphMotif":
        return cls(4, ((0, 1), (1, 2), (2, 3), (0, 3)))


def motif_copies(g: EdgeGraph, motif: GraphMotif):
    """Yield ``(vertex_subset, embedded_edge_slots)`` for every copy of ``motif``.

    A copy is a vertex subset of size ``n_S`` whose induced subgraph contains
    the motif; the embedding reported is the first one in lexicographic order
    of vertex assignments.
    """
    n = g.n_vertices
    if motif.n_vertices > n:
        raise DomainError("motif has more vertices than the host graph")
    adj = g.adjacency()
    slots = _slot_table(n)
    for subset in itertools.combinations(range(n), motif.n_vertices):
        for perm in itertools.permutations(subset):
            if all(adj[perm[u], perm[v]] for u, v in motif.edges):
                yield subset, tuple(int(slots[perm[u], perm[v]]) for u, v in motif.edges)
                break


def subgraph_count(g: EdgeGraph, motif: GraphMotif) -> int:
    """Number of vertex subsets whose induced subgraph contains ``motif``."""
    if motif.n_vertices > 5:
        raise DomainError("subgraph counting is limited to motifs with <= 5 vertices")
    return sum(1 for _ in motif_copies(g, motif))


def triangle_counts(adj: np.ndarray) -> np.ndarray:
    """Triangle counts ``trace(A^3) / 6`` for a stack of adjacency matrices."""
    a = np.asarray(adj, dtype=np.int64)
    a2 = a @ a
    return np.einsum("...ij,...ji->...", a2, a) // 6


def common_neighbours(g: EdgeGraph, slot: int) -> int:
    i, j = edge_pairs(g.n_vertices)[slot]
    adj = g.adjacency()
    return int(np.dot(adj[i].astype(np.int64), adj[j]))


def ergm_log_weight(g: EdgeGraph, beta1, beta2):
    """``2 beta1 E + (6 beta2 / n) Delta``; exact for Fraction parameters."""
    tri = int(triangle_counts(g.adjacency()))
    return 2 * beta1 * g.edge_count + 6 * beta2 * tri / g.n_vertices


def ergm_log_odds(g: EdgeGraph, slot: int, beta1, beta2):
    """Conditional log-odds of the edge in ``slot`` being present."""
    return 2 * beta1 + 6 * beta2 * common_neighbours(g, slot) / g.n_vertices


def ergm_conditional_prob(g: EdgeGraph, slot: int, beta1: float, beta2: float,
                          delta_stat: Optional[Callable] = None) -> float:
    """``P(edge present | other edges)``.

    ``delta_stat(adj, i, j)``, if given, replaces the edge-triangle log-odds
    with the change of ``sum_k beta_k T_k`` when edge ``(i, j)`` is switched on,
    which covers any family of the form ``exp(sum_k beta_k T_k(G))``.
    """
    if delta_stat is None:
        return float(expit(float(ergm_log_odds(g, slot, beta1, beta2))))
    i, j = edge_pairs(g.n_vertices)[slot]
    adj = g.adjacency()
    adj[i, j] = adj[j, i] = 0
    return float(expit(float(delta_stat(adj, i, j))))


def ergm_glauber_step(g: EdgeGraph, beta1: float, beta2: float, rng: np.random.Generator,
                      delta_stat: Optional[Callable] = None) -> EdgeGraph:
    slot = int(rng.integers(g.edges.size))
    p = ergm_conditional_prob(g, slot, beta1, beta2, delta_stat)
    return g.with_edge(slot, int(rng.random() < p))


def ergm_glauber_chains(n: int, beta1: float, beta2: float, chains: int, samples: int,
                        rng: np.random.Generator, burn_in: int | None = None,
                        thin: int | None = None) -> np.ndarray:
    """Lock-step Glauber chains for the edge-triangle model.

    Returns adjacency samples of shape ``(chains, samples, n, n)`` (uint8).
    ``burn_in``/``thin`` count single-edge updates; defaults are 50 and 1
    sweeps over the ``n(n-1)/2`` slots.
    """
    m = n * (n - 1) // 2
    burn_in = 50 * m if burn_in is None else burn_in
    thin = m if thin is None else thin
    pairs = np.array(edge_pairs(n))
    p0 = float(expit(2 * beta1))
    adj = np.zeros((chains, n, n), dtype=np.uint8)
    init = (rng.random((chains, m)) < p0).astype(np.uint8)
    adj[:, pairs[:, 0], pairs[:, 1]] = init
    adj[:, pairs[:, 1], pairs[:, 0]] = init
    rows = np.arange(chains)
    coef = 6.0 * beta2 / n
    out = np.empty((chains, samples, n, n), dtype=np.uint8)

    def step():
        s = rng.integers(m, size=chains)
        i, j = pairs[s, 0], pairs[s, 1]
        cn = np.einsum("ck,ck->c", adj[rows, i].astype(np.int64), adj[rows, j])
        val = (rng.random(chains) < expit(2 * beta1 + coef * cn)).astype(np.uint8)
        adj[rows, i, j] = val
        adj[rows, j, i] = val

    for _ in range(burn_in):
        step()
    for k in range(samples):
        for _ in range(thin):
            step()
        out[:, k] = adj
    return out


def ergm_conditional_model(n: int, beta1: float, beta2: float) -> ConditionalModel:
    """Edge-indicator conditional model with its local dependency structure.

    The conditional of edge ``(i, j)`` depends only on the edges that share a
    vertex with it, which keeps exact matrix computation feasible.
    """
    pairs = edge_pairs(n)
    slots = _slot_table(n)
    deps = []
    for i, j in pairs:
        d = [int(slots[i, k]) for k in range(n) if k not in (i, j)]
        d += [int(slots[j, k]) for k in range(n) if k not in (i, j)]
        deps.append(tuple(sorted(d)))
    coef = 6.0 * beta2 / n

    def conditional(s, x):
        i, j = pairs[s]
        cn = 0
        for k in range(n):
            if k != i and k != j and x[slots[i, k]] and x[slots[j, k]]:
                cn += 1
        p = float(expit(2 * beta1 + coef * cn))
        return np.array([1.0 - p, p])

    return ConditionalModel((2,) * len(pairs), conditional, tuple(deps))


def ergm_matrix_entry_bound(n: int, beta1: float, beta2: float) -> float:
    """Largest possible change of an edge's conditional when one adjacent edge flips."""
    coef = 6.0 * beta2 / n
    vals = expit(2 * beta1 + coef * np.arange(n - 1))
    return float(np.abs(np.diff(vals)).max()) if n > 2 else 0.0


def binomial_scale(n: int, motif: GraphMotif) -> int:
    """``C(n-2, n_S-2)``: copies of a motif that can share a given vertex pair."""
    return math.comb(n - 2, motif.n_vertices - 2)
