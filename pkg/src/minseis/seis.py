"""SEIS-cluster infection dynamics and worst-case solution evaluation.

A node cycles susceptible -> exposed -> infected -> susceptible. Infected
nodes try to expose each susceptible neighbour once per step, with
probability ``chi[c]`` when both sit in community ``c`` and ``phi``
otherwise. Exposure lasts ``epsilon`` steps and infection ``lam`` steps.
A solution is a set of edge ids whose edges are masked out; its quality is
the worst, over replications, of the infected count summed over
``t = 1..horizon``.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernel
from .netio import Graph
from .validation import check_generator, check_positive_int, check_probability

Solution = frozenset  # of 1-based edge ids


@dataclass(frozen=True)
class EpidemicParams:
    """Model parameters for one problem instance.

    ``chi`` is either one probability shared by every community or a
    sequence with one entry per community (index 0 is community 1).
    ``lam`` is the infectious duration (``lambda`` is reserved).
    """

    initial_infected: frozenset[int]
    chi: float | tuple[float, ...] = 0.15
    phi: float = 0.05
    epsilon: int = 2
    lam: int = 4
    horizon: int = 100
    replications: int = 20

    def __post_init__(self):
        object.__setattr__(self, "initial_infected", frozenset(int(v) for v in self.initial_infected))
        if not self.initial_infected:
            raise ValueError("initial_infected must be non-empty")
        if isinstance(self.chi, numbers.Real):
            check_probability("chi", self.chi)
        else:
            object.__setattr__(self, "chi", tuple(check_probability("chi", c) for c in self.chi))
        check_probability("phi", self.phi)
        check_positive_int("epsilon", self.epsilon)
        check_positive_int("lam", self.lam)
        check_positive_int("horizon", self.horizon)
        check_positive_int("replications", self.replications)

    def chi_table(self, graph: Graph) -> np.ndarray:
        n_comm = max(graph.num_communities, 1)
        if isinstance(self.chi, tuple):
            if len(self.chi) < n_comm:
                raise ValueError(f"chi has {len(self.chi)} entries but the graph has {n_comm} communities")
            return np.asarray(self.chi[:n_comm], dtype=np.float64)
        return np.full(n_comm, float(self.chi))

    def check_against(self, graph: Graph) -> None:
        outside = sorted(v for v in self.initial_infected if not 1 <= v <= graph.num_nodes)
        if outside:
            raise ValueError(f"initial infected nodes {outside} not in 1..{graph.num_nodes}")
        self.chi_table(graph)


@dataclass
class SimState:
    """Compartments at a step boundary; the two dicts map node -> expiry time."""

    susceptibles: set[int]
    exposeds: dict[int, int] = field(default_factory=dict)
    infecteds: dict[int, int] = field(default_factory=dict)
    t: int = 0

    def counts(self) -> tuple[int, int, int]:
        return len(self.susceptibles), len(self.exposeds), len(self.infecteds)


def init_state(graph: Graph, params: EpidemicParams) -> SimState:
    # seeds get the same lifetime an exposed node gets on conversion, counted from t=0
    params.check_against(graph)
    seeds = params.initial_infected
    return SimState(
        susceptibles=set(range(1, graph.num_nodes + 1)) - seeds,
        exposeds={},
        infecteds={v: params.lam for v in seeds},
        t=0,
    )


def step(state: SimState, graph: Graph, removed: Iterable[int], params: EpidemicParams,
         rng, t: int) -> SimState:
    """Advance ``state`` in place to time ``t`` and return it.

    ``rng`` only needs a ``random()`` method. Nodes are visited in ascending
    id order, so a node that recovers early in the sweep can be re-exposed by
    a higher-id neighbour within the same step.
    """
    removed = removed if isinstance(removed, (set, frozenset)) else set(removed)
    chi = params.chi_table(graph)
    community = graph.community
    sus, exp_, inf = state.susceptibles, state.exposeds, state.infecteds

    for node in sorted(inf):
        if inf[node] <= t:
            del inf[node]
            sus.add(node)
            continue
        c_node = community[node - 1] if community else 1
        for target, eid in graph.adjacency[node]:
            if eid in removed or target not in sus:
                continue
            c_target = community[target - 1] if community else 1
            chance = chi[c_target - 1] if c_target == c_node else params.phi
            if rng.random() < chance:
                sus.discard(target)
                exp_[target] = t + params.epsilon

    for node in sorted(exp_):
        if exp_[node] <= t:
            del exp_[node]
            inf[node] = t + params.lam

    state.t = t
    return state


def removal_mask(graph: Graph, removed: Iterable[int]) -> np.ndarray:
    ids = np.fromiter((int(e) for e in removed), dtype=np.int64)
    if ids.size and (ids.min() < 1 or ids.max() > graph.num_edges):
        raise ValueError(f"edge ids must lie in 1..{graph.num_edges}")
    mask = np.zeros(graph.num_edges, dtype=np.bool_)
    mask[ids - 1] = True
    return mask


def replication_seeds(rng: np.random.Generator, replications: int) -> np.ndarray:
    """One 64-bit generator seed per replication, drawn from ``rng``."""
    return rng.integers(0, 2**64, size=replications, dtype=np.uint64)


def replication_values(graph: Graph, removed: Iterable[int], params: EpidemicParams,
                       rng=None) -> np.ndarray:
    """Infected count summed over ``t = 1..horizon`` for every replication."""
    rng = check_generator(rng)
    params.check_against(graph)
    mask = removal_mask(graph, removed)
    indptr, indices, edge_index = graph.csr
    seeds = np.asarray(sorted(params.initial_infected), dtype=np.int64) - 1
    return _kernel.replicate(
        indptr, indices, edge_index, graph.community_array() - 1, mask,
        params.chi_table(graph), float(params.phi), params.epsilon, params.lam,
        params.horizon, seeds, replication_seeds(rng, params.replications))


def evaluate(graph: Graph, removed: Iterable[int], params: EpidemicParams, rng=None) -> int:
    """Worst (largest) summed infected count over ``params.replications`` runs."""
    return int(replication_values(graph, removed, params, rng).max())


def simulate(graph: Graph, removed: Iterable[int], params: EpidemicParams,
             seed: int) -> list[tuple[int, int, int, int]]:
    """Single replication through :func:`step`; rows of ``(t, S, E, I)`` after each step.

    ``seed`` is the replication's generator seed, so the summed infected
    column equals what :func:`replication_values` reports for it.
    """
    state = init_state(graph, params)
    removed = set(removed)
    rs = _kernel.SplitMix64(seed)
    rows = []
    for t in range(1, params.horizon + 1):
        step(state, graph, removed, params, rs, t)
        rows.append((t, *state.counts()))
    return rows


def random_edge_ids(num_edges: int, k: int, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= k <= num_edges:
        raise ValueError(f"k={k} outside 0..{num_edges}")
    return rng.choice(num_edges, size=k, replace=False).astype(np.int64) + 1


def random_solution(graph: Graph, k: int, rng=None) -> Solution:
    """``k`` distinct edge ids drawn uniformly without replacement."""
    return frozenset(int(e) for e in random_edge_ids(graph.num_edges, k, check_generator(rng)))


def check_solution(graph: Graph, removed: Sequence[int] | frozenset, k: int | None = None) -> Solution:
    sol = frozenset(int(e) for e in removed)
    if len(sol) != len(list(removed)):
        raise ValueError("solution repeats an edge id")
    removal_mask(graph, sol)
    if k is not None and len(sol) != k:
        raise ValueError(f"solution removes {len(sol)} edges, expected k={k}")
    return sol
