"""Estimator plumbing shared by the edge-removal searches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .netio import Graph
from .seis import EpidemicParams, Solution, evaluate
from .validation import (ceil_fraction, check_fraction, check_generator, check_graph,
                         resolve_k)


@dataclass(frozen=True)
class SearchResult:
    best_solution: Solution
    best_value: int
    trace: tuple[int, ...]

    def __post_init__(self):
        if self.trace and self.trace[-1] != self.best_value:
            raise ValueError("best_value must equal the last trace entry")


def seed_nodes(num_nodes: int, fraction: float, rng: np.random.Generator) -> frozenset[int]:
    """``ceil(fraction * num_nodes)`` distinct nodes, uniformly at random."""
    m = ceil_fraction(check_fraction("initial_fraction", fraction), num_nodes)
    if m == 0:
        raise ValueError("initial_fraction selects no node")
    return frozenset(int(v) + 1 for v in rng.choice(num_nodes, size=m, replace=False))


class BaseEdgeRemoval(TransformerMixin, BaseEstimator):
    """Common parameters and the fit/transform contract.

    ``fit(graph)`` searches for ``k`` edges whose removal minimises the
    worst-case infection count and stores ``solution_``, ``best_value_``,
    ``trace_``, ``k_`` and ``initial_infected_``. ``transform(graph)``
    returns the graph without those edges.
    """

    def __init__(self, k=0.1, *, initial_infected=None, initial_fraction=0.1, chi=0.15,
                 phi=0.05, epsilon=2, lam=4, horizon=100, replications=20, random_state=None):
        self.k = k
        self.initial_infected = initial_infected
        self.initial_fraction = initial_fraction
        self.chi = chi
        self.phi = phi
        self.epsilon = epsilon
        self.lam = lam
        self.horizon = horizon
        self.replications = replications
        self.random_state = random_state

    def _epidemic_params(self, graph: Graph, rng: np.random.Generator) -> EpidemicParams:
        seeds = self.initial_infected
        if seeds is None:
            seeds = seed_nodes(graph.num_nodes, self.initial_fraction, rng)
        chi = self.chi if np.isscalar(self.chi) else tuple(self.chi)
        params = EpidemicParams(frozenset(seeds), chi, self.phi, self.epsilon, self.lam,
                                self.horizon, self.replications)
        params.check_against(graph)
        return params

    def _search(self, graph, params, k, rng) -> SearchResult:
        raise NotImplementedError

    def fit(self, graph: Graph, y=None):
        check_graph(graph)
        rng = check_generator(self.random_state)
        self.k_ = resolve_k(self.k, graph.num_edges)
        self.params_ = self._epidemic_params(graph, rng)
        self.initial_infected_ = self.params_.initial_infected
        result = self._search(graph, self.params_, self.k_, rng)
        self.result_ = result
        self.solution_ = result.best_solution
        self.best_value_ = result.best_value
        self.trace_ = np.asarray(result.trace, dtype=np.int64)
        return self

    def transform(self, graph: Graph) -> Graph:
        check_is_fitted(self, "solution_")
        check_graph(graph)
        return graph.without_edges(self.solution_)

    def score(self, graph: Graph, y=None) -> float:
        """Negated worst-case infections of the fitted solution (higher is better)."""
        check_is_fitted(self, "solution_")
        return -float(evaluate(graph, self.solution_, self.params_, check_generator(self.random_state)))
