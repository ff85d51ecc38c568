"""Monte Carlo baseline: sample random removal sets and keep the best."""

from __future__ import annotations

import math

from .base import BaseEdgeRemoval, SearchResult
from .netio import Graph
from .seis import EpidemicParams, evaluate, random_solution
from .validation import check_generator, check_positive_int, draw_entropy, substream


def monte_carlo_search(graph: Graph, params: EpidemicParams, k: int, attempts: int,
                       rng=None) -> SearchResult:
    """Evaluate ``attempts`` uniformly random ``k``-edge removals.

    Attempt ``a`` draws its solution and its replication seeds from
    sub-stream ``(root, a)``, so attempts are independent of evaluation
    order. Ties keep the earliest attempt.
    """
    check_positive_int("attempts", attempts)
    if not 0 <= k <= graph.num_edges:
        raise ValueError(f"k={k} outside 0..{graph.num_edges}")
    root = draw_entropy(check_generator(rng))

    best_value = math.inf
    best_solution = frozenset()
    trace = []
    for attempt in range(attempts):
        sub = substream(root, attempt)
        solution = random_solution(graph, k, sub)
        value = evaluate(graph, solution, params, sub)
        if value < best_value:
            best_value, best_solution = value, solution
        trace.append(best_value)
    return SearchResult(best_solution, int(best_value), tuple(int(v) for v in trace))


class MonteCarloEdgeRemoval(BaseEdgeRemoval):
    """Random-search baseline as an estimator.

    Parameters
    ----------
    k : int or float
        Edges to remove; a float is a fraction of ``|E|`` rounded half-up.
    attempts : int
        Number of random solutions evaluated.
    """

    def __init__(self, k=0.1, *, attempts=300, initial_infected=None, initial_fraction=0.1,
                 chi=0.15, phi=0.05, epsilon=2, lam=4, horizon=100, replications=20,
                 random_state=None):
        super().__init__(k, initial_infected=initial_infected, initial_fraction=initial_fraction,
                         chi=chi, phi=phi, epsilon=epsilon, lam=lam, horizon=horizon,
                         replications=replications, random_state=random_state)
        self.attempts = attempts

    def _search(self, graph, params, k, rng):
        return monte_carlo_search(graph, params, k, self.attempts, rng)
