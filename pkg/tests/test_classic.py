import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from conftest import certain, make_graph
from minseis.classic import MonteCarloEdgeRemoval, monte_carlo_search
from minseis.seis import EpidemicParams, evaluate, random_solution
from minseis.validation import draw_entropy, substream


def replay(graph, params, k, attempts, seed):
    """Per-attempt (solution, value) pairs, rebuilt from the documented stream layout."""
    root = draw_entropy(np.random.default_rng(seed))
    out = []
    for a in range(attempts):
        sub = substream(root, a)
        sol = random_solution(graph, k, sub)
        out.append((sol, evaluate(graph, sol, params, sub)))
    return out


def brute_force(graph, params, k):
    return min(evaluate(graph, set(c), params, 0)
               for c in itertools.combinations(range(1, graph.num_edges + 1), k))


def test_single_attempt_is_one_random_evaluation(small_graph):
    params = EpidemicParams({1}, chi=0.4, phi=0.2, replications=5)
    res = monte_carlo_search(small_graph, params, 2, 1, np.random.default_rng(3))
    (sol, val), = replay(small_graph, params, 2, 1, 3)
    assert res.best_solution == sol
    assert res.best_value == val
    assert res.trace == (val,)


def test_k_zero_evaluates_unmodified_graph(small_graph):
    params = EpidemicParams({1, 5}, chi=0.5, phi=0.3, replications=4)
    res = monte_carlo_search(small_graph, params, 0, 6, np.random.default_rng(8))
    runs = replay(small_graph, params, 0, 6, 8)
    assert all(sol == frozenset() for sol, _ in runs)
    assert res.best_solution == frozenset()
    assert res.best_value == min(v for _, v in runs)


def test_path_graph_optimum(path4):
    params = certain({1})
    optimum = brute_force(path4, params, 1)
    res = monte_carlo_search(path4, params, 1, 30, np.random.default_rng(0))
    assert res.best_solution == {1}
    assert res.best_value == optimum == 3


def test_ties_keep_first_attempt(path4):
    # zero probabilities: every solution scores the same, so attempt 0 must win
    params = EpidemicParams({1}, chi=0.0, phi=0.0)
    res = monte_carlo_search(path4, params, 1, 10, np.random.default_rng(4))
    first, _ = replay(path4, params, 1, 10, 4)[0]
    assert res.best_solution == first


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 25), st.integers(0, 7))
def test_trace_properties(seed, attempts, k):
    g = make_graph(6, [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)], (1, 1, 1, 2, 2, 2))
    params = EpidemicParams({1, 6}, chi=0.5, phi=0.25, horizon=20, replications=3)
    res = monte_carlo_search(g, params, k, attempts, np.random.default_rng(seed))
    runs = replay(g, params, k, attempts, seed)
    assert len(res.trace) == attempts
    assert all(a >= b for a, b in zip(res.trace, res.trace[1:]))
    assert res.best_value == res.trace[-1] == min(v for _, v in runs)
    assert list(res.trace) == list(itertools.accumulate((v for _, v in runs), min))
    assert len(res.best_solution) == k
    again = monte_carlo_search(g, params, k, attempts, np.random.default_rng(seed))
    assert again == res


@pytest.mark.parametrize("attempts, k", [(0, 1), (-1, 1), (3, 8), (3, -1)])
def test_bad_arguments(small_graph, attempts, k):
    with pytest.raises(ValueError):
        monte_carlo_search(small_graph, EpidemicParams({1}), k, attempts, 0)


def test_estimator_api(small_graph):
    est = MonteCarloEdgeRemoval(k=2, attempts=5, initial_infected={1}, replications=3,
                                random_state=0)
    assert est.get_params()["attempts"] == 5
    assert clone(est).get_params() == est.get_params()
    reduced = est.fit_transform(small_graph)
    assert len(est.solution_) == est.k_ == 2
    assert reduced.num_edges == small_graph.num_edges - 2
    assert est.trace_.shape == (5,)
    assert est.best_value_ == est.trace_[-1]
    assert isinstance(est.score(small_graph), float)
    assert est.set_params(attempts=7).attempts == 7


def test_estimator_fraction_k_and_seeding(small_graph):
    est = MonteCarloEdgeRemoval(k=0.3, attempts=2, replications=2, random_state=5).fit(small_graph)
    assert est.k_ == 2  # 0.3 * 7 = 2.1
    assert len(est.initial_infected_) == 1  # ceil(0.1 * 6)
    other = MonteCarloEdgeRemoval(k=0.3, attempts=2, replications=2, random_state=5).fit(small_graph)
    assert other.solution_ == est.solution_


def test_estimator_unfitted(small_graph):
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        MonteCarloEdgeRemoval().transform(small_graph)
    with pytest.raises(TypeError):
        MonteCarloEdgeRemoval().fit("not a graph")
