"""Edge-removal search for epidemic mitigation on community-structured networks."""

from .base import SearchResult
from .classic import MonteCarloEdgeRemoval, monte_carlo_search
from .evolve import GAConfig, GeneticEdgeRemoval, run_ga
from .netio import (CommunityMap, Graph, load_communities, load_graph, load_instance,
                    write_graph)
from .seis import EpidemicParams, evaluate, random_solution, simulate

__all__ = [
    "CommunityMap", "EpidemicParams", "GAConfig", "GeneticEdgeRemoval", "Graph",
    "MonteCarloEdgeRemoval", "SearchResult", "evaluate", "load_communities", "load_graph",
    "load_instance", "monte_carlo_search", "random_solution", "run_ga", "simulate",
    "write_graph",
]
