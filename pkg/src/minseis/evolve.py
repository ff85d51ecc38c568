"""Genetic algorithm over fixed-size edge-removal sets.

Two encodings share one generational loop:

* ``int``: ``k`` genes, each an edge id in ``1..|E|``;
* ``bin``: ``|E|`` bits, bit ``i`` set when edge ``i + 1`` is removed.

Variation can break the size-``k`` constraint, so every child is repaired
before it is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .base import BaseEdgeRemoval, SearchResult
from .netio import Graph
from .seis import EpidemicParams, evaluate, random_edge_ids
from .validation import (check_generator, check_positive_int, check_probability,
                         draw_entropy, substream)

ENCODINGS = ("int", "bin")


def fitness(worst_value) -> float:
    # shifted by one so a fully contained epidemic (value 0) stays finite
    if worst_value < 0:
        raise ValueError("worst_value must be non-negative")
    return 1.0 / (1.0 + worst_value)


def uniform_crossover(parent_a: np.ndarray, parent_b: np.ndarray, exchange_probability: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if parent_a.shape != parent_b.shape:
        raise ValueError(f"parent lengths differ: {parent_a.shape} vs {parent_b.shape}")
    swap = rng.random(parent_a.shape[0]) < exchange_probability
    child_a = np.where(swap, parent_b, parent_a)
    child_b = np.where(swap, parent_a, parent_b)
    return child_a, child_b


def mutate_int(chromosome: np.ndarray, mutation_rate: float, num_edges: int,
               rng: np.random.Generator) -> np.ndarray:
    hit = rng.random(chromosome.shape[0]) < mutation_rate
    out = chromosome.copy()
    out[hit] = rng.integers(1, num_edges + 1, size=int(hit.sum()))
    return out


def mutate_bin(chromosome: np.ndarray, mutation_rate: float, rng: np.random.Generator) -> np.ndarray:
    hit = rng.random(chromosome.shape[0]) < mutation_rate
    out = chromosome.copy()
    out[hit] ^= 1
    return out


def repair_int(chromosome: np.ndarray, k: int, num_edges: int,
               rng: np.random.Generator) -> np.ndarray:
    """Drop repeated genes (first occurrence kept), then append unused ids until length ``k``.

    Appending ids one at a time by rejection sampling yields a uniformly
    ordered sample without replacement from the unused ids; that sample is
    drawn directly here.
    """
    _, first = np.unique(chromosome, return_index=True)
    kept = chromosome[np.sort(first)][:k]
    need = k - kept.shape[0]
    if need <= 0:
        return kept.copy()
    unused = np.setdiff1d(np.arange(1, num_edges + 1), kept, assume_unique=True)
    return np.concatenate([kept, rng.choice(unused, size=need, replace=False)])


def repair_bin(chromosome: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Clear or set randomly chosen bits until exactly ``k`` are set.

    Probing uniform positions and only acting on the ones that need
    flipping ends with a uniformly random subset of the surplus bits
    cleared (or of the missing bits set); that subset is drawn directly.
    """
    if k > chromosome.shape[0]:
        raise ValueError(f"k={k} exceeds chromosome length {chromosome.shape[0]}")
    out = chromosome.copy()
    ones = np.flatnonzero(out)
    if ones.shape[0] > k:
        out[rng.choice(ones, size=ones.shape[0] - k, replace=False)] = 0
    elif ones.shape[0] < k:
        zeros = np.flatnonzero(out == 0)
        out[rng.choice(zeros, size=k - ones.shape[0], replace=False)] = 1
    return out


def duel(fitness_a: float, fitness_b: float, tournament_p: float, rng: np.random.Generator) -> int:
    """0 if contestant ``a`` wins, 1 if ``b`` does; the fitter wins with ``tournament_p``, ``a`` on ties."""
    fitter = 0 if fitness_a >= fitness_b else 1
    return fitter if rng.random() < tournament_p else 1 - fitter


def tournament_index(fitnesses: Sequence[float], tournament_p: float,
                     rng: np.random.Generator) -> int:
    n = len(fitnesses)
    if n == 0:
        raise ValueError("empty population")
    i, j = rng.integers(n, size=2)
    return int((i, j)[duel(fitnesses[i], fitnesses[j], tournament_p, rng)])


def tournament_select(population: Sequence[np.ndarray], fitnesses: Sequence[float],
                      tournament_p: float, rng: np.random.Generator) -> np.ndarray:
    """Binary tournament: two contestants with replacement, the fitter wins with ``tournament_p``."""
    if len(population) != len(fitnesses):
        raise ValueError("population and fitnesses differ in length")
    return population[tournament_index(fitnesses, tournament_p, rng)]


def encode(edge_ids: np.ndarray, encoding: str, num_edges: int) -> np.ndarray:
    if encoding == "int":
        return np.asarray(edge_ids, dtype=np.int64).copy()
    bits = np.zeros(num_edges, dtype=np.uint8)
    bits[np.asarray(edge_ids, dtype=np.int64) - 1] = 1
    return bits


def decode(chromosome: np.ndarray, encoding: str) -> frozenset[int]:
    if encoding == "int":
        return frozenset(int(g) for g in chromosome)
    return frozenset(int(i) + 1 for i in np.flatnonzero(chromosome))


def is_valid(chromosome: np.ndarray, encoding: str, k: int, num_edges: int) -> bool:
    if encoding == "int":
        return (chromosome.shape[0] == k and np.unique(chromosome).shape[0] == k
                and bool(np.all((chromosome >= 1) & (chromosome <= num_edges))))
    return chromosome.shape[0] == num_edges and int(chromosome.sum()) == k


@dataclass(frozen=True)
class GAConfig:
    k: int
    encoding: str = "bin"
    population_size: int = 100
    generations: int = 300
    crossover_rate: float = 0.7
    exchange_probability: float = 0.5
    mutation_rate: float = 0.1
    tournament_p: float = 0.7

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}, got {self.encoding!r}")
        check_positive_int("k", self.k, minimum=0)
        check_positive_int("population_size", self.population_size, minimum=2)
        check_positive_int("generations", self.generations)
        for name in ("crossover_rate", "exchange_probability", "mutation_rate", "tournament_p"):
            check_probability(name, getattr(self, name))


def _variation(config: GAConfig, num_edges: int) -> tuple[Callable, Callable]:
    k = config.k
    if config.encoding == "int":
        return (lambda c, rng: mutate_int(c, config.mutation_rate, num_edges, rng),
                lambda c, rng: repair_int(c, k, num_edges, rng))
    return (lambda c, rng: mutate_bin(c, config.mutation_rate, rng),
            lambda c, rng: repair_bin(c, k, rng))


def run_ga(graph: Graph, params: EpidemicParams, config: GAConfig, rng=None,
           on_evaluate: Callable[[np.ndarray], None] | None = None) -> SearchResult:
    """Generational GA without elitism plus a best-ever archive.

    Selection, crossover, mutation and repair consume one variation stream
    in index order; individual ``i`` of generation ``g`` is evaluated on its
    own sub-stream ``(root, 1, g, i)``. A child that is a plain copy of its
    parent and comes out of mutation and repair with the same edge set
    inherits the parent's value instead of being simulated again.
    ``on_evaluate`` sees every chromosome before it is simulated.
    """
    if config.k > graph.num_edges:
        raise ValueError(f"k={config.k} exceeds |E|={graph.num_edges}")
    root = draw_entropy(check_generator(rng))
    var_rng = substream(root, 0)
    num_edges, n, enc = graph.num_edges, config.population_size, config.encoding
    mutate, repair = _variation(config, num_edges)

    population = [encode(random_edge_ids(num_edges, config.k, var_rng), enc, num_edges)
                  for _ in range(n)]
    values: list[int | None] = [None] * n
    best_value, best_solution = math.inf, frozenset()
    trace = []

    for gen in range(config.generations):
        for i, chrom in enumerate(population):
            if values[i] is None:
                if on_evaluate is not None:
                    on_evaluate(chrom)
                values[i] = evaluate(graph, decode(chrom, enc), params, substream(root, 1, gen, i))
            if values[i] < best_value:
                best_value, best_solution = values[i], decode(chrom, enc)
        trace.append(best_value)
        if gen == config.generations - 1:
            break

        fit = [fitness(v) for v in values]
        children, child_values = [], []
        while len(children) < n:
            ia = tournament_index(fit, config.tournament_p, var_rng)
            ib = tournament_index(fit, config.tournament_p, var_rng)
            pa, pb = population[ia], population[ib]
            crossed = var_rng.random() < config.crossover_rate
            if crossed:
                ca, cb = uniform_crossover(pa, pb, config.exchange_probability, var_rng)
            else:
                ca, cb = pa.copy(), pb.copy()
            for child, parent, pidx in ((ca, pa, ia), (cb, pb, ib)):
                child = repair(mutate(child, var_rng), var_rng)
                same = not crossed and decode(child, enc) == decode(parent, enc)
                children.append(child)
                child_values.append(values[pidx] if same else None)
        population, values = children[:n], child_values[:n]

    return SearchResult(best_solution, int(best_value), tuple(int(v) for v in trace))


class GeneticEdgeRemoval(BaseEdgeRemoval):
    """GA edge-removal search as an estimator.

    Defaults follow the benchmark protocol: binary encoding, 100
    individuals, 300 generations, crossover rate 0.7 with exchange
    probability 0.5, per-gene mutation rate 0.1 and binary tournaments that
    favour the fitter contestant with probability 0.7.
    """

    def __init__(self, k=0.1, *, encoding="bin", population_size=100, generations=300,
                 crossover_rate=0.7, exchange_probability=0.5, mutation_rate=0.1,
                 tournament_p=0.7, initial_infected=None, initial_fraction=0.1, chi=0.15,
                 phi=0.05, epsilon=2, lam=4, horizon=100, replications=20, random_state=None):
        super().__init__(k, initial_infected=initial_infected, initial_fraction=initial_fraction,
                         chi=chi, phi=phi, epsilon=epsilon, lam=lam, horizon=horizon,
                         replications=replications, random_state=random_state)
        self.encoding = encoding
        self.population_size = population_size
        self.generations = generations
        self.crossover_rate = crossover_rate
        self.exchange_probability = exchange_probability
        self.mutation_rate = mutation_rate
        self.tournament_p = tournament_p

    def _search(self, graph, params, k, rng):
        config = GAConfig(k, self.encoding, self.population_size, self.generations,
                          self.crossover_rate, self.exchange_probability, self.mutation_rate,
                          self.tournament_p)
        return run_ga(graph, params, config, rng)
