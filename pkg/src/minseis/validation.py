"""Argument checks and random-stream helpers shared by the estimators."""

from __future__ import annotations

import numbers
from decimal import ROUND_CEILING, ROUND_HALF_UP, Decimal

import numpy as np


def check_probability(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
    return float(value)


def check_positive_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_fraction(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def round_half_up(fraction: float, total: int) -> int:
    """``fraction * total`` rounded half-up, computed in decimal so 0.1 * 38 gives 4, not 3.8000000000000003."""
    return int((Decimal(str(fraction)) * total).to_integral_value(ROUND_HALF_UP))


def ceil_fraction(fraction: float, total: int) -> int:
    return int((Decimal(str(fraction)) * total).to_integral_value(ROUND_CEILING))


def resolve_k(k, num_edges: int) -> int:
    """Integers are absolute edge counts; floats are fractions of ``num_edges``."""
    if isinstance(k, bool):
        raise ValueError(f"k must be an int or a float fraction, got {k!r}")
    if isinstance(k, numbers.Integral):
        if not 0 <= k <= num_edges:
            raise ValueError(f"k={k} outside 0..{num_edges}")
        return int(k)
    if isinstance(k, numbers.Real):
        return round_half_up(check_fraction("k", k), num_edges)
    raise ValueError(f"k must be an int or a float fraction, got {k!r}")


def check_generator(seed) -> np.random.Generator:
    """Turn None, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise ValueError(f"{seed!r} cannot seed a numpy Generator")


def draw_entropy(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63))


def substream(entropy: int, *key: int) -> np.random.Generator:
    """Independent stream addressed by a counter key, so work can be split across processes."""
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=tuple(int(x) for x in key)))


def check_graph(graph, *, communities: bool = False):
    from .netio import Graph

    if not isinstance(graph, Graph):
        raise TypeError(f"expected a minseis Graph, got {type(graph).__name__}")
    if communities and graph.community is None:
        raise ValueError("graph has no community labels attached")
    return graph
