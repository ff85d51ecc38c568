"""Compiled SEIS-cluster replications.

Mirrors :func:`minseis.seis.step` on flat arrays. Uniform variates come
from SplitMix64, one generator per replication seeded with a 64-bit value;
:class:`SplitMix64` is the same generator in plain Python, which lets the
set-based reference reproduce the kernel draw for draw.
"""

import numpy as np
from numba import njit, uint64

SUSCEPTIBLE = 0
EXPOSED = 1
INFECTED = 2

_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_TO_UNIT = 2.0 ** -53


class SplitMix64:
    """Pure-Python SplitMix64 exposing ``random()`` in ``[0, 1)``."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def random(self) -> float:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _M1) & _MASK
        z = ((z ^ (z >> 27)) * _M2) & _MASK
        z ^= z >> 31
        return (z >> 11) * _TO_UNIT


@njit(inline="always")
def _uniform(state):
    state = state + uint64(_GAMMA)
    z = state
    z = (z ^ (z >> uint64(30))) * uint64(_M1)
    z = (z ^ (z >> uint64(27))) * uint64(_M2)
    z = z ^ (z >> uint64(31))
    return state, (z >> uint64(11)) * _TO_UNIT


@njit(cache=True)
def _compact(indptr, indices, edge_index, community, removed, chi, phi):
    """Drop masked edges and resolve each adjacency slot's infection chance."""
    n = indptr.shape[0] - 1
    ptr = np.zeros(n + 1, dtype=np.int64)
    nbr = np.empty(indices.shape[0], dtype=np.int64)
    chance = np.empty(indices.shape[0], dtype=np.float64)
    m = 0
    for u in range(n):
        cu = community[u]
        for p in range(indptr[u], indptr[u + 1]):
            if removed[edge_index[p]]:
                continue
            v = indices[p]
            nbr[m] = v
            chance[m] = chi[cu] if community[v] == cu else phi
            m += 1
        ptr[u + 1] = m
    return ptr, nbr, chance


@njit(cache=True)
def replicate(indptr, indices, edge_index, community, removed, chi, phi,
              epsilon, lam, horizon, seeds, rep_seeds):
    n = indptr.shape[0] - 1
    ptr, nbr, chance = _compact(indptr, indices, edge_index, community, removed, chi, phi)
    out = np.zeros(rep_seeds.shape[0], dtype=np.int64)
    state = np.zeros(n, dtype=np.int8)
    expiry = np.zeros(n, dtype=np.int64)
    for r in range(rep_seeds.shape[0]):
        rs = uint64(rep_seeds[r])
        state[:] = SUSCEPTIBLE
        expiry[:] = 0
        for s in seeds:
            state[s] = INFECTED
            expiry[s] = lam
        n_inf = seeds.shape[0]
        n_exp = 0
        value = 0
        for t in range(1, horizon + 1):
            if n_inf == 0 and n_exp == 0:
                break
            for u in range(n):
                if state[u] != INFECTED:
                    continue
                if expiry[u] <= t:
                    state[u] = SUSCEPTIBLE
                    n_inf -= 1
                    continue
                for p in range(ptr[u], ptr[u + 1]):
                    v = nbr[p]
                    if state[v] != SUSCEPTIBLE:
                        continue
                    rs, x = _uniform(rs)
                    if x < chance[p]:
                        state[v] = EXPOSED
                        expiry[v] = t + epsilon
                        n_exp += 1
            if n_exp:
                for u in range(n):
                    if state[u] == EXPOSED and expiry[u] <= t:
                        state[u] = INFECTED
                        expiry[u] = t + lam
                        n_exp -= 1
                        n_inf += 1
            value += n_inf
        out[r] = value
    return out
