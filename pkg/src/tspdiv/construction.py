"""Greedy randomized tour construction with a value-based restricted candidate list.

From the current path end, every unvisited city whose distance is at most
``(1 + sigma)`` times the nearest unvisited distance is a candidate; one is
picked uniformly.  ``sigma = 0`` degenerates to nearest neighbour.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .tsp_core import Tour, _cost
from .tsplib_io import Instance

__all__ = ["RclParams", "greedy_randomized_tour", "greedy_complete_path", "greedy_orders"]


@dataclass(frozen=True)
class RclParams:
    sigma: float = 0.1

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@njit(cache=True)
def _complete(dist, path, start_len, sigma, u):
    # extends path[:start_len] in place to a full permutation
    m = path.shape[0]
    visited = np.zeros(m, dtype=np.bool_)
    for t in range(start_len):
        visited[path[t]] = True
    cand = np.empty(m, dtype=np.int32)
    factor = 1.0 + sigma
    for t in range(start_len, m):
        last = path[t - 1]
        best = np.int64(-1)
        for c in range(m):
            if not visited[c]:
                dc = dist[last, c]
                if best < 0 or dc < best:
                    best = dc
        limit = factor * best
        cnt = 0
        for c in range(m):
            if not visited[c] and dist[last, c] <= limit:
                cand[cnt] = c
                cnt += 1
        k = int(u[t] * cnt)
        if k >= cnt:
            k = cnt - 1
        pick = cand[k]
        path[t] = pick
        visited[pick] = True


@njit(cache=True)
def _greedy_batch(dist, starts, u, sigma, out, out_cost):
    for i in range(starts.shape[0]):
        out[i, 0] = starts[i]
        _complete(dist, out[i], 1, sigma, u[i])
        out_cost[i] = _cost(dist, out[i])


def greedy_orders(dist: np.ndarray, k: int, sigma: float, rng: np.random.Generator):
    """``k`` greedy randomized tours as an ``(k, m)`` array plus their costs."""
    m = dist.shape[0]
    starts = rng.integers(0, m, k).astype(np.int32)
    u = rng.random((k, m))
    out = np.empty((k, m), dtype=np.int32)
    out_cost = np.empty(k, dtype=np.int64)
    if k:
        _greedy_batch(dist, starts, u, float(sigma), out, out_cost)
    return out, out_cost


def greedy_complete_path(instance: Instance, partial, params: RclParams, rng: np.random.Generator) -> Tour:
    """Append the missing cities to the open path ``partial`` greedily and
    close the cycle."""
    m = instance.m
    partial = np.asarray(partial, dtype=np.int64)
    if partial.ndim != 1 or partial.size == 0:
        raise ValueError("partial path must be a non-empty list of cities")
    if partial.min() < 0 or partial.max() >= m:
        raise ValueError("partial path contains a city index out of range")
    if np.unique(partial).size != partial.size:
        raise ValueError("partial path contains duplicate cities")
    path = np.empty(m, dtype=np.int32)
    path[: partial.size] = partial
    u = rng.random(m)
    _complete(instance.dist, path, partial.size, float(params.sigma), u)
    return Tour._trusted(path, _cost(instance.dist, path))


def greedy_randomized_tour(instance: Instance, params: RclParams, rng: np.random.Generator) -> Tour:
    """A greedy randomized tour from a uniformly random start city."""
    start = int(rng.integers(0, instance.m))
    return greedy_complete_path(instance, [start], params, rng)
