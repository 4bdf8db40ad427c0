"""Permutation operators (OX, exchange mutation), selection and replacement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .tsp_core import Population, Tour, _cost
from .tsplib_io import Instance

__all__ = [
    "CrossoverParams",
    "MutationParams",
    "ox_crossover",
    "exchange_mutation",
    "binary_tournament",
    "tournament_indices",
    "randomized_adjacent_pairs",
    "compete",
    "apply_elitism",
    "draw_cuts",
    "worst_index",
]


@dataclass(frozen=True)
class CrossoverParams:
    p_c: float = 0.7

    def __post_init__(self):
        if not 0 < self.p_c <= 1:
            raise ValueError(f"p_c must be in (0, 1], got {self.p_c}")


@dataclass(frozen=True)
class MutationParams:
    """``p_m = 0`` means mutation is disabled."""

    p_m: float = 0.1

    def __post_init__(self):
        if not 0 <= self.p_m <= 1:
            raise ValueError(f"p_m must be in [0, 1], got {self.p_m}")

    @property
    def enabled(self) -> bool:
        return self.p_m > 0


@njit(cache=True)
def _ox(p1, p2, i, j, child, mark):
    m = p1.shape[0]
    mark[:] = False
    for k in range(i, j + 1):
        child[k] = p1[k]
        mark[p1[k]] = True
    pos = (j + 1) % m
    for k in range(m):
        c = p2[(j + 1 + k) % m]
        if not mark[c]:
            child[pos] = c
            pos = (pos + 1) % m


@njit(cache=True)
def _ox_batch(pop, left, right, ci, cj, dist, out, out_cost):
    mark = np.empty(pop.shape[1], dtype=np.bool_)
    for k in range(left.shape[0]):
        _ox(pop[left[k]], pop[right[k]], ci[k], cj[k], out[k], mark)
        out_cost[k] = _cost(dist, out[k])


@njit(cache=True)
def _swap_delta(dist, order, a, b):
    # cost change of swapping positions a < b
    m = order.shape[0]
    ca = order[a]
    cb = order[b]
    pa = order[(a - 1) % m]
    na = order[(a + 1) % m]
    pb = order[(b - 1) % m]
    nb = order[(b + 1) % m]
    if (b - a) == 1:
        return dist[pa, cb] + dist[ca, nb] - dist[pa, ca] - dist[cb, nb]
    if a == 0 and b == m - 1:
        # cyclically adjacent: ... pb cb | ca na ...
        return dist[pb, ca] + dist[cb, na] - dist[pb, cb] - dist[ca, na]
    return (dist[pa, cb] + dist[cb, na] + dist[pb, ca] + dist[ca, nb]
            - dist[pa, ca] - dist[ca, na] - dist[pb, cb] - dist[cb, nb])


@njit(cache=True)
def _mutate_inplace(dist, order, cost, a, b):
    if a > b:
        a, b = b, a
    cost += _swap_delta(dist, order, a, b)
    tmp = order[a]
    order[a] = order[b]
    order[b] = tmp
    return cost


def draw_cuts(rng: np.random.Generator, m: int, size: int):
    """``size`` cut pairs ``i < j`` uniform over distinct position pairs."""
    a = rng.integers(0, m, size)
    b = rng.integers(0, m - 1, size)
    b = b + (b >= a)
    return np.minimum(a, b).astype(np.int64), np.maximum(a, b).astype(np.int64)


def _distinct_pair(rng: np.random.Generator, m: int, size: int):
    a = rng.integers(0, m, size)
    b = rng.integers(0, m - 1, size)
    b = b + (b >= a)
    return a.astype(np.int64), b.astype(np.int64)


def ox_crossover(instance: Instance, p1: Tour, p2: Tour, rng: np.random.Generator | None = None,
                 cuts: tuple[int, int] | None = None) -> Tour:
    """Order crossover: keep ``p1[i..j]`` in place, fill the rest in the cyclic
    order of ``p2`` starting after position ``j``.

    Cut points are drawn from ``rng`` unless given explicitly as ``cuts``.
    """
    m = instance.m
    if p1.m != m or p2.m != m:
        raise ValueError("parents must be tours over the instance")
    if cuts is None:
        ci, cj = draw_cuts(rng, m, 1)
        i, j = int(ci[0]), int(cj[0])
    else:
        i, j = cuts
        if not 0 <= i < j < m:
            raise ValueError(f"cuts must satisfy 0 <= i < j < m, got {cuts}")
    child = np.empty(m, dtype=np.int32)
    _ox(np.ascontiguousarray(p1.order, dtype=np.int32), np.ascontiguousarray(p2.order, dtype=np.int32),
        i, j, child, np.empty(m, dtype=np.bool_))
    return Tour._trusted(child, _cost(instance.dist, child))


def exchange_mutation(instance: Instance, t: Tour, rng: np.random.Generator | None = None,
                      positions: tuple[int, int] | None = None) -> Tour:
    """Swap the cities at two distinct positions; the cost is updated incrementally."""
    m = instance.m
    if positions is None:
        a, b = _distinct_pair(rng, m, 1)
        a, b = int(a[0]), int(b[0])
    else:
        a, b = positions
        if a == b or not (0 <= a < m and 0 <= b < m):
            raise ValueError(f"need two distinct positions in 0..{m - 1}, got {positions}")
    order = np.array(t.order, dtype=np.int32)
    cost = _mutate_inplace(instance.dist, order, np.int64(t.cost), a, b)
    return Tour._trusted(order, cost)


def tournament_indices(costs: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` binary-tournament winners; ties go to the first drawn index."""
    n = costs.shape[0]
    draws = rng.integers(0, n, (size, 2))
    first, second = draws[:, 0], draws[:, 1]
    return np.where(costs[second] < costs[first], second, first)


def binary_tournament(pop: Population, rng: np.random.Generator) -> int:
    return int(tournament_indices(pop.costs(), rng, 1)[0])


def randomized_adjacent_pairs(pop: Population | int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Shuffle the slots and pair each with its cyclic successor."""
    n = pop if isinstance(pop, int) else pop.n
    if n < 2:
        raise ValueError("randomized adjacent selection needs at least 2 members")
    perm = rng.permutation(n)
    return [(int(perm[i]), int(perm[(i + 1) % n])) for i in range(n)]


def compete(parent: Tour, child: Tour) -> Tour:
    """The child replaces the parent only if strictly cheaper."""
    if parent.m != child.m:
        raise ValueError("parent and child are over different instances")
    return child if child.cost < parent.cost else parent


def worst_index(costs: np.ndarray) -> int:
    # largest cost, ties to the highest index
    costs = np.asarray(costs)
    return int(costs.shape[0] - 1 - np.argmax(costs[::-1]))


def apply_elitism(new_pop: Population, old_best: Tour, old_best_improved: bool = False) -> Population:
    """Replace the worst member of ``new_pop`` by ``old_best``."""
    w = worst_index(new_pop.costs())
    members = list(new_pop.members)
    flags = list(new_pop.improved)
    members[w] = old_best
    flags[w] = old_best_improved
    return Population(members, flags)
