"""Greedy diversification: replace repeated population members with fresh
greedy randomized tours.

Members are ranked by cost; a member whose characteristic key was already
seen among better (or equal, earlier) members is discarded and a greedy tour
takes its place.  Two characteristics are built in:

* ``"id"``: the tour itself, compared as an undirected cycle;
* ``"f"``: the tour cost.

Any callable mapping a :class:`Tour` to a hashable key also works.
"""
from __future__ import annotations

from enum import Enum
from typing import Callable, Hashable, Union

import numpy as np
from numba import njit

from .construction import RclParams, greedy_orders
from .tsp_core import Population, Tour, _edge_diff
from .tsplib_io import Instance

__all__ = [
    "Characteristic",
    "greedy_diversification",
    "greedy_diversification_id",
    "duplicate_mask",
    "diversify_arrays",
]


class Characteristic(str, Enum):
    IDENTITY = "id"
    OBJECTIVE = "f"

    @classmethod
    def parse(cls, value) -> "Characteristic":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        aliases = {"id": cls.IDENTITY, "identity": cls.IDENTITY,
                   "f": cls.OBJECTIVE, "objective": cls.OBJECTIVE, "cost": cls.OBJECTIVE}
        if v not in aliases:
            raise ValueError(f"unknown characteristic {value!r} (expected 'id' or 'f')")
        return aliases[v]


KeyFunction = Callable[[Tour], Hashable]
CharacteristicLike = Union[Characteristic, str, KeyFunction]


@njit(cache=True)
def _dup_mask_id(pop, costs, order):
    # Walk the cost-sorted slots; within each run of equal cost compare
    # against every earlier kept member of the run, not just the predecessor.
    n = order.shape[0]
    dup = np.zeros(n, dtype=np.bool_)
    start = 0
    while start < n:
        end = start + 1
        while end < n and costs[order[end]] == costs[order[start]]:
            end += 1
        for r in range(start + 1, end):
            for q in range(start, r):
                if not dup[q] and _edge_diff(pop[order[q]], pop[order[r]]) == 0:
                    dup[r] = True
                    break
        start = end
    return dup


def _dup_mask_f(costs, order):
    sc = costs[order]
    dup = np.zeros(order.shape[0], dtype=bool)
    dup[1:] = sc[1:] == sc[:-1]
    return dup


def duplicate_mask(pop: np.ndarray, costs: np.ndarray, characteristic=Characteristic.IDENTITY):
    """Stable cost order of the slots and, aligned with it, which slots repeat
    an earlier key."""
    order = np.argsort(costs, kind="stable")
    if Characteristic.parse(characteristic) is Characteristic.IDENTITY:
        return order, _dup_mask_id(pop, costs, order)
    return order, _dup_mask_f(costs, order)


def diversify_arrays(pop, costs, flags, dist, sigma, rng, characteristic=Characteristic.IDENTITY) -> int:
    """In-place variant used by the solvers. Slots end up in cost order with
    repeated members overwritten by greedy tours (flags cleared).

    Returns the number of greedy tours inserted.
    """
    order, dup = duplicate_mask(pop, costs, characteristic)
    pop[:] = pop[order]
    costs[:] = costs[order]
    if flags is not None:
        flags[:] = flags[order]
    idx = np.flatnonzero(dup)
    k = idx.shape[0]
    if k:
        new, new_cost = greedy_orders(dist, k, sigma, rng)
        pop[idx] = new
        costs[idx] = new_cost
        if flags is not None:
            flags[idx] = False
    return k


def _key_function(g: CharacteristicLike) -> KeyFunction:
    if callable(g) and not isinstance(g, (str, Characteristic)):
        return g
    g = Characteristic.parse(g)
    if g is Characteristic.IDENTITY:
        return lambda t: t.canonical()
    return lambda t: t.cost


def greedy_diversification(pop: Population, g: CharacteristicLike, instance: Instance,
                           params: RclParams, rng: np.random.Generator) -> tuple[Population, int]:
    """General form: sort by cost, keep the first member of every key, append
    one greedy tour per discarded member.

    Returns the new population and the number of greedy tours added.
    """
    key = _key_function(g)
    order = np.argsort(pop.costs(), kind="stable")
    seen: set = set()
    kept: list[Tour] = []
    flags: list[bool] = []
    for i in order:
        t = pop.members[i]
        kk = key(t)
        if kk in seen:
            continue
        seen.add(kk)
        kept.append(t)
        flags.append(pop.improved[i])
    k = pop.n - len(kept)
    new, new_cost = greedy_orders(instance.dist, k, params.sigma, rng)
    for r in range(k):
        kept.append(Tour._trusted(new[r], new_cost[r]))
        flags.append(False)
    return Population(kept, flags), k


def greedy_diversification_id(pop: Population, instance: Instance, params: RclParams,
                              rng: np.random.Generator) -> tuple[Population, int]:
    """Identity characteristic via a scan over the cost-sorted population;
    a repeated tour is replaced in place by a greedy one."""
    arr = pop.as_array()
    costs = pop.costs()
    flags = np.array(pop.improved, dtype=bool)
    k = diversify_arrays(arr, costs, flags, instance.dist, params.sigma, rng, Characteristic.IDENTITY)
    return Population.from_arrays(arr, costs, flags), k
