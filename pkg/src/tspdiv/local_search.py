"""2-opt with candidate neighbour lists and don't-look bits.

Used as the improvement step of every memetic / multi-start solver.  The
search runs first-improvement moves from an activity queue; once the queue
drains, one more sweep with every city active confirms local optimality
(further moves re-enter the queued phase).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .tsp_core import Tour, _cost
from .tsplib_io import Instance

__all__ = ["NeighborLists", "build_neighbor_lists", "two_opt", "two_opt_order"]


@dataclass(frozen=True, eq=False)
class NeighborLists:
    k: int
    lists: np.ndarray  # (m, k) int32, nearest first

    def __getitem__(self, city: int) -> np.ndarray:
        return self.lists[city]


def build_neighbor_lists(instance: Instance, k: int) -> NeighborLists:
    """The ``k`` nearest cities of every city (ties by lower index)."""
    m = instance.m
    if not 1 <= k < m:
        raise ValueError(f"k must be in [1, m-1] = [1, {m - 1}], got {k}")
    d = np.array(instance.dist, dtype=np.int64)
    # push each city behind all others in its own row
    np.fill_diagonal(d, d.max() + 1)
    lists = np.argsort(d, axis=1, kind="stable")[:, :k].astype(np.int32)
    lists.setflags(write=False)
    return NeighborLists(k, lists)


@njit(cache=True)
def _reverse(tour, pos, i, j):
    # reverse positions i..j (cyclic, inclusive); flip the complement if shorter
    m = tour.shape[0]
    length = (j - i) % m + 1
    if 2 * length > m:
        i, j = (j + 1) % m, (i - 1) % m
        length = m - length
    for s in range(length // 2):
        a = (i + s) % m
        b = (j - s) % m
        ca = tour[a]
        cb = tour[b]
        tour[a] = cb
        pos[cb] = a
        tour[b] = ca
        pos[ca] = b


@njit(cache=True)
def _push(queue, active, head, size, x):
    if not active[x]:
        active[x] = True
        queue[(head + size) % queue.shape[0]] = x
        size += 1
    return size


@njit(cache=True)
def _two_opt(dist, tour, neigh):
    """Improve ``tour`` in place. Returns (cost, number of moves)."""
    m = tour.shape[0]
    K = neigh.shape[1]
    pos = np.empty(m, dtype=np.int64)
    for k in range(m):
        pos[tour[k]] = k
    cost = _cost(dist, tour)
    active = np.zeros(m, dtype=np.bool_)
    queue = np.empty(m, dtype=np.int64)
    moves = 0

    while True:
        # (re)activate everything: a full sweep
        head = 0
        size = 0
        for k in range(m):
            c = tour[k]
            active[c] = True
            queue[(head + size) % m] = c
            size += 1
        moves_before = moves

        while size > 0:
            a = queue[head]
            head = (head + 1) % m
            size -= 1
            active[a] = False
            improved = True
            while improved:
                improved = False
                for direction in range(2):
                    pa = pos[a]
                    if direction == 0:
                        b = tour[(pa + 1) % m]
                    else:
                        b = tour[(pa - 1) % m]
                    d_ab = dist[a, b]
                    for t in range(K):
                        c = neigh[a, t]
                        d_ac = dist[a, c]
                        if d_ac >= d_ab:
                            break
                        pc = pos[c]
                        if direction == 0:
                            d = tour[(pc + 1) % m]
                        else:
                            d = tour[(pc - 1) % m]
                        if c == b or d == a:
                            continue
                        delta = d_ac + dist[b, d] - d_ab - dist[c, d]
                        if delta < 0:
                            if direction == 0:
                                _reverse(tour, pos, pos[b], pos[c])
                            else:
                                _reverse(tour, pos, pos[a], pos[d])
                            cost += delta
                            moves += 1
                            size = _push(queue, active, head, size, a)
                            size = _push(queue, active, head, size, b)
                            size = _push(queue, active, head, size, c)
                            size = _push(queue, active, head, size, d)
                            improved = True
                            break
                    if improved:
                        break
        if moves == moves_before:
            break
    return cost, moves


def two_opt_order(dist: np.ndarray, order: np.ndarray, neigh: np.ndarray) -> int:
    """In-place 2-opt on an int32 order array; returns the new cost."""
    cost, _ = _two_opt(dist, order, neigh)
    return int(cost)


def two_opt(instance: Instance, t: Tour, nl: NeighborLists) -> Tour:
    """2-opt local optimum reachable from ``t`` by first-improvement moves."""
    order = np.array(t.order, dtype=np.int32)
    cost = two_opt_order(instance.dist, order, nl.lists)
    return Tour._trusted(order, cost)
