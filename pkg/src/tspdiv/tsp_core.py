"""Tours, populations, edge-difference distance and population diversity."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .tsplib_io import Instance

__all__ = [
    "Tour",
    "Population",
    "tour_cost",
    "edge_distance",
    "population_diversity",
    "is_permutation",
]


@njit(cache=True)
def _cost(dist, order):
    m = order.shape[0]
    total = 0
    prev = order[m - 1]
    for k in range(m):
        c = order[k]
        total += dist[prev, c]
        prev = c
    return total


@njit(cache=True)
def _fill_succ(order, succ):
    m = order.shape[0]
    for k in range(m - 1):
        succ[order[k]] = order[k + 1]
    succ[order[m - 1]] = order[0]


@njit(cache=True)
def _edge_diff_succ(succ_a, b):
    # edges of b missing from a; a is given by its successor array
    m = b.shape[0]
    count = 0
    prev = b[m - 1]
    for k in range(m):
        c = b[k]
        if succ_a[prev] != c and succ_a[c] != prev:
            count += 1
        prev = c
    return count


@njit(cache=True)
def _edge_diff(a, b):
    succ = np.empty(a.shape[0], dtype=np.int32)
    _fill_succ(a, succ)
    return _edge_diff_succ(succ, b)


@njit(cache=True)
def _diversity_sum(pop):
    n, m = pop.shape
    succ = np.empty((n, m), dtype=np.int32)
    for i in range(n):
        _fill_succ(pop[i], succ[i])
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += _edge_diff_succ(succ[i], pop[j])
    # each unordered pair stands for two ordered pairs
    return 2 * total


@njit(cache=True)
def _diversity_pairs(pop, left, right):
    m = pop.shape[1]
    succ = np.empty(m, dtype=np.int32)
    total = 0
    for k in range(left.shape[0]):
        _fill_succ(pop[left[k]], succ)
        total += _edge_diff_succ(succ, pop[right[k]])
    return total


def is_permutation(order, m: int | None = None) -> bool:
    order = np.asarray(order)
    if order.ndim != 1:
        return False
    if m is None:
        m = order.shape[0]
    if order.shape[0] != m:
        return False
    seen = np.zeros(m, dtype=bool)
    if order.size and (order.min() < 0 or order.max() >= m):
        return False
    seen[order] = True
    return bool(seen.all())


def _as_order(order, m: int) -> np.ndarray:
    arr = np.asarray(order)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("tour order must contain integer city indices")
    if not is_permutation(arr, m):
        raise ValueError(f"tour order is not a permutation of 0..{m - 1}")
    return np.ascontiguousarray(arr, dtype=np.int32)


def tour_cost(instance: Instance, order) -> int:
    """Length of the closed cycle visiting ``order``."""
    arr = _as_order(order, instance.m)
    return int(_cost(instance.dist, arr))


@dataclass(frozen=True, eq=False)
class Tour:
    """A Hamiltonian cycle with its cached cost.

    Equality (``==``) compares the undirected edge sets, so rotations and
    reversals of the same cycle are equal.
    """

    order: np.ndarray
    cost: int

    @classmethod
    def from_order(cls, instance: Instance, order) -> "Tour":
        arr = _as_order(order, instance.m)
        arr.setflags(write=False)
        return cls(arr, int(_cost(instance.dist, arr)))

    @classmethod
    def _trusted(cls, order: np.ndarray, cost) -> "Tour":
        # internal fast path; caller guarantees a valid permutation and cost
        order.setflags(write=False)
        return cls(order, int(cost))

    @property
    def m(self) -> int:
        return self.order.shape[0]

    def __len__(self) -> int:
        return self.order.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tour):
            return NotImplemented
        return (
            self.m == other.m
            and self.cost == other.cost
            and _edge_diff(self.order, other.order) == 0
        )

    def __hash__(self) -> int:
        return hash((self.cost, self.canonical()))

    def canonical(self) -> tuple[int, ...]:
        """Rotation- and reflection-invariant key: start at city 0, walk
        toward the smaller neighbour."""
        o = self.order
        k = int(np.flatnonzero(o == 0)[0])
        rolled = np.roll(o, -k)
        if rolled.shape[0] > 2 and rolled[-1] < rolled[1]:
            rolled = np.concatenate((rolled[:1], rolled[1:][::-1]))
        return tuple(int(c) for c in rolled)

    def edges(self) -> set[tuple[int, int]]:
        o = self.order
        nxt = np.roll(o, -1)
        return {(int(min(a, b)), int(max(a, b))) for a, b in zip(o, nxt)}

    def validate(self, instance: Instance) -> None:
        if not is_permutation(self.order, instance.m):
            raise ValueError("tour is not a permutation")
        real = int(_cost(instance.dist, np.ascontiguousarray(self.order, dtype=np.int32)))
        if real != self.cost:
            raise ValueError(f"cached cost {self.cost} != actual cost {real}")


@dataclass
class Population:
    """Ordered tours plus a per-slot 'already improved by local search' flag."""

    members: list[Tour]
    improved: list[bool] = field(default=None)

    def __post_init__(self):
        if not self.members:
            raise ValueError("a population needs at least one member")
        if self.improved is None:
            self.improved = [False] * len(self.members)
        if len(self.improved) != len(self.members):
            raise ValueError("improved flags must match the number of members")

    @property
    def n(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i) -> Tour:
        return self.members[i]

    def costs(self) -> np.ndarray:
        return np.array([t.cost for t in self.members], dtype=np.int64)

    def best_index(self) -> int:
        return int(np.argmin(self.costs()))

    def best(self) -> Tour:
        return self.members[self.best_index()]

    def as_array(self) -> np.ndarray:
        return np.stack([np.asarray(t.order, dtype=np.int32) for t in self.members])

    @classmethod
    def from_arrays(cls, orders: np.ndarray, costs: Sequence[int], improved=None) -> "Population":
        members = [Tour._trusted(np.array(orders[i], dtype=np.int32), costs[i]) for i in range(len(costs))]
        flags = None if improved is None else [bool(f) for f in improved]
        return cls(members, flags)


def edge_distance(a: Tour, b: Tour) -> int:
    """Number of undirected edges of ``a`` that ``b`` does not use."""
    if a.m != b.m:
        raise ValueError(f"tours over different instances (m={a.m} vs m={b.m})")
    return int(_edge_diff(np.ascontiguousarray(a.order, dtype=np.int32),
                          np.ascontiguousarray(b.order, dtype=np.int32)))


def population_diversity(pop, max_pairs: int | None = None, rng: np.random.Generator | None = None) -> float:
    """Mean edge distance over all ordered pairs of distinct slots.

    ``pop`` is a :class:`Population` or an ``(n, m)`` array of orders. With
    ``max_pairs`` set and fewer pairs than ``n(n-1)`` requested, the mean is
    estimated on that many random ordered pairs drawn from ``rng``.
    """
    arr = pop.as_array() if isinstance(pop, Population) else np.ascontiguousarray(pop, dtype=np.int32)
    n = arr.shape[0]
    if n < 2:
        raise ValueError("diversity undefined for a population of fewer than 2 members")
    if max_pairs is not None and max_pairs < n * (n - 1):
        if rng is None:
            rng = np.random.default_rng(0)
        left = rng.integers(0, n, max_pairs)
        right = rng.integers(0, n - 1, max_pairs)
        right = right + (right >= left)
        return float(_diversity_pairs(arr, left, right)) / max_pairs
    return float(_diversity_sum(arr)) / (n * (n - 1))
