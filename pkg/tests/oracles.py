"""Slow, obviously-correct reference implementations used as test oracles."""
from __future__ import annotations

import itertools
import math

import numpy as np

from tspdiv.tsplib_io import Instance


def nint_distance(a, b) -> int:
    # TSPLIB nint: round half up
    return int(math.floor(math.hypot(a[0] - b[0], a[1] - b[1]) + 0.5))


def cycle_cost(coords, order) -> int:
    return sum(nint_distance(coords[order[k - 1]], coords[order[k]]) for k in range(len(order)))


def edge_set(order) -> set[frozenset]:
    return {frozenset((int(order[k - 1]), int(order[k]))) for k in range(len(order))}


def edge_difference(a, b) -> int:
    return len(edge_set(a) - edge_set(b))


def brute_force_optimum(instance: Instance) -> int:
    """Exhaustive search over (m-1)!/2 cycles with city 0 fixed."""
    m = instance.m
    d = instance.dist
    best = None
    for rest in itertools.permutations(range(1, m)):
        if rest[0] > rest[-1]:
            continue
        order = (0,) + rest
        c = sum(int(d[order[k - 1], order[k]]) for k in range(m))
        if best is None or c < best:
            best = c
    return best


def reference_ox(p1, p2, i, j):
    """OX as usually described: copy p1[i..j]; walk p2 cyclically from j+1,
    writing unseen cities into the child cyclically from j+1."""
    m = len(p1)
    child = [None] * m
    child[i:j + 1] = p1[i:j + 1]
    kept = set(p1[i:j + 1])
    fill = [p2[(j + 1 + k) % m] for k in range(m) if p2[(j + 1 + k) % m] not in kept]
    slots = [(j + 1 + k) % m for k in range(m - (j - i + 1))]
    for s, c in zip(slots, fill):
        child[s] = c
    return child


def random_instance(rng: np.random.Generator, m: int, scale: int = 1000) -> Instance:
    coords = rng.integers(0, scale, (m, 2)).astype(float)
    return Instance(f"rand{m}", coords)


def mean_pairwise(pop) -> float:
    n = len(pop)
    tot = sum(edge_difference(pop[i], pop[j]) for i in range(n) for j in range(n) if i != j)
    return tot / (n * (n - 1))
