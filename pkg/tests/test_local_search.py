import numpy as np
import pytest

from oracles import brute_force_optimum, random_instance
from tspdiv.local_search import build_neighbor_lists, two_opt
from tspdiv.tsp_core import Tour, is_permutation, tour_cost


def test_square_lists_tie_by_index(unit_square):
    nl = build_neighbor_lists(unit_square, 2)
    # nint(sqrt 2) = 1, so all three others tie at 1; lowest indices win
    assert nl.lists.tolist() == [[1, 2], [0, 2], [0, 1], [0, 1]]


def test_scaled_square_lists(square10):
    nl = build_neighbor_lists(square10, 2)
    assert [sorted(r) for r in nl.lists.tolist()] == [[1, 3], [0, 2], [1, 3], [0, 2]]


def test_full_lists_are_sorted(berlin52):
    nl = build_neighbor_lists(berlin52, 51)
    d = berlin52.dist
    for c in range(52):
        row = nl[c]
        assert c not in row and len(set(row.tolist())) == 51
        assert (np.diff(d[c, row]) >= 0).all()
    assert np.array_equal(nl.lists, build_neighbor_lists(berlin52, 51).lists)
    with pytest.raises(ValueError):
        build_neighbor_lists(berlin52, 52)


def test_uncrosses_square(square10, unit_square):
    nl = build_neighbor_lists(square10, 3)
    out = two_opt(square10, Tour.from_order(square10, [0, 2, 1, 3]), nl)
    assert out.cost == 40
    assert out == Tour.from_order(square10, [0, 1, 2, 3])
    # on the unit square nint makes every tour cost 4
    t = Tour.from_order(unit_square, [0, 2, 1, 3])
    assert two_opt(unit_square, t, build_neighbor_lists(unit_square, 3)).cost == 4 == t.cost


def test_monotone_valid_idempotent(berlin52):
    rng = np.random.default_rng(3)
    nl10 = build_neighbor_lists(berlin52, 10)
    full = build_neighbor_lists(berlin52, 51)
    for _ in range(30):
        t = Tour.from_order(berlin52, rng.permutation(52))
        for nl in (nl10, full):
            out = two_opt(berlin52, t, nl)
            assert is_permutation(out.order, 52)
            assert out.cost == tour_cost(berlin52, out.order)
            assert out.cost <= t.cost
        once = two_opt(berlin52, t, full)
        assert two_opt(berlin52, once, full).cost == once.cost


def test_full_neighbourhood_is_2opt_optimal(berlin52):
    rng = np.random.default_rng(8)
    d = berlin52.dist
    full = build_neighbor_lists(berlin52, 51)
    out = two_opt(berlin52, Tour.from_order(berlin52, rng.permutation(52)), full).order
    m = 52
    for i in range(m):
        for j in range(i + 2, m):
            a, b = out[i], out[(i + 1) % m]
            c, e = out[j], out[(j + 1) % m]
            if e == a:
                continue
            assert d[a, c] + d[b, e] >= d[a, b] + d[c, e]


def test_never_beats_exhaustive_optimum():
    rng = np.random.default_rng(21)
    equal = 0
    for trial in range(30):
        m = int(rng.integers(5, 9))
        inst = random_instance(rng, m)
        opt = brute_force_optimum(inst)
        nl = build_neighbor_lists(inst, m - 1)
        out = two_opt(inst, Tour.from_order(inst, rng.permutation(m)), nl)
        assert out.cost >= opt
        equal += out.cost == opt
    assert equal >= 15
