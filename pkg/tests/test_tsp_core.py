import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import cycle_cost, edge_difference, mean_pairwise
from tspdiv.tsp_core import Population, Tour, edge_distance, is_permutation, population_diversity, tour_cost
from tspdiv.tsplib_io import Instance


def perm_pairs(max_m=40):
    return st.integers(3, max_m).flatmap(
        lambda m: st.tuples(st.permutations(range(m)), st.permutations(range(m))))


def tours(inst, *orders):
    return [Tour.from_order(inst, o) for o in orders]


def line_instance(m):
    return Instance("line", np.column_stack([np.arange(m) * 3.0, np.zeros(m)]))


def test_unit_square_cost(unit_square):
    assert tour_cost(unit_square, [0, 1, 2, 3]) == 4


def test_cost_matches_oracle(berlin52, rng):
    for _ in range(50):
        order = rng.permutation(52)
        c = tour_cost(berlin52, order)
        assert c == cycle_cost(berlin52.coords, order)
        assert c == tour_cost(berlin52, order[::-1])
        assert c == tour_cost(berlin52, np.roll(order, 7))


def test_rejects_non_permutation(unit_square):
    with pytest.raises(ValueError):
        tour_cost(unit_square, [0, 1, 1, 3])
    with pytest.raises(ValueError):
        Tour.from_order(unit_square, [0, 1, 2])
    with pytest.raises(ValueError):
        Tour.from_order(unit_square, [0.0, 1.0, 2.0, 3.0])
    assert not is_permutation([0, 1, 4, 3])


def test_edge_distance_examples(unit_square):
    a, b = tours(unit_square, [0, 1, 2, 3], [0, 2, 1, 3])
    assert edge_distance(a, b) == 2
    assert edge_distance(a, a) == 0
    (r,) = tours(unit_square, [3, 2, 1, 0])
    assert edge_distance(a, r) == 0


def test_edge_distance_size_mismatch(unit_square):
    inst5 = line_instance(5)
    with pytest.raises(ValueError):
        edge_distance(Tour.from_order(unit_square, [0, 1, 2, 3]), Tour.from_order(inst5, range(5)))


@given(perm_pairs())
def test_edge_distance_properties(pair):
    a, b = (np.array(x) for x in pair)
    inst = line_instance(len(a))
    ta, tb = tours(inst, a, b)
    d = edge_distance(ta, tb)
    assert d == edge_difference(a, b)
    assert d == edge_distance(tb, ta)
    assert 0 <= d <= len(a)
    assert d != 1
    assert edge_distance(ta, ta) == 0


@given(st.integers(5, 40).flatmap(lambda m: st.tuples(st.permutations(range(m)),
                                                       st.integers(0, m - 1), st.integers(0, m - 1))))
def test_exchange_changes_edge_distance_by_two_or_four(args):
    order, p, q = args
    m = len(order)
    if p == q:
        return
    order = np.array(order)
    swapped = order.copy()
    swapped[[p, q]] = swapped[[q, p]]
    d = edge_difference(order, swapped)
    gap = min(abs(p - q), m - abs(p - q))
    # at cyclic gap 2 the city between the two keeps both of its edges
    assert d == (2 if gap <= 2 else 4)


def test_tour_equality_is_cycle_equality(unit_square):
    a, b, c = tours(unit_square, [0, 1, 2, 3], [2, 1, 0, 3], [0, 2, 1, 3])
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert a.canonical() == b.canonical()


def test_population_diversity_examples(unit_square):
    a, b = tours(unit_square, [0, 1, 2, 3], [0, 2, 1, 3])
    assert population_diversity(Population([a, a, a])) == 0
    assert population_diversity(Population([a, b])) == 2


def test_population_diversity_needs_two(unit_square):
    (a,) = tours(unit_square, [0, 1, 2, 3])
    with pytest.raises(ValueError, match="undefined"):
        population_diversity(Population([a]))


@pytest.mark.parametrize("n", [3, 4, 6])
def test_diversity_closed_form(n, rng):
    # n-1 copies of one tour plus one tour at distance d: D = 2d/n
    m = 30
    inst = line_instance(m)
    base = rng.permutation(m)
    other = rng.permutation(m)
    d = edge_difference(base, other)
    pop = Population(tours(inst, *([base] * (n - 1) + [other])))
    assert population_diversity(pop) == pytest.approx(2 * d / n)


def test_diversity_matches_oracle_and_bounds(rng):
    m = 25
    inst = line_instance(m)
    for n in (2, 5, 9):
        orders = [rng.permutation(m) for _ in range(n)]
        pop = Population(tours(inst, *orders))
        dv = population_diversity(pop)
        assert dv == pytest.approx(mean_pairwise(orders))
        assert 0 <= dv <= m


def test_diversity_subsampling_estimates(rng):
    m, n = 60, 20
    pop = np.array([rng.permutation(m) for _ in range(n)], dtype=np.int32)
    full = population_diversity(pop)
    est = population_diversity(pop, max_pairs=300, rng=np.random.default_rng(3))
    assert abs(est - full) < 0.05 * m


def test_population_flags_and_best(square10):
    a, c = tours(square10, [0, 1, 2, 3], [0, 2, 1, 3])
    pop = Population([c, a])
    assert pop.improved == [False, False]
    assert pop.best_index() == 1 and pop.best() is a
    with pytest.raises(ValueError):
        Population([a, c], [True])
    with pytest.raises(ValueError):
        Population([])


def test_tour_validate(berlin52):
    t = Tour.from_order(berlin52, range(52))
    t.validate(berlin52)
    bad = Tour._trusted(np.arange(52, dtype=np.int32), t.cost + 1)
    with pytest.raises(ValueError):
        bad.validate(berlin52)
