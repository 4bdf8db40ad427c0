import math
import time

import numpy as np
import pytest

from oracles import brute_force_optimum, cycle_cost, random_instance
from tspdiv import algorithms as alg
from tspdiv.algorithms import (
    Algorithm,
    AlgorithmConfig,
    ConfigError,
    Evaluations,
    Generations,
    RunTrace,
    WallClock,
    destruction_bounds,
    run,
    run_ga,
    run_gadegd,
)
from tspdiv.tsp_core import population_diversity

ALL = list(Algorithm)


@pytest.mark.parametrize("a", ALL, ids=lambda a: a.value)
def test_every_runner_is_valid_and_deterministic(a, eil51):
    cfg = AlgorithmConfig(a, seed=99)
    r1 = run(eil51, cfg, Generations(40), check=True, track_diversity=True)
    r2 = run(eil51, cfg, Generations(40), check=True, track_diversity=True)
    assert r1.best.cost == cycle_cost(eil51.coords, r1.best.order)
    assert r1.iterations == 40
    assert r1.best == r2.best and r1.cost == r2.cost
    assert r1.trace.deterministic_view() == r2.trace.deterministic_view()
    for f in ("generated_solutions", "gd_solutions", "ls_calls", "ls_applied_iterations"):
        assert getattr(r1, f) == getattr(r2, f)
    assert r1.gd_solutions <= r1.generated_solutions
    assert r1.ls_applied_iterations <= r1.iterations
    # best-ever never gets worse
    assert all(x >= y for x, y in zip(r1.trace.best, r1.trace.best[1:]))
    assert r1.cost == r1.trace.best[-1]


def test_seed_changes_run(eil51):
    a = run(eil51, AlgorithmConfig("GADEGD", seed=1), Generations(30))
    b = run(eil51, AlgorithmConfig("GADEGD", seed=2), Generations(30))
    assert a.trace.best != b.trace.best


def test_diversity_tracking_does_not_change_search(eil51):
    cfg = AlgorithmConfig("GADEGD", seed=5)
    a = run(eil51, cfg, Generations(60), track_diversity=True, diversity_pairs=50)
    b = run(eil51, cfg, Generations(60))
    assert a.trace.best == b.trace.best
    assert a.trace.subsampled and not b.trace.subsampled


def test_wall_clock_overshoot_is_small(berlin52):
    for a in ("GADEGD", "MADEGD", "CHC", "GRASP", "IG"):
        t = time.perf_counter()
        r = run(berlin52, AlgorithmConfig(a), WallClock(0.3))
        total = time.perf_counter() - t
        assert r.elapsed >= 0.3
        assert total < 0.3 + 0.2


def test_evaluation_budget(berlin52):
    r = run(berlin52, AlgorithmConfig("GA"), Evaluations(1000))
    assert 1000 <= r.generated_solutions < 1000 + 2 * 64 + 64


def test_target_stops_early(berlin52):
    r = run(berlin52, AlgorithmConfig("GRASP", seed=0), WallClock(30), target=8000)
    assert r.cost <= 8000 and r.elapsed < 5


@pytest.mark.parametrize("kwargs", [
    dict(algorithm="GADEGD", p_m=0.1),
    dict(algorithm="GADEGD", p_c=0.5),
    dict(algorithm="GRASP", n=10),
    dict(algorithm="GA", n=63),
    dict(algorithm="GA", characteristic="id"),
    dict(algorithm="GA", p_c=0.0),
    dict(algorithm="MADEGD", n=1),
    dict(algorithm="IG", destroy_min=0.5, destroy_max=0.2),
    dict(algorithm="Tabu"),
    dict(algorithm="GADEGD", characteristic="hamming"),
])
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        AlgorithmConfig.from_dict(kwargs)


def test_config_defaults():
    assert AlgorithmConfig("GADEGD").get("n") == 64
    assert AlgorithmConfig("MADEGD").get("n") == 16
    assert AlgorithmConfig("CHC").get("n") == 60
    assert AlgorithmConfig("MicroGA").get("n") == 5
    ga = AlgorithmConfig("GA").resolved()
    assert (ga.n, ga.p_c, ga.p_m) == (64, 0.7, 0.1)
    gd = AlgorithmConfig("gadegd").resolved()
    assert gd.p_m is None and gd.sigma == 0.1 and gd.characteristic == "id"
    assert AlgorithmConfig.from_dict(AlgorithmConfig("GA", n=32, seed=4).to_dict()) == AlgorithmConfig("GA", n=32, seed=4)


def test_stop_validation():
    for bad in (lambda: WallClock(0), lambda: Generations(0), lambda: Evaluations(-1)):
        with pytest.raises(ConfigError):
            bad()


def test_runner_rejects_other_algorithm(eil51):
    with pytest.raises(ConfigError):
        run_ga(eil51, AlgorithmConfig("GADEGD"), Generations(1))
    with pytest.raises(ConfigError):
        run_gadegd(eil51, AlgorithmConfig("GADEGD_Elitism"), Generations(1))


def test_gadegd_build_step_never_worsens_a_slot(monkeypatch, eil51):
    calls = []
    original = alg._compete_inplace

    def spy(pop, costs, flags, left, children, ccost):
        before = costs.copy()
        out = original(pop, costs, flags, left, children, ccost)
        calls.append((before, costs.copy()))
        return out
    monkeypatch.setattr(alg, "_compete_inplace", spy)
    run(eil51, AlgorithmConfig("GADEGD", seed=3), Generations(50))
    assert len(calls) == 50
    for before, after in calls:
        assert (after <= before).all()


def test_gadegd_without_diversification_converges(eil51):
    r = run(eil51, AlgorithmConfig("GADEGD_NoGD", seed=1), Generations(400), track_diversity=True)
    assert r.gd_solutions == 0
    assert r.trace.diversity[-1] < 0.1 * eil51.m


def test_ga_without_mutation_stays_converged(eil51):
    # an all-identical population can only reproduce itself
    run_ = alg._Run(eil51, AlgorithmConfig("GA", p_m=0.0, seed=0), Generations(1), None, False, None, False)
    one = np.random.default_rng(0).permutation(51).astype(np.int32)
    pop = np.tile(one, (8, 1))
    costs = np.full(8, cycle_cost(eil51.coords, one), dtype=np.int64)
    flags = np.zeros(8, dtype=bool)
    for _ in range(30):
        pop, costs, flags = alg._ga_step(run_, pop, costs, flags)
        assert (pop == one).all()


def test_ga_gd_diversifies_every_generation(monkeypatch, eil51):
    counts = []
    original = alg.diversify_arrays

    def spy(*a, **k):
        counts.append(1)
        return original(*a, **k)
    monkeypatch.setattr(alg, "diversify_arrays", spy)
    r = run(eil51, AlgorithmConfig("GA_GD", seed=2), Generations(25), check=True)
    assert len(counts) == 25 and r.gd_solutions > 0


def test_memetic_flag_lifecycle(eil51):
    r = run(eil51, AlgorithmConfig("MA", seed=0), Generations(60))
    assert r.ls_calls == r.ls_applied_iterations == 60
    r = run(eil51, AlgorithmConfig("MADEGD", seed=0), Generations(60))
    assert r.ls_calls == r.ls_applied_iterations <= 60


def test_madegd_skips_search_when_everyone_is_improved(eil51):
    # n=2 population: after both are improved and nothing new enters, no search runs
    r = run(eil51, AlgorithmConfig("MADEGD", n=2, seed=0), Generations(200))
    assert r.ls_applied_iterations < 200


def test_grasp_and_ig_counters(eil51):
    g = run(eil51, AlgorithmConfig("GRASP", seed=0), Generations(77))
    assert g.ls_calls == g.iterations == g.generated_solutions == 77
    i = run(eil51, AlgorithmConfig("IG", seed=0), Generations(77))
    assert i.ls_calls == i.iterations + 1 == 78


def test_grasp_iterations_are_independent(eil51):
    # first vs last ten local optima of many short runs come from the same distribution
    from tspdiv.construction import greedy_orders
    from tspdiv.local_search import build_neighbor_lists, two_opt_order
    nl = build_neighbor_lists(eil51, 10).lists
    first, last = [], []
    for seed in range(40):
        rng = np.random.Generator(np.random.PCG64(seed))
        vals = []
        for _ in range(30):
            o, _ = greedy_orders(eil51.dist, 1, 0.1, rng)
            vals.append(two_opt_order(eil51.dist, o[0], nl))
        first += vals[:10]
        last += vals[-10:]
    sd = np.std(first + last)
    assert abs(np.mean(first) - np.mean(last)) < 4 * sd / math.sqrt(len(first) / 2)


def test_ig_destruction_bounds():
    assert destruction_bounds(51, 0.1, 0.3) == (6, 16)
    assert destruction_bounds(5, 0.1, 0.3) == (1, 2)
    assert destruction_bounds(3, 0.1, 0.9) == (1, 2)


def test_chc_restart_keeps_best(eil51):
    run_ = alg._Run(eil51, AlgorithmConfig("CHC_GR", seed=0), Generations(1), None, False, None, False)
    pop, costs = run_.random_population(10)
    b = int(np.argmin(costs))
    new, new_costs = alg._restart(run_, pop, costs, greedy=True)
    assert np.array_equal(new[0], pop[b]) and new_costs[0] == costs[b]
    assert new.shape == pop.shape and run_.restarts == 1


def test_chc_and_micro_ga_restart(eil51):
    r = run(eil51, AlgorithmConfig("CHC", seed=0), Generations(600), check=True)
    assert r.restarts >= 1
    r = run(eil51, AlgorithmConfig("MicroGA", seed=0), Generations(300), check=True)
    assert r.restarts >= 1


def test_micro_ga_convergence_detector(eil51, monkeypatch):
    # identical members trigger a restart immediately
    run_ = alg._Run(eil51, AlgorithmConfig("MicroGA_GR", seed=0), Generations(1), None, False, None, True)
    one = np.arange(51, dtype=np.int32)
    monkeypatch.setattr(run_, "random_population",
                        lambda n: (np.tile(one, (n, 1)), np.full(n, cycle_cost(eil51.coords, one), dtype=np.int64)))
    r = alg._run_micro_ga(run_)
    assert r.restarts == 1


def test_micro_ga_size_five(eil51, monkeypatch):
    sizes = []
    original = alg._Run.end_iteration

    def spy(self, pop=None, costs=None):
        sizes.append(pop.shape[0])
        return original(self, pop, costs)
    monkeypatch.setattr(alg._Run, "end_iteration", spy)
    run(eil51, AlgorithmConfig("MicroGA", seed=1), Generations(100))
    assert set(sizes) == {5}


def test_tiny_instances_reach_exhaustive_optimum():
    rng = np.random.default_rng(2024)
    hits = 0
    for k in range(20):
        m = int(rng.integers(5, 9))
        inst = random_instance(rng, m)
        opt = brute_force_optimum(inst)
        r = run(inst, AlgorithmConfig("GADEGD", seed=k), Generations(500), check=True)
        assert r.cost >= opt
        hits += r.cost == opt
    assert hits >= 19


def test_trace_windows():
    t = RunTrace()
    for g, (e, b, d) in enumerate([(0.001, 10, 4.0), (0.004, 9, 2.0), (0.031, 8, 1.0), (0.035, 8, math.nan)], 1):
        t.record(g, e, b, d)
    w = t.windowed(0.01)
    assert [round(x[0], 6) for x in w] == [0.01, 0.02, 0.03, 0.04]
    assert [x[1] for x in w] == [9, 9, 9, 8]
    assert [x[2] for x in w] == [3.0, 3.0, 3.0, 1.0]
    assert RunTrace().windowed(0.01) == []
    with pytest.raises(ValueError):
        t.windowed(0)


def test_diversity_in_trace_matches_population_measure(eil51, monkeypatch):
    pops = []
    original = alg._Run.end_iteration

    def spy(self, pop=None, costs=None):
        pops.append(pop.copy())
        return original(self, pop, costs)
    monkeypatch.setattr(alg._Run, "end_iteration", spy)
    r = run(eil51, AlgorithmConfig("GADEGD", seed=0), Generations(5), track_diversity=True)
    assert r.trace.diversity == pytest.approx([population_diversity(p) for p in pops])
