"""Planner tests: product construction, prefix-suffix search arithmetic,
brute-force optimality, monotonicity, and trajectory assembly."""

import random

import numpy as np
import pytest

from secureplan.abstraction import TransitionSystem
from secureplan.feasibility import FeasibilityParams, SegmentCache, solve_role
from secureplan.ltl import ltl_to_nba, parse_ltl
from secureplan.planner import (
    ConfigurationError,
    PlannerError,
    ProductAutomaton,
    assemble_trajectory,
    brute_force_min_cost,
    build_pba,
    plan_trace,
    search_prefix_suffix,
)


def simple_system(labels_by_state, edges, initial):
    states = tuple(sorted(labels_by_state))
    return TransitionSystem(
        states, frozenset(initial),
        {s: dict(t) for s, t in edges.items()},
        {s: frozenset(v) for s, v in labels_by_state.items()})


def graph_pba(edges, initial, accepting):
    """Bare product automaton from an integer-labeled weighted digraph."""
    states = tuple(sorted({s for s in edges} |
                          {d for t in edges.values() for d in t}))
    return ProductAutomaton(states=states, initial=frozenset(initial),
                            accepting=frozenset(accepting),
                            edges={s: dict(t) for s, t in edges.items()},
                            system=None, nba=None)


def test_build_pba_self_loop():
    system = simple_system({"q": {"p"}}, {"q": {"q": 1.0}}, ["q"])
    nba = ltl_to_nba(parse_ltl("F p"))
    pba = build_pba(system, nba)
    plan = search_prefix_suffix(pba)
    assert plan is not None
    assert plan.j_suffix == pytest.approx(1.0)


def test_build_pba_blocks_forbidden_labels():
    system = simple_system(
        {"a": set(), "b": {"obs"}},
        {"a": {"a": 0.1, "b": 1.0}, "b": {"a": 1.0, "b": 0.1}}, ["a"])
    nba = ltl_to_nba(parse_ltl("G !obs"))
    pba = build_pba(system, nba)
    # the obs-labeled state acquires no product states at all
    assert all(q != "b" for q, _ in pba.states)
    assert pba.num_states <= system.num_states * nba.num_states


def test_build_pba_unknown_atom_errors():
    system = simple_system({"q": {"mystery"}}, {"q": {"q": 1.0}}, ["q"])
    nba = ltl_to_nba(parse_ltl("F p"))
    with pytest.raises(ConfigurationError):
        build_pba(system, nba)
    pba = build_pba(system, nba, extra_atoms={"mystery"})
    assert pba.num_states > 0


def test_search_arithmetic_single_accepting():
    pba = graph_pba({0: {1: 3.0}, 1: {1: 4.0}}, [0], [1])
    plan = search_prefix_suffix(pba, beta=0.5)
    assert plan.j_prefix == pytest.approx(3.0)
    assert plan.j_suffix == pytest.approx(4.0)
    assert plan.cost == pytest.approx(3.5)
    assert plan.prefix == (0,) and plan.suffix == (1,)


def test_search_picks_better_tradeoff():
    # accepting 1: (J_pre, J_suf) = (2, 10); accepting 2: (5, 4)
    pba = graph_pba({0: {1: 2.0, 2: 5.0}, 1: {1: 10.0}, 2: {2: 4.0}},
                    [0], [1, 2])
    plan = search_prefix_suffix(pba, beta=0.5)
    assert plan.cost == pytest.approx(4.5)
    assert plan.suffix == (2,)


def test_search_infeasible_and_beta_validation():
    # accepting state reachable but on no cycle
    pba = graph_pba({0: {1: 1.0}, 1: {}}, [0], [1])
    assert search_prefix_suffix(pba) is None
    assert search_prefix_suffix(graph_pba({0: {0: 1.0}}, [], [0])) is None
    with pytest.raises(PlannerError):
        search_prefix_suffix(graph_pba({0: {0: 1.0}}, [0], [0]), beta=1.5)


def test_accepting_initial_state_zero_prefix():
    pba = graph_pba({0: {0: 2.0}}, [0], [0])
    plan = search_prefix_suffix(pba, beta=0.5)
    assert plan.j_prefix == 0.0
    assert plan.j_suffix == pytest.approx(2.0)
    assert plan.prefix == ()
    assert plan.suffix == (0,)


def test_suffix_closes_on_itself():
    pba = graph_pba({0: {1: 1.0}, 1: {2: 1.0}, 2: {1: 2.0}}, [0], [1])
    plan = search_prefix_suffix(pba, beta=0.5)
    assert plan.suffix[0] == 1
    last = plan.suffix[-1]
    assert plan.suffix[0] in pba.edges[last]
    assert plan.j_suffix == pytest.approx(3.0)


def random_pba(rng: random.Random, max_states=12):
    n = rng.randint(2, max_states)
    edges = {}
    for s in range(n):
        targets = {}
        for d in range(n):
            if rng.random() < 0.3:
                targets[d] = round(rng.uniform(0.1, 5.0), 3)
        edges[s] = targets
    initial = rng.sample(range(n), rng.randint(1, max(1, n // 3)))
    accepting = rng.sample(range(n), rng.randint(1, max(1, n // 2)))
    return graph_pba(edges, initial, accepting)


def test_matches_brute_force_on_random_graphs():
    rng = random.Random(123)
    for _ in range(50):
        pba = random_pba(rng)
        plan = search_prefix_suffix(pba, beta=0.5)
        best = brute_force_min_cost(pba, beta=0.5)
        if plan is None:
            assert best is None
        else:
            assert best is not None
            assert plan.cost == pytest.approx(best, abs=1e-9)


def test_edge_removal_never_helps():
    rng = random.Random(321)
    tried = 0
    while tried < 15:
        pba = random_pba(rng)
        plan = search_prefix_suffix(pba, beta=0.5)
        if plan is None:
            continue
        tried += 1
        srcs = [s for s in pba.states if pba.edges.get(s)]
        s = rng.choice(srcs)
        d = rng.choice(sorted(pba.edges[s]))
        thinner = ProductAutomaton(
            states=pba.states, initial=pba.initial, accepting=pba.accepting,
            edges={k: {dd: w for dd, w in t.items() if (k, dd) != (s, d)}
                   for k, t in pba.edges.items()},
            system=None, nba=None)
        thin_plan = search_prefix_suffix(thinner, beta=0.5)
        assert thin_plan is None or thin_plan.cost >= plan.cost - 1e-12


def test_plan_trace(example1, grid_gwts):
    nba = ltl_to_nba(parse_ltl("true"))
    pba = build_pba(grid_gwts, nba)
    plan = search_prefix_suffix(pba, beta=0.5)
    prefix_syms, cycle_syms = plan_trace(plan, grid_gwts)
    assert len(prefix_syms) == len(plan.prefix)
    assert len(cycle_syms) == len(plan.suffix)
    assert all(isinstance(s, frozenset) for s in prefix_syms + cycle_syms)


@pytest.fixture(scope="module")
def grid_cache(example1):
    """Segments for a couple of grid moves, prefilled."""
    params = FeasibilityParams(t_f=2.0, N=20)
    cache = SegmentCache()
    from secureplan.feasibility import Role

    for ag in example1.agents:
        for move in (("C", "C"), ("C", "B"), ("B", "C"), ("B", "B")):
            key = SegmentCache.key(ag.name, *move)
            cache.put(key, solve_role(Role("r", ag, *move), params,
                                      example1.partition))
    return params, cache


def test_assemble_self_loop_plan(example1, grid_cache):
    params, cache = grid_cache
    plan_obj = make_plan(prefix=(), suffix=((("C", "C"), 0),))
    bundle = assemble_trajectory(plan_obj, cache, params,
                                 list(example1.agents), example1.partition,
                                 twin_mode=False, suffix_repeats=2)
    assert len(bundle.tracks) == 2
    track = bundle.tracks[0]
    # two unrolled self-loop segments sharing joints
    assert len(track.times) == 2 * params.N + 1
    start = example1.partition.point("C")
    np.testing.assert_allclose(track.x[0], start, atol=1e-9)
    np.testing.assert_allclose(track.x[-1], start, atol=1e-9)
    assert bundle.suffix_start_time == 0.0
    assert bundle.suffix_period == params.t_f


def make_plan(prefix, suffix):
    from secureplan.planner import PrefixSuffixPlan

    return PrefixSuffixPlan(prefix=prefix, suffix=suffix,
                            j_prefix=0.0, j_suffix=1.0, beta=0.5)


def test_assemble_two_step_plan(example1, grid_cache):
    params, cache = grid_cache
    plan_obj = make_plan(prefix=((("C", "C"), 0),),
                         suffix=((("B", "B"), 1), (("C", "C"), 1)))
    bundle = assemble_trajectory(plan_obj, cache, params,
                                 list(example1.agents), example1.partition,
                                 twin_mode=False, suffix_repeats=2)
    track = bundle.tracks[0]
    # prefix step + 2 unrolled cycles + closing segment = 5 segments
    assert len(track.times) == 5 * params.N + 1
    assert bundle.suffix_start_time == pytest.approx(params.t_f)
    assert bundle.suffix_period == pytest.approx(2 * params.t_f)
    # time grid is uniform and continuous across joints
    diffs = np.diff(track.times)
    np.testing.assert_allclose(diffs, params.dt, atol=1e-12)
    # starts in the prefix region; the closing segment returns to the
    # suffix's first region
    assert track.regions[0] == "C"
    assert track.regions[-1] == "B"


def test_assemble_missing_segment_raises(example1, grid_cache):
    params, cache = grid_cache
    plan_obj = make_plan(prefix=(), suffix=((("A", "A"), 0),))
    with pytest.raises(PlannerError):
        assemble_trajectory(plan_obj, cache, params, list(example1.agents),
                            example1.partition, twin_mode=False)
