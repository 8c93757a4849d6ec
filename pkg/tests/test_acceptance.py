"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with -v to get one pass/fail line per criterion.
"""

import json
import random
import time

import numpy as np
import pytest
from click.testing import CliRunner

from secureplan import abstraction, oracle, planner
from secureplan.abstraction import (
    build_secure_system,
    build_twin,
    project_real,
    restrict_secure_twin,
    restrict_type_b,
)
from secureplan.cli import EXIT_OK, main
from secureplan.feasibility import Role, solve_role
from secureplan.ltl import (
    all_lassos,
    atoms_of,
    eval_ltl_on_lasso,
    ltl_to_nba,
    parse_ltl,
)
from secureplan.planner import brute_force_min_cost, search_prefix_suffix
from secureplan.qp import QpProblem, QpSettings, solve
from secureplan.scenario import bundled_scenario_path, load_scenario

from helpers import all_paths, random_gwts
from test_planner import graph_pba
from test_qp import feasibility_violation, kkt_residual


def test_criterion_grid_fixture_verdicts(grid_gwts):
    """Pinned verdicts on the 6-cell grid fixture, in under a second."""
    t0 = time.perf_counter()
    secure = oracle.check_security([("D", "E"), ("E", "B")], grid_gwts)
    assert secure.type_a.secure
    assert secure.type_a.status == oracle.WITNESS_FOUND
    assert grid_gwts.is_valid_path(list(secure.type_a.witness))
    assert secure.type_b.secure

    violating = oracle.check_security([("A", "B"), ("F", "A")], grid_gwts)
    assert not violating.type_a.secure
    assert violating.type_a.status == oracle.SEARCH_EXHAUSTED
    assert not violating.type_b.secure
    assert (1, 1) in violating.type_b.violations
    assert (2, 1) in violating.type_b.violations
    assert time.perf_counter() - t0 < 1.0


def twin_projections(system, max_len):
    """Real-side projections of the secure twin's paths, computed by
    grouping twin states per projected path so the (often exponentially
    larger) twin path set is never enumerated outright."""
    try:
        secure = restrict_secure_twin(build_twin(system))
    except abstraction.SecurityInfeasibleError:
        return set()

    def real_of(pair):
        return project_real([pair])[0]

    frontier: dict[tuple, set] = {}
    for s in secure.initial:
        frontier.setdefault((real_of(s),), set()).add(s)
    out = set(frontier)
    for _ in range(max_len - 1):
        nxt: dict[tuple, set] = {}
        for rp, group in frontier.items():
            for s in group:
                for d in secure.successors(s):
                    nxt.setdefault(rp + (real_of(d),), set()).add(d)
        out.update(nxt)
        frontier = nxt
    return out


def test_criterion_construction_equals_oracle():
    """Secure-twin construction and brute-force oracle agree path-for-path
    on 200 random two-agent instances, paths up to length 5.

    Type-A: projections of the secure twin are exactly the paths with a
    non-secret observation-identical companion. AB: the same over the
    Type-B restriction, where the companion search happens inside the
    restricted system too.
    """
    t0 = time.perf_counter()
    rng = random.Random(2024)
    checked = 0
    while checked < 200:
        gwts = random_gwts(rng, density=0.35)
        paths = all_paths(gwts, 5)
        # keep exhaustive enumeration tractable
        if len(paths) > 15000:
            continue
        checked += 1
        want_a = {tuple(p) for p in paths
                  if oracle.check_type_a(p, gwts).secure}
        assert twin_projections(gwts, 5) == want_a, \
            f"instance {checked}: plain twin != oracle"
        try:
            tb = restrict_type_b(gwts)
        except abstraction.SecurityInfeasibleError:
            tb = None
        want_ab = set()
        for p in paths:
            if not oracle.check_type_b(p, gwts).secure:
                continue
            # Type-B-secure states are exactly the restriction's survivors
            assert tb is not None and tb.is_valid_path(list(p))
            if oracle.check_type_a(p, tb).secure:
                want_ab.add(tuple(p))
        got_ab = set() if tb is None else twin_projections(tb, 5)
        assert got_ab == want_ab, f"instance {checked}: AB twin != oracle"
    assert time.perf_counter() - t0 < 300.0


CORPUS = [
    "true", "false", "a", "!a",
    "F a", "G a", "X a", "X X a",
    "G F a", "F G a", "G X a", "F X a",
    "a U b", "a R b", "b U a",
    "F (a & b)", "G (a | b)", "F a & F b", "G a | G b",
    "a U (b U a)", "(a U b) U a", "a R (b R a)",
    "G (a | X b)", "F (a & X b)", "X (a U b)",
    "!(a U b)", "!G F a", "!(F a & G b)",
    "G F a & G F b", "F G a | F G b",
    "(a | b) U (a & b)", "G (a U b)",
    "F (a | b)", "G a & F b",
]


def fast_acceptance_checker(nba):
    """Acceptance decision with per-(state set, cycle) memoization."""
    from secureplan.ltl import all_symbols

    symbols = all_symbols(nba.ap)
    delta = {}
    for s in range(nba.num_states):
        for sym in symbols:
            delta[(s, sym)] = frozenset(nba.successors(s, sym))

    def step(states, sym):
        out = set()
        for s in states:
            out |= delta[(s, sym)]
        return frozenset(out)

    cycle_cache = {}

    def accepts_from(states, cycle):
        key = (states, cycle)
        if key in cycle_cache:
            return cycle_cache[key]
        L = len(cycle)
        roots = {(s, 0) for s in states}
        reach = set(roots)
        stack = list(roots)
        while stack:
            s, i = stack.pop()
            for d in delta[(s, cycle[i])]:
                node = (d, (i + 1) % L)
                if node not in reach:
                    reach.add(node)
                    stack.append(node)
        # accepting node on a product cycle?
        ok = False
        acc_nodes = [n for n in reach if n[0] in nba.accepting]
        for node in acc_nodes:
            seen = set()
            stack = [node]
            while stack:
                s, i = stack.pop()
                for d in delta[(s, cycle[i])]:
                    nxt = (d, (i + 1) % L)
                    if nxt == node:
                        ok = True
                        stack = []
                        break
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            if ok:
                break
        cycle_cache[key] = ok
        return ok

    def accepts(prefix, cycle):
        states = frozenset(nba.initial)
        for sym in prefix:
            states = step(states, sym)
            if not states:
                return False
        return accepts_from(states, tuple(cycle))

    return accepts


def test_criterion_ltl_translation_corpus():
    """NBA acceptance equals direct lasso semantics on the whole corpus,
    for every lasso with prefix and cycle up to length 4."""
    assert len(CORPUS) >= 30
    mismatches = []
    for text in CORPUS:
        f = parse_ltl(text)
        assert len(atoms_of(f)) <= 2
        nba = ltl_to_nba(f)
        accepts = fast_acceptance_checker(nba)
        for prefix, cycle in all_lassos(atoms_of(f), 4, 4):
            want = eval_ltl_on_lasso(f, prefix, cycle)
            if accepts(prefix, cycle) != want:
                mismatches.append((text, prefix, cycle))
        # the memoized checker itself must agree with the library routine
        for prefix, cycle in list(all_lassos(atoms_of(f), 1, 2)):
            assert accepts(prefix, cycle) == nba.accepts_lasso(prefix, cycle)
    assert mismatches == [], mismatches[:5]


def test_criterion_planner_matches_brute_force():
    """Prefix-suffix search equals exhaustive enumeration on 100 random
    product graphs of up to 30 states."""
    rng = random.Random(77)
    checked = 0
    while checked < 100:
        n = rng.randint(2, 30)
        p = min(0.5, 2.2 / n)
        edges = {}
        for s in range(n):
            edges[s] = {d: round(rng.uniform(0.1, 5.0), 3)
                        for d in range(n) if rng.random() < p}
        pba = graph_pba(edges, rng.sample(range(n), max(1, n // 4)),
                        rng.sample(range(n), max(1, n // 3)))
        plan = search_prefix_suffix(pba, beta=0.5)
        best = brute_force_min_cost(pba, beta=0.5)
        checked += 1
        if plan is None:
            assert best is None
        else:
            assert best is not None
            assert abs(plan.cost - best) <= 1e-9


@pytest.fixture(scope="module")
def casestudy():
    return load_scenario(bundled_scenario_path("casestudy"))


def test_criterion_barrier_certified_segments(casestudy):
    """Every realizable case-study move, re-simulated by exact forward
    Euler, respects the barrier, crossing, endpoint and input tolerances."""
    from test_feasibility import check_segment_invariants

    part = casestudy.partition
    ag = casestudy.agents[0]
    params = casestudy.params.feasibility()
    moves = [(a, b) for a, b in part.adjacency_pairs()]
    moves += [(r, r) for r in part.region_ids]
    feasible = 0
    for q_from, q_to in sorted(moves):
        seg = solve_role(Role("r", ag, q_from, q_to), params, part)
        if seg is None:
            continue
        feasible += 1
        check_segment_invariants(seg, params, part, ag)
    assert feasible == len(moves)  # this geometry admits every move


def test_criterion_end_to_end_casestudy(tmp_path):
    """`verify` on the bundled seven-region scenario: plans, passes the
    formula and both security oracles, and the replayed trajectory
    projection reproduces the discrete plan -- within the time budget."""
    out = tmp_path / "out"
    t0 = time.perf_counter()
    res = CliRunner().invoke(
        main, ["verify", "--scenario", str(bundled_scenario_path("casestudy")),
               "--out", str(out)])
    elapsed = time.perf_counter() - t0
    assert res.exit_code == EXIT_OK, res.output
    assert "matches the discrete plan" in res.output
    plan = json.loads((out / "plan.json").read_text())
    assert plan["security"] == "AB"
    assert plan["verdicts"]["formula_satisfied"]
    assert plan["verdicts"]["type_a"]["secure"]
    assert plan["verdicts"]["type_b"]["secure"]
    assert plan["cost"] == pytest.approx(
        0.5 * plan["j_prefix"] + 0.5 * plan["j_suffix"])
    assert elapsed < 120.0, f"end-to-end run took {elapsed:.1f}s"


def test_criterion_state_count_bounds(example1, grid_gwts, casestudy):
    """|Q_g| <= |Q|^M, twin <= |Q|^2M, product <= states x NBA states."""
    rng = random.Random(5)
    instances = [(grid_gwts, 6, 2)]
    for _ in range(20):
        gwts = random_gwts(rng)
        nq = max(len({q[0] for q in gwts.states}),
                 len({q[1] for q in gwts.states}))
        instances.append((gwts, nq, 2))
    for gwts, nq, m in instances:
        assert gwts.num_states <= nq ** m
        twin = build_twin(gwts)
        assert twin.num_states <= nq ** (2 * m)
        nba = ltl_to_nba(parse_ltl("true"))
        pba = planner.build_pba(gwts, nba, extra_atoms={"x"})
        assert pba.num_states <= gwts.num_states * nba.num_states
    secure = build_secure_system(grid_gwts, "AB")
    assert secure.num_states <= 6 ** 4


def test_criterion_qp_solver_bulk():
    """500 random PSD problems up to 200 variables: KKT residual <= 1e-5 at
    every reported optimum; constructed-infeasible problems all flagged."""
    rng = np.random.default_rng(99)
    solved = 0
    for _ in range(500):
        n = int(rng.integers(2, 201))
        k = int(rng.integers(1, n + 1))
        M = rng.standard_normal((n, k))
        P = M @ M.T + rng.uniform(0.01, 1.0) * np.eye(n)
        q = rng.standard_normal(n)
        anchor = rng.standard_normal(n)
        A_eq = b_eq = G = h = None
        if rng.random() < 0.5:
            p = int(rng.integers(1, max(2, n // 4)))
            A_eq = rng.standard_normal((p, n))
            b_eq = A_eq @ anchor
        if rng.random() < 0.8:
            m = int(rng.integers(1, n))
            G = rng.standard_normal((m, n))
            h = G @ anchor + rng.uniform(0.05, 2.0, size=m)
        problem = QpProblem(P=P, q=q, A_eq=A_eq, b_eq=b_eq, G=G, h=h)
        sol = solve(problem, QpSettings(eps_prim=1e-8, eps_dual=1e-8))
        assert sol.status == "optimal", f"n={n}: {sol.status}"
        assert feasibility_violation(problem, sol.z) <= 1e-5
        assert kkt_residual(problem, sol.z) <= 1e-5
        solved += 1
    assert solved == 500

    rng2 = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng2.integers(1, 30))
        c = rng2.standard_normal(n)
        c /= np.linalg.norm(c)
        # c.z >= 1 and c.z <= 0 simultaneously: empty by construction
        problem = QpProblem(P=np.eye(n), q=np.zeros(n),
                            G=np.vstack([-c, c]), h=np.array([-1.0, 0.0]))
        assert solve(problem).status == "primal_infeasible"
