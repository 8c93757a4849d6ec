"""Product automaton construction and prefix-suffix plan search.

The secure transition system is synchronized with the Büchi automaton of
the task formula; an optimal lasso plan is found by per-accepting-state
Dijkstra searches (shortest prefix from the initial states, shortest cycle
back through the accepting state), minimizing beta * J_prefix +
(1 - beta) * J_suffix.  All tie-breaks are by canonical state order, so
results are deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .abstraction import TransitionSystem
from .ltl import BuchiAutomaton


class PlannerError(Exception):
    pass


class ConfigurationError(PlannerError):
    pass


def _key(state):
    return repr(state)


@dataclass
class ProductAutomaton:
    """Reachable product of the secure system with the NBA."""

    states: tuple
    initial: frozenset
    accepting: frozenset
    edges: dict  # (q, s) -> {(q', s'): w}
    system: TransitionSystem
    nba: BuchiAutomaton

    @property
    def num_states(self) -> int:
        return len(self.states)

    def successors(self, state):
        return self.edges.get(state, {})


def build_pba(system: TransitionSystem, nba: BuchiAutomaton,
              extra_atoms=()) -> ProductAutomaton:
    """Forward exploration from the initial product states.

    A product state is (system state, automaton state); moving to q'
    consumes the symbol flatten(L(q')).  The automaton reads the first
    state's label while leaving its own initial states, so the product
    initial set is {(q0, s) : s reachable from some NBA-initial state on
    flatten(L(q0))}.
    """
    known = set(nba.ap) | set(extra_atoms)
    for q in system.states:
        unknown = set(system.labels[q]) - known
        if unknown:
            raise ConfigurationError(
                f"state {q!r} carries atoms unknown to the automaton: "
                f"{sorted(unknown)}")

    initial = set()
    for q in sorted(system.initial, key=_key):
        sym = system.labels[q]
        for s0 in sorted(nba.initial):
            for s in sorted(nba.successors(s0, sym)):
                initial.add((q, s))
    edges: dict = {}
    frontier = sorted(initial, key=_key)
    seen = set(initial)
    while frontier:
        nxt_frontier = []
        for q, s in frontier:
            targets = {}
            for qn, w in system.successors(q).items():
                for sn in nba.successors(s, system.labels[qn]):
                    targets[(qn, sn)] = w
                    if (qn, sn) not in seen:
                        seen.add((qn, sn))
                        nxt_frontier.append((qn, sn))
            edges[(q, s)] = targets
        frontier = sorted(nxt_frontier, key=_key)
    states = tuple(sorted(seen, key=_key))
    assert len(states) <= system.num_states * nba.num_states
    accepting = frozenset(p for p in states if p[1] in nba.accepting)
    return ProductAutomaton(states, frozenset(initial), accepting, edges,
                            system, nba)


@dataclass(frozen=True)
class PrefixSuffixPlan:
    """Lasso plan: prefix once, then the suffix cycle forever.

    ``prefix`` excludes the accepting state; ``suffix`` starts at it and
    closes back on itself, so the discrete path is prefix + suffix^omega.
    """

    prefix: tuple
    suffix: tuple
    j_prefix: float
    j_suffix: float
    beta: float

    @property
    def cost(self) -> float:
        return self.beta * self.j_prefix + (1.0 - self.beta) * self.j_suffix

    @property
    def states(self) -> tuple:
        return self.prefix + self.suffix

    def system_prefix(self) -> list:
        return [q for q, _ in self.prefix]

    def system_suffix(self) -> list:
        return [q for q, _ in self.suffix]


def _dijkstra(sources, adj, keys):
    """Distances and parents from a set of sources.

    ``adj`` maps each node to a key-sorted (neighbor, weight) list and
    ``keys`` holds precomputed canonical keys.  Deterministic: the heap
    orders by (distance, canonical key) and neighbors are visited in
    canonical order, so equal-cost alternatives always settle identically.
    """
    dist = {s: 0.0 for s in sources}
    parent = {s: None for s in sources}
    heap = [(0.0, keys[s], s) for s in sources]
    heapq.heapify(heap)
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj.get(u, ()):
            nd = d + w
            if v not in done and (v not in dist or nd < dist[v] - 1e-15):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, keys[v], v))
    return dist, parent


def _walk_back(parent, end) -> list:
    path = [end]
    while parent[path[0]] is not None:
        path.insert(0, parent[path[0]])
    return path


def search_prefix_suffix(pba: ProductAutomaton,
                         beta: float = 0.5) -> PrefixSuffixPlan | None:
    """Optimal prefix-suffix plan, or None when the task is infeasible.

    For each accepting state: shortest prefix from the initial set, and
    shortest cycle through it (minimum over first cycle edges of edge
    weight plus the distance back).  A zero-length suffix is disallowed;
    a self-loop is the shortest admissible cycle.
    """
    if not 0.0 <= beta <= 1.0:
        raise PlannerError(f"beta must lie in [0, 1], got {beta}")
    if not pba.initial:
        return None
    keys = {s: _key(s) for s in pba.states}
    fwd = {u: sorted(t.items(), key=lambda kv: keys[kv[0]])
           for u, t in pba.edges.items()}
    rev: dict = {}
    for u, targets in pba.edges.items():
        for v, w in targets.items():
            rev.setdefault(v, []).append((u, w))
    for v in rev:
        rev[v].sort(key=lambda vw: keys[vw[0]])

    dist0, parent0 = _dijkstra(sorted(pba.initial, key=_key), fwd, keys)

    best = None
    reachable_acc = sorted((a for a in pba.accepting if a in dist0),
                           key=lambda a: (dist0[a], keys[a]))
    for acc in reachable_acc:
        # suffix costs are positive, so once beta * J_prefix alone beats the
        # incumbent no later accepting state (sorted by J_prefix) can win
        if best is not None and beta * dist0[acc] > best[0][0]:
            break
        dist_back, parent_back = _dijkstra([acc], rev, keys)
        j_suffix = None
        first_hop = None
        for v, w in fwd.get(acc, ()):
            if v not in dist_back:
                continue
            cand = w + dist_back[v]
            if j_suffix is None or cand < j_suffix - 1e-15:
                j_suffix = cand
                first_hop = v
        if j_suffix is None:
            continue
        j_prefix = dist0[acc]
        cost = beta * j_prefix + (1.0 - beta) * j_suffix
        rank = (cost, j_prefix, _key(acc))
        if best is None or rank < best[0]:
            prefix_full = _walk_back(parent0, acc)
            cycle = list(reversed(_walk_back(parent_back, first_hop)))
            plan = PrefixSuffixPlan(
                prefix=tuple(prefix_full[:-1]),
                suffix=tuple([acc] + cycle[:-1]) if cycle[-1] == acc
                else tuple([acc] + cycle),
                j_prefix=j_prefix, j_suffix=j_suffix, beta=beta)
            best = (rank, plan)
    return None if best is None else best[1]


def brute_force_min_cost(pba: ProductAutomaton, beta: float = 0.5):
    """Exhaustive optimum over simple prefixes and simple cycles through a
    single accepting state.  Test oracle; exponential."""

    def path_cost(path):
        return sum(pba.edges[a][b] for a, b in zip(path, path[1:]))

    def min_simple_path(start, goal):
        """Cheapest simple path start -> goal taking at least one edge."""
        best = None
        stack = [([start], {start})]
        while stack:
            path, seen = stack.pop()
            for v, w in pba.successors(path[-1]).items():
                if v == goal:
                    c = path_cost(path + [v])
                    if best is None or c < best:
                        best = c
                elif v not in seen:
                    stack.append((path + [v], seen | {v}))
        return best

    best = None
    for acc in pba.accepting:
        jp_candidates = [0.0] if acc in pba.initial else []
        jp_candidates += [c for q0 in pba.initial
                          if (c := min_simple_path(q0, acc)) is not None]
        if not jp_candidates:
            continue
        js = min_simple_path(acc, acc)
        if js is None:
            continue
        cost = beta * min(jp_candidates) + (1.0 - beta) * js
        if best is None or cost < best:
            best = cost
    return best


def plan_trace(plan: PrefixSuffixPlan, system: TransitionSystem):
    """(prefix symbols, cycle symbols) of the plan's discrete path."""
    return ([system.labels[q] for q in plan.system_prefix()],
            [system.labels[q] for q in plan.system_suffix()])


@dataclass
class AgentTrack:
    agent_name: str
    role: str  # "real" or "copy"
    times: list = field(default_factory=list)
    x: list = field(default_factory=list)
    u: list = field(default_factory=list)
    regions: list = field(default_factory=list)


@dataclass
class TrajectoryBundle:
    tracks: list
    dt: float
    suffix_start_time: float
    suffix_period: float
    suffix_repeats: int


def assemble_trajectory(plan: PrefixSuffixPlan, cache, params, agents,
                        partition, twin_mode: bool,
                        suffix_repeats: int = 2) -> TrajectoryBundle:
    """Concatenate cached per-transition segments along the plan.

    The suffix is unrolled ``suffix_repeats`` times.  Segment joints
    coincide at region representative points, so tracks are continuous.
    """
    from .feasibility import SegmentCache, transition_roles

    states = list(plan.prefix) + list(plan.suffix) * suffix_repeats \
        + [plan.suffix[0]]
    sys_states = [q for q, _ in states]
    roles_template = transition_roles(sys_states[0], sys_states[0], agents,
                                      twin_mode)
    tracks = {}
    for role in roles_template:
        kind, idx = role.name.split("_")
        tracks[role.name] = AgentTrack(agents[int(idx) - 1].name, kind)

    N, dt = params.N, params.dt
    t0 = 0.0
    for a, b in zip(sys_states, sys_states[1:]):
        roles = transition_roles(a, b, agents, twin_mode)
        for role in roles:
            seg = cache.entries.get(
                SegmentCache.key(role.agent.name, role.q_from, role.q_to))
            if not seg:
                raise PlannerError(
                    f"missing cached segment for {role.agent.name} "
                    f"{role.q_from}->{role.q_to}")
            tr = tracks[role.name]
            start = 0 if not tr.times else 1  # joints share a sample
            for k in range(start, N + 1):
                tr.times.append(t0 + k * dt)
                tr.x.append(seg.x[k])
                tr.u.append(seg.u[k] if k < N else seg.u[N - 1])
                tr.regions.append(role.q_from if k < seg.crossing_index
                                  else role.q_to)
        t0 += params.t_f
    prefix_steps = len(plan.prefix)
    return TrajectoryBundle(
        tracks=list(tracks.values()), dt=dt,
        suffix_start_time=prefix_steps * params.t_f,
        suffix_period=len(plan.suffix) * params.t_f,
        suffix_repeats=suffix_repeats)
