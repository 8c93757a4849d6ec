"""Transition-system abstractions of multi-agent motion.

Per-agent systems are built from the partition adjacency, composed into a
synchronous global product, and then restricted into the secure variants:
the Type-B system (anonymity of the performer), the twin system over
observation-matched state pairs, and the secure twin system (plausible
deniability).  All constructions are pure and return immutable-by-convention
structures with canonically sorted state orders, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import HPolytope, Partition, validate_polytope

DEFAULT_SELF_LOOP_WEIGHT = 0.1


class AbstractionError(Exception):
    pass


class SecurityInfeasibleError(AbstractionError):
    """The secure restriction removed every initial state."""

    def __init__(self, message: str, removed_states: int, kept_states: int):
        super().__init__(message)
        self.removed_states = removed_states
        self.kept_states = kept_states


@dataclass(frozen=True)
class AgentModel:
    """Affine agent x' = A x + B u + b with labels, observations and secrets."""

    name: str
    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    input_poly: HPolytope
    initial_regions: frozenset[str]
    secret_regions: frozenset[str]
    observation: dict[str, str]
    labels: dict[str, frozenset[str]]

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or b.shape != (n,) or B.shape[0] != n:
            raise AbstractionError(f"agent {self.name}: inconsistent dynamics shapes")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "labels",
                           {k: frozenset(v) for k, v in self.labels.items()})
        object.__setattr__(self, "initial_regions", frozenset(self.initial_regions))
        object.__setattr__(self, "secret_regions", frozenset(self.secret_regions))

    def check(self, partition: Partition, require_nonsecret: bool = False) -> None:
        ids = set(partition.region_ids)
        for group, name in ((self.initial_regions, "initial"),
                            (self.secret_regions, "secret")):
            missing = set(group) - ids
            if missing:
                raise AbstractionError(
                    f"agent {self.name}: unknown {name} regions {sorted(missing)}")
        missing = ids - set(self.observation)
        if missing:
            raise AbstractionError(
                f"agent {self.name}: observation map misses {sorted(missing)}")
        report = validate_polytope(self.input_poly)
        if not report.ok:
            raise AbstractionError(
                f"agent {self.name}: input set must be bounded and full-dimensional")
        if require_nonsecret:
            # degenerate for deniability: no non-secret state to hide behind
            if not ids - self.secret_regions or \
                    not self.initial_regions - self.secret_regions:
                raise AbstractionError(
                    f"agent {self.name}: needs a non-secret state and a "
                    "non-secret initial state")


@dataclass(frozen=True)
class TransitionSystem:
    """Weighted labeled transition system with optional observations/secrets.

    States are opaque hashables (region ids, global tuples, or twin pairs).
    ``secret[state]`` is a tuple of per-agent flags; for twin states the flag
    is true when both the real and copy component of that agent are secret.
    """

    states: tuple
    initial: frozenset
    edges: dict
    labels: dict
    obs: dict = field(default_factory=dict)
    secret: dict = field(default_factory=dict)

    def __post_init__(self):
        state_set = set(self.states)
        if not self.initial <= state_set:
            raise AbstractionError("initial states outside the state set")
        for src, targets in self.edges.items():
            if src not in state_set:
                raise AbstractionError(f"edge source {src!r} not a state")
            for dst, w in targets.items():
                if dst not in state_set:
                    raise AbstractionError(f"edge target {dst!r} not a state")
                if not w > 0:
                    raise AbstractionError(
                        f"weight of ({src!r}, {dst!r}) must be positive, got {w}")

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_edges(self) -> int:
        return sum(len(t) for t in self.edges.values())

    def successors(self, state):
        return self.edges.get(state, {})

    def weight(self, src, dst) -> float:
        return self.edges[src][dst]

    def has_edge(self, src, dst) -> bool:
        return dst in self.edges.get(src, {})

    def is_valid_path(self, path) -> bool:
        if not path or path[0] not in self.initial:
            return False
        return all(self.has_edge(a, b) for a, b in zip(path, path[1:]))

    def is_valid_fragment(self, path) -> bool:
        """Like is_valid_path but without the initial-state requirement."""
        if not path or path[0] not in set(self.states):
            return False
        return all(self.has_edge(a, b) for a, b in zip(path, path[1:]))

    def to_adjacency_dict(self) -> dict:
        """JSON-friendly dump for debugging."""
        def key(state):
            return repr(state)
        return {
            "states": [key(s) for s in self.states],
            "initial": sorted(key(s) for s in self.initial),
            "edges": {key(s): {key(d): w for d, w in sorted(t.items(), key=lambda kv: repr(kv[0]))}
                      for s, t in sorted(self.edges.items(), key=lambda kv: repr(kv[0]))},
            "labels": {key(s): sorted(l) for s, l in self.labels.items()},
        }


def build_wts(partition: Partition, agent: AgentModel,
              weight_rule: str = "centroid",
              self_loop_weight: float = DEFAULT_SELF_LOOP_WEIGHT,
              ) -> TransitionSystem:
    """Per-agent system over partition regions.

    Transitions are the facet-adjacency pairs plus self-loops; dynamical
    feasibility is pruned later.  Weights: Euclidean distance between region
    representative points for moves, a fixed positive weight for self-loops.
    """
    if weight_rule != "centroid":
        raise AbstractionError(f"unknown weight rule {weight_rule!r}")
    if not self_loop_weight > 0:
        raise AbstractionError("self-loop weight must be positive")
    agent.check(partition)
    states = tuple(sorted(partition.region_ids))
    edges: dict = {s: {} for s in states}
    for s in states:
        edges[s][s] = self_loop_weight
    for a, b in partition.adjacency_pairs():
        edges[a][b] = float(np.linalg.norm(partition.point(a) - partition.point(b)))
    labels = {s: agent.labels.get(s, frozenset()) for s in states}
    obs = {s: agent.observation[s] for s in states}
    secret = {s: (s in agent.secret_regions,) for s in states}
    return TransitionSystem(states, frozenset(agent.initial_regions),
                            edges, labels, obs, secret)


def flatten_labels(per_agent_labels) -> frozenset[str]:
    """Tuple label -> plain symbol: the union of the agent-suffixed atoms."""
    out: set[str] = set()
    for atoms in per_agent_labels:
        out |= set(atoms)
    return frozenset(out)


def product_gwts(wts_list) -> TransitionSystem:
    """Synchronous product with summed weights and flattened tuple labels."""
    if not wts_list:
        raise AbstractionError("need at least one agent system")
    m = len(wts_list)
    states: list[tuple] = [()]
    for ts in wts_list:
        states = [s + (q,) for s in states for q in ts.states]
    states.sort()
    initial = frozenset(
        s for s in states if all(s[i] in wts_list[i].initial for i in range(m)))
    edges: dict = {}
    for src in states:
        targets: dict = {}
        per_agent_succ = [wts_list[i].successors(src[i]) for i in range(m)]
        dsts: list[tuple] = [()]
        for succ in per_agent_succ:
            dsts = [d + (q,) for d in dsts for q in succ]
        for dst in dsts:
            targets[dst] = sum(per_agent_succ[i][dst[i]] for i in range(m))
        edges[src] = targets
    labels = {s: flatten_labels(wts_list[i].labels[s[i]] for i in range(m))
              for s in states}
    obs = {s: tuple(wts_list[i].obs[s[i]] for i in range(m)) for s in states}
    secret = {s: tuple(wts_list[i].secret[s[i]][0] for i in range(m)) for s in states}
    num_regions = max(len(ts.states) for ts in wts_list)
    assert len(states) <= num_regions ** m
    return TransitionSystem(tuple(states), initial, edges, labels, obs, secret)


def _restrict_states(ts: TransitionSystem, keep) -> TransitionSystem:
    keep = set(keep)
    states = tuple(s for s in ts.states if s in keep)
    edges = {s: {d: w for d, w in ts.successors(s).items() if d in keep}
             for s in states}
    return TransitionSystem(
        states,
        frozenset(s for s in ts.initial if s in keep),
        edges,
        {s: ts.labels[s] for s in states},
        {s: ts.obs[s] for s in states} if ts.obs else {},
        {s: ts.secret[s] for s in states} if ts.secret else {},
    )


def type_b_ok(obs: tuple, secret: tuple) -> bool:
    """Anonymity condition for a global state: every secret component's
    observation is shared by some other agent."""
    m = len(obs)
    for i in range(m):
        if secret[i] and not any(obs[k] == obs[i] for k in range(m) if k != i):
            return False
    return True


def restrict_type_b(gwts: TransitionSystem) -> TransitionSystem:
    """Drop global states that would expose which agent is on a secret."""
    keep = [s for s in gwts.states if type_b_ok(gwts.obs[s], gwts.secret[s])]
    out = _restrict_states(gwts, keep)
    if not out.initial:
        raise SecurityInfeasibleError(
            "anonymity restriction removed all initial states",
            removed_states=gwts.num_states - out.num_states,
            kept_states=out.num_states)
    return out


def build_twin(gwts: TransitionSystem) -> TransitionSystem:
    """Twin system over observation-matched pairs of global states.

    Weights and labels come from the real (first) component; a twin edge
    exists when both components move in the base system and the targets are
    observation-matched.
    """
    matched: dict = {}
    for q1 in gwts.states:
        for q2 in gwts.states:
            if gwts.obs[q1] == gwts.obs[q2]:
                matched.setdefault(q1, []).append(q2)
    states = tuple(sorted(
        (q1, q2) for q1 in gwts.states for q2 in matched.get(q1, [])))
    assert len(states) <= gwts.num_states ** 2
    initial = frozenset(
        (q1, q2) for q1, q2 in states
        if q1 in gwts.initial and q2 in gwts.initial)
    edges: dict = {}
    for q1, q2 in states:
        targets: dict = {}
        for q1n, w in gwts.successors(q1).items():
            for q2n in gwts.successors(q2):
                if gwts.obs[q1n] == gwts.obs[q2n]:
                    targets[(q1n, q2n)] = w
        edges[(q1, q2)] = targets
    labels = {s: gwts.labels[s[0]] for s in states}
    obs = {s: gwts.obs[s[0]] for s in states}
    secret = {(q1, q2): tuple(a and b for a, b in zip(gwts.secret[q1], gwts.secret[q2]))
              for q1, q2 in states}
    return TransitionSystem(states, initial, edges, labels, obs, secret)


def restrict_secure_twin(twin: TransitionSystem) -> TransitionSystem:
    """Drop twin states where some agent is secret on both sides."""
    keep = [s for s in twin.states if not any(twin.secret[s])]
    out = _restrict_states(twin, keep)
    if not out.initial:
        raise SecurityInfeasibleError(
            "deniability restriction removed all initial twin states",
            removed_states=twin.num_states - out.num_states,
            kept_states=out.num_states)
    return out


def project_real(twin_path) -> list:
    """First-component projection of a twin path."""
    return [state[0] for state in twin_path]


def project_copy(twin_path) -> list:
    return [state[1] for state in twin_path]


def build_secure_system(gwts: TransitionSystem, mode: str) -> TransitionSystem:
    """Apply the configured security restriction chain.

    mode 'none': the base system; 'B': anonymity restriction; 'A': twin +
    deniability restriction; 'AB': anonymity first, then twin + deniability.
    """
    if mode == "none":
        return gwts
    if mode == "B":
        return restrict_type_b(gwts)
    if mode == "A":
        return restrict_secure_twin(build_twin(gwts))
    if mode == "AB":
        return restrict_secure_twin(build_twin(restrict_type_b(gwts)))
    raise AbstractionError(f"unknown security mode {mode!r}")


def is_twin_mode(mode: str) -> bool:
    return mode in ("A", "AB")
