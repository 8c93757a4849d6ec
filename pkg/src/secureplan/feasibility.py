"""Per-transition trajectory feasibility via quadratic programming.

Each discrete transition is realized by a fixed-horizon, zero-order-hold
input sequence steering the agent between region representative points.
Constraints: exact forward-Euler dynamics, input bounds, endpoint pinning,
a facet-crossing equality at the mid-horizon index for region changes, and
discrete barrier rows keeping every facet margin controlled on its half of
the horizon.  Joint problems over several agent roles are block diagonal,
so feasibility decomposes per (agent, move) and is cached at that level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .abstraction import AgentModel
from .geometry import Partition, StructuralError
from .qp import QpProblem, QpSettings, solve

MARGIN_TOL = 1e-6
CROSS_TOL = 1e-5
ENDPOINT_TOL = 1e-5
INPUT_TOL = 1e-6


class FeasibilityError(Exception):
    pass


@dataclass(frozen=True)
class FeasibilityParams:
    t_f: float = 2.0
    N: int = 40
    k_c: int | None = None
    gamma: float = 1.0
    eps: float = 0.01

    def __post_init__(self):
        if not self.t_f > 0 or self.N < 2:
            raise FeasibilityError("need t_f > 0 and N >= 2")
        if not self.gamma > 0 or self.eps < 0:
            raise FeasibilityError("need gamma > 0 and eps >= 0")
        if self.k_c is not None and not 0 < self.k_c < self.N:
            raise FeasibilityError("crossing index must satisfy 0 < k_c < N")

    @property
    def dt(self) -> float:
        return self.t_f / self.N

    @property
    def crossing_index(self) -> int:
        return self.N // 2 if self.k_c is None else self.k_c


@dataclass(frozen=True)
class Role:
    """One trajectory to synthesize: an agent moving q_from -> q_to."""

    name: str
    agent: AgentModel
    q_from: str
    q_to: str


@dataclass(frozen=True)
class TrajectorySegment:
    role: str
    agent_name: str
    q_from: str
    q_to: str
    x: np.ndarray  # (N+1, n)
    u: np.ndarray  # (N, m)
    dt: float
    crossing_index: int
    objective: float


@dataclass
class SegmentCache:
    """Memoizes per-(agent, move) solves; None marks an infeasible move."""

    entries: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @staticmethod
    def key(agent_name: str, q_from: str, q_to: str) -> tuple:
        return (agent_name, q_from, q_to)

    def get(self, key):
        return self.entries.get(key, False)  # False = not computed yet

    def put(self, key, value):
        self.entries[key] = value


def _role_sizes(role: Role, params: FeasibilityParams):
    n = role.agent.A.shape[0]
    m = role.agent.B.shape[1]
    return n * (params.N + 1), m * params.N, n, m


def build_transition_qp(roles, params: FeasibilityParams,
                        partition: Partition) -> tuple[QpProblem, dict]:
    """Joint QP over all roles; returns the problem and per-role slices.

    Decision vector per role: stacked states x(0..N), then inputs u(0..N-1).
    The joint problem is block diagonal across roles (no coupling rows).
    """
    N, dt, kc = params.N, params.dt, params.crossing_index
    offsets = {}
    off = 0
    for role in roles:
        nx, nu, n, m = _role_sizes(role, params)
        offsets[role.name] = (off, off + nx, off + nx + nu, n, m)
        off += nx + nu
    total = off

    P = np.zeros((total, total))
    q = np.zeros(total)
    eq_rows, eq_rhs = [], []
    in_rows, in_rhs = [], []

    def x_idx(role_name, k, n):
        base = offsets[role_name][0]
        return slice(base + k * n, base + (k + 1) * n)

    def u_idx(role_name, k, n, m):
        base = offsets[role_name][1]
        return slice(base + k * m, base + (k + 1) * m)

    for role in roles:
        _, _, _, n, m = offsets[role.name]
        ag = role.agent
        A, B, b = ag.A, ag.B, ag.b
        # quadratic input cost: sum_k dt * ||u(k)||^2
        for k in range(N):
            sl = u_idx(role.name, k, n, m)
            P[sl, sl] += 2.0 * dt * np.eye(m)
        # forward-Euler dynamics
        for k in range(N):
            row = np.zeros((n, total))
            row[:, x_idx(role.name, k + 1, n)] = -np.eye(n)
            row[:, x_idx(role.name, k, n)] = np.eye(n) + dt * A
            row[:, u_idx(role.name, k, n, m)] = dt * B
            eq_rows.append(row)
            eq_rhs.append(-dt * b)
        # endpoints at representative points
        for k, rid in ((0, role.q_from), (N, role.q_to)):
            row = np.zeros((n, total))
            row[:, x_idx(role.name, k, n)] = np.eye(n)
            eq_rows.append(row)
            eq_rhs.append(partition.point(rid))
        crossing = role.q_from != role.q_to
        facet = None
        if crossing:
            facet = partition.facet(role.q_from, role.q_to)
            if facet is None:
                raise StructuralError(
                    f"{role.name}: regions {role.q_from}->{role.q_to} share no facet")
            row = np.zeros((1, total))
            row[0, x_idx(role.name, kc, n)] = facet.normal
            eq_rows.append(row)
            eq_rhs.append(np.array([-facet.offset]))
        # input polytope at every step
        Gu, hu = ag.input_poly.normals, ag.input_poly.offsets
        for k in range(N):
            row = np.zeros((len(hu), total))
            row[:, u_idx(role.name, k, n, m)] = -Gu
            in_rows.append(row)
            in_rhs.append(hu)
        # barrier and membership rows per half-horizon
        halves = [(role.q_from, range(0, kc), range(0, kc + 1)),
                  (role.q_to, range(kc, N), range(kc, N + 1))] if crossing else \
                 [(role.q_from, range(0, N), range(0, N + 1))]
        near_cross = {kc - 1, kc, kc + 1} if crossing else set()
        for rid, cbf_ks, mem_ks in halves:
            poly = partition.regions[rid]
            p_rows, g_off = poly.normals, poly.offsets
            # the exit facet is crossed at k_c, so its barrier row is lifted on
            # the departing half (interiority holds "except at t_c")
            keep = np.ones(len(g_off), dtype=bool)
            if crossing and rid == role.q_from:
                match = (np.abs(p_rows @ facet.normal - 1.0) < 1e-9) & \
                        (np.abs(g_off - facet.offset) < 1e-9)
                keep &= ~match
            pk, gk = p_rows[keep], g_off[keep]
            for k in cbf_ks:
                # p^T (Ax + Bu + b) >= -gamma*(h(x) - eps), h(x) = p^T x + g
                row = np.zeros((len(gk), total))
                row[:, x_idx(role.name, k, n)] = -(pk @ A) - params.gamma * pk
                row[:, u_idx(role.name, k, n, m)] = -(pk @ B)
                in_rows.append(row)
                in_rhs.append(pk @ b + params.gamma * (gk - params.eps))
            for k in mem_ks:
                # stay inside the active region; strictly (by eps) away from
                # the crossing instant so margins recover after the switch
                margin = 0.0 if k in near_cross else params.eps
                row = np.zeros((len(g_off), total))
                row[:, x_idx(role.name, k, n)] = -p_rows
                in_rows.append(row)
                in_rhs.append(g_off - margin)

    problem = QpProblem(
        P=P, q=q,
        A_eq=np.vstack(eq_rows), b_eq=np.concatenate(eq_rhs),
        G=np.vstack(in_rows), h=np.concatenate(in_rhs))
    return problem, offsets


def _resimulate(agent: AgentModel, x0: np.ndarray, u: np.ndarray,
                dt: float) -> np.ndarray:
    """Exact forward Euler; the returned states satisfy the recursion bitwise."""
    xs = [np.asarray(x0, dtype=float)]
    for k in range(len(u)):
        x = xs[-1]
        xs.append(x + dt * (agent.A @ x + agent.B @ u[k] + agent.b))
    return np.array(xs)


def _extract_segment(role: Role, params: FeasibilityParams, offsets, z) -> TrajectorySegment:
    start, ustart, end, n, m = offsets[role.name]
    x = z[start:ustart].reshape(params.N + 1, n)
    u = z[ustart:end].reshape(params.N, m)
    x = _resimulate(role.agent, x[0], u, params.dt)
    obj = float(params.dt * np.sum(u * u))
    return TrajectorySegment(role.name, role.agent.name, role.q_from, role.q_to,
                             x, u, params.dt, params.crossing_index, obj)


def solve_role(role: Role, params: FeasibilityParams, partition: Partition,
               warnings: list | None = None) -> TrajectorySegment | None:
    """Single-role solve with the cap-hit retry policy."""
    problem, offsets = build_transition_qp([role], params, partition)
    sol = solve(problem, QpSettings())
    if sol.status == "max_iterations":
        sol = solve(problem, QpSettings(rho=10.0, max_iter=100000))
        if sol.status == "max_iterations":
            if warnings is not None:
                warnings.append(
                    f"{role.name} {role.q_from}->{role.q_to}: iteration cap hit "
                    "twice, conservatively marked infeasible")
            return None
    if sol.status != "optimal":
        return None
    return _extract_segment(role, params, offsets, sol.z)


def check_transition(roles, params: FeasibilityParams, partition: Partition,
                     cache: SegmentCache) -> dict | None:
    """Feasibility of a (joint) transition: every role's block must solve.

    The joint QP is block diagonal, so each role is solved (and cached)
    independently; the transition is feasible iff all roles are.
    Returns role name -> segment, or None when any role is infeasible.
    """
    out = {}
    for role in roles:
        key = SegmentCache.key(role.agent.name, role.q_from, role.q_to)
        seg = cache.get(key)
        if seg is False:
            seg = solve_role(role, params, partition, cache.warnings)
            cache.put(key, seg)
        if seg is None:
            return None
        out[role.name] = seg
    return out


def transition_roles(src, dst, agents, twin_mode: bool) -> list[Role]:
    """Roles realizing one edge of the (secure) system.

    Plain mode: src/dst are agent-region tuples.  Twin mode: pairs of such
    tuples; the copy side reuses each agent's model and input bounds.
    """
    if twin_mode:
        (r1, c1), (r2, c2) = src, dst
        roles = [Role(f"real_{i + 1}", agents[i], r1[i], r2[i])
                 for i in range(len(agents))]
        roles += [Role(f"copy_{i + 1}", agents[i], c1[i], c2[i])
                  for i in range(len(agents))]
        return roles
    return [Role(f"real_{i + 1}", agents[i], src[i], dst[i])
            for i in range(len(agents))]


def prune_infeasible(system, params: FeasibilityParams, agents,
                     partition: Partition, twin_mode: bool):
    """Drop edges whose realizing QP has no solution; weights unchanged."""
    from .abstraction import TransitionSystem

    cache = SegmentCache()
    edges = {}
    for src in system.states:
        kept = {}
        for dst, w in system.successors(src).items():
            roles = transition_roles(src, dst, agents, twin_mode)
            if check_transition(roles, params, partition, cache) is not None:
                kept[dst] = w
        edges[src] = kept
    pruned = TransitionSystem(system.states, system.initial, edges,
                              system.labels, system.obs, system.secret)
    return pruned, cache
