"""Abstraction tests: agent systems, the global product, and the secure
restrictions, pinned against the grid fixture and random instances."""

import random

import numpy as np
import pytest

from secureplan import abstraction
from secureplan.abstraction import (
    AbstractionError,
    AgentModel,
    SecurityInfeasibleError,
    TransitionSystem,
    build_secure_system,
    build_twin,
    build_wts,
    flatten_labels,
    is_twin_mode,
    product_gwts,
    project_copy,
    project_real,
    restrict_secure_twin,
    restrict_type_b,
    type_b_ok,
)
from secureplan.geometry import HPolytope

from helpers import random_gwts


@pytest.fixture(scope="module")
def grid_wts(example1):
    return [build_wts(example1.partition, ag) for ag in example1.agents]


def test_wts_structure(grid_wts, grid_partition):
    wts = grid_wts[0]
    assert wts.states == ("A", "B", "C", "D", "E", "F")
    assert wts.initial == frozenset("ABCDEF")
    # self-loop plus one edge per adjacency direction
    assert wts.num_edges == 6 + 14
    assert wts.has_edge("A", "A") and wts.weight("A", "A") == pytest.approx(0.1)
    assert wts.weight("A", "B") == pytest.approx(1.0, abs=1e-9)
    assert not wts.has_edge("A", "D")
    assert wts.obs["A"] == "y1" and wts.obs["E"] == "y2"
    assert wts.secret["A"] == (True,) and wts.secret["C"] == (False,)


def test_wts_rejects_bad_inputs(example1):
    ag = example1.agents[0]
    with pytest.raises(AbstractionError):
        build_wts(example1.partition, ag, weight_rule="uniform")
    with pytest.raises(AbstractionError):
        build_wts(example1.partition, ag, self_loop_weight=0.0)


def test_product_weights_and_flags(grid_gwts, grid_wts):
    gwts = grid_gwts
    assert gwts.num_states == 36
    assert gwts.num_states <= max(w.num_states for w in grid_wts) ** 2
    # summed weights: move + self-loop
    w_ab = grid_wts[0].weight("A", "B")
    assert gwts.weight(("A", "C"), ("B", "C")) == pytest.approx(w_ab + 0.1)
    assert gwts.obs[("A", "E")] == ("y1", "y2")
    assert gwts.secret[("A", "C")] == (True, False)
    assert gwts.is_valid_path([("D", "E"), ("E", "B")])
    assert not gwts.is_valid_path([("A", "A"), ("C", "C")])


def test_flatten_labels():
    assert flatten_labels([frozenset({"a_1"}), frozenset({"b_2"})]) == \
        frozenset({"a_1", "b_2"})
    assert flatten_labels([frozenset(), frozenset()]) == frozenset()


def test_type_b_pointwise():
    assert type_b_ok(("y1", "y1"), (True, False))
    assert not type_b_ok(("y1", "y2"), (True, False))
    assert type_b_ok(("y1", "y2"), (False, False))


def test_type_b_restriction_on_grid(grid_gwts):
    restricted = restrict_type_b(grid_gwts)
    assert ("B", "E") in restricted.states  # secret B covered by E (same row)
    assert ("A", "C") not in restricted.states  # secret A exposed
    assert all(type_b_ok(restricted.obs[s], restricted.secret[s])
               for s in restricted.states)
    # restriction is idempotent
    again = restrict_type_b(restricted)
    assert again.states == restricted.states
    assert again.num_edges == restricted.num_edges


def test_single_agent_type_b_removes_all_secrets(example1):
    wts = build_wts(example1.partition, example1.agents[0])
    gwts = product_gwts([wts])
    restricted = restrict_type_b(gwts)
    assert all(not any(restricted.secret[s]) for s in restricted.states)


def test_twin_structure(grid_gwts):
    twin = build_twin(grid_gwts)
    assert twin.num_states <= grid_gwts.num_states ** 2
    assert (("D", "E"), ("C", "E")) in twin.states
    # pairs are observation-matched and symmetric
    for q1, q2 in twin.states:
        assert grid_gwts.obs[q1] == grid_gwts.obs[q2]
        assert (q2, q1) in set(twin.states)
    # weight and label come from the real side
    src = (("D", "E"), ("C", "E"))
    dst = (("E", "E"), ("B", "E"))
    assert twin.has_edge(src, dst)
    assert twin.weight(src, dst) == grid_gwts.weight(("D", "E"), ("E", "E"))
    assert twin.labels[src] == grid_gwts.labels[("D", "E")]
    # secret flag: both sides secret
    assert twin.secret[(("A", "C"), ("F", "C"))] == (True, False)
    assert twin.secret[(("B", "C"), ("E", "C"))] == (False, False)


def test_secure_twin_removes_double_secrets(grid_gwts):
    secure = restrict_secure_twin(build_twin(grid_gwts))
    assert all(not any(secure.secret[s]) for s in secure.states)
    assert (("A", "C"), ("F", "C")) not in set(secure.states)
    again = restrict_secure_twin(secure)
    assert again.states == secure.states


def test_grid_secure_ab_size(grid_gwts):
    secure = build_secure_system(grid_gwts, "AB")
    assert secure.num_states == 33
    assert secure.num_edges == 489


def test_build_secure_system_modes(grid_gwts):
    assert build_secure_system(grid_gwts, "none") is grid_gwts
    assert build_secure_system(grid_gwts, "B").num_states == \
        restrict_type_b(grid_gwts).num_states
    assert is_twin_mode("A") and is_twin_mode("AB")
    assert not is_twin_mode("B") and not is_twin_mode("none")
    with pytest.raises(AbstractionError):
        build_secure_system(grid_gwts, "C")


def test_projections():
    path = [(("D", "E"), ("C", "E")), (("E", "B"), ("B", "E"))]
    assert project_real(path) == [("D", "E"), ("E", "B")]
    assert project_copy(path) == [("C", "E"), ("B", "E")]


def test_security_infeasible_error():
    # one agent, always secret, distinct observations: nothing survives
    ts = TransitionSystem(
        states=("q0", "q1"), initial=frozenset({"q0"}),
        edges={"q0": {"q1": 1.0}, "q1": {"q0": 1.0}},
        labels={"q0": frozenset(), "q1": frozenset()},
        obs={"q0": ("y0",), "q1": ("y1",)},
        secret={"q0": (True,), "q1": (True,)})
    gwts = TransitionSystem(
        states=(("q0",), ("q1",)), initial=frozenset({("q0",)}),
        edges={("q0",): {("q1",): 1.0}, ("q1",): {("q0",): 1.0}},
        labels={("q0",): frozenset(), ("q1",): frozenset()},
        obs={("q0",): ("y0",), ("q1",): ("y1",)},
        secret={("q0",): (True,), ("q1",): (True,)})
    with pytest.raises(SecurityInfeasibleError) as exc:
        restrict_type_b(gwts)
    assert exc.value.kept_states == 0
    with pytest.raises(SecurityInfeasibleError):
        restrict_secure_twin(build_twin(gwts))
    del ts


def test_transition_system_validation():
    with pytest.raises(AbstractionError):
        TransitionSystem(("a",), frozenset({"b"}), {}, {"a": frozenset()})
    with pytest.raises(AbstractionError):
        TransitionSystem(("a",), frozenset(), {"a": {"a": 0.0}},
                         {"a": frozenset()})
    with pytest.raises(AbstractionError):
        TransitionSystem(("a",), frozenset(), {"a": {"b": 1.0}},
                         {"a": frozenset()})


def test_agent_model_checks(grid_partition):
    box = HPolytope.from_box([-1.0, -1.0], [1.0, 1.0])
    obs = {rid: "y" for rid in grid_partition.region_ids}
    with pytest.raises(AbstractionError):
        AgentModel("x", np.eye(2), np.eye(2), np.zeros(3), box,
                   frozenset(), frozenset(), obs, {})
    ag = AgentModel("x", np.eye(2), np.eye(2), np.zeros(2), box,
                    frozenset({"A"}), frozenset({"Z"}), obs, {})
    with pytest.raises(AbstractionError):
        ag.check(grid_partition)
    partial_obs = dict(obs)
    partial_obs.pop("A")
    ag2 = AgentModel("x", np.eye(2), np.eye(2), np.zeros(2), box,
                     frozenset({"A"}), frozenset(), partial_obs, {})
    with pytest.raises(AbstractionError):
        ag2.check(grid_partition)


def test_state_count_bounds_random():
    rng = random.Random(42)
    for _ in range(25):
        gwts = random_gwts(rng)
        nq = round(gwts.num_states ** 0.5)
        assert gwts.num_states <= nq ** 2
        twin = build_twin(gwts)
        assert twin.num_states <= gwts.num_states ** 2


def test_twin_real_projection_is_base_path():
    rng = random.Random(7)
    for _ in range(10):
        gwts = random_gwts(rng)
        twin = build_twin(gwts)
        for src in list(twin.states)[:20]:
            for dst in twin.successors(src):
                assert gwts.has_edge(src[0], dst[0])
                assert gwts.has_edge(src[1], dst[1])
