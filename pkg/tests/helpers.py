"""Random-instance helpers shared by construction/oracle/planner tests."""

import random

from secureplan import abstraction
from secureplan.abstraction import TransitionSystem


def random_gwts(rng: random.Random, num_regions=None, num_obs=None,
                num_agents=2, density=0.6) -> TransitionSystem:
    """Random two-agent global system for oracle/construction comparisons.

    Regions get a random connected-ish adjacency with self-loops, random
    observation symbols and random secret flags; the product is taken with
    the library construction so only the randomness lives here.
    """
    nq = num_regions or rng.randint(2, 4)
    ny = num_obs or rng.randint(1, 3)
    regions = [f"q{i}" for i in range(nq)]
    obs_syms = [f"y{i}" for i in range(ny)]
    per_agent = []
    for _ in range(num_agents):
        edges = {}
        for s in regions:
            targets = {s: 0.1}
            for d in regions:
                if d != s and rng.random() < density:
                    targets[d] = round(rng.uniform(0.5, 3.0), 3)
            edges[s] = targets
        obs = {s: rng.choice(obs_syms) for s in regions}
        secret = {s: (rng.random() < 0.35,) for s in regions}
        initial = frozenset(rng.sample(regions, rng.randint(1, nq)))
        labels = {s: frozenset() for s in regions}
        per_agent.append(TransitionSystem(tuple(regions), initial, edges,
                                          labels, obs, secret))
    return abstraction.product_gwts(per_agent)


def all_paths(ts: TransitionSystem, max_len: int):
    """Every path of the system up to max_len states, from initial states."""
    frontier = [[s] for s in sorted(ts.initial, key=repr)]
    out = list(frontier)
    for _ in range(max_len - 1):
        nxt = []
        for path in frontier:
            for d in sorted(ts.successors(path[-1]), key=repr):
                nxt.append(path + [d])
        out.extend(nxt)
        frontier = nxt
    return out
