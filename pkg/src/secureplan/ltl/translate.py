"""LTL to NBA translation.

Tableau node expansion in the style of Gerth et al. builds a generalized
Büchi automaton (one acceptance set per Until subformula); a counter
construction then degeneralizes it to a plain NBA.  No minimization beyond
unreachable-state pruning and merging of states with identical behavior.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .automaton import BuchiAutomaton, LiteralGuard
from .syntax import (
    Always,
    And,
    Atom,
    Eventually,
    FalseF,
    Formula,
    LtlError,
    Next,
    Not,
    Or,
    Release,
    TrueF,
    Until,
    atoms_of,
    to_nnf,
)


def _expand_derived(f: Formula) -> Formula:
    """Rewrite F/G into U/R so the tableau sees core operators only."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        return Not(_expand_derived(f.operand))
    if isinstance(f, Next):
        return Next(_expand_derived(f.operand))
    if isinstance(f, And):
        return And(_expand_derived(f.left), _expand_derived(f.right))
    if isinstance(f, Or):
        return Or(_expand_derived(f.left), _expand_derived(f.right))
    if isinstance(f, Until):
        return Until(_expand_derived(f.left), _expand_derived(f.right))
    if isinstance(f, Release):
        return Release(_expand_derived(f.left), _expand_derived(f.right))
    if isinstance(f, Eventually):
        return Until(TrueF(), _expand_derived(f.operand))
    if isinstance(f, Always):
        return Release(FalseF(), _expand_derived(f.operand))
    raise LtlError(f"unhandled formula {f!r}")


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Atom, TrueF, FalseF)) or (
        isinstance(f, Not) and isinstance(f.operand, Atom))


def _negate_literal(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.operand
    return Not(f)


_INIT = -1


@dataclass
class _Node:
    nid: int
    incoming: set[int]
    new: set[Formula]
    old: set[Formula]
    nxt: set[Formula]


class _Tableau:
    def __init__(self):
        self.nodes: dict[int, _Node] = {}
        self.counter = itertools.count()

    def fresh(self, incoming, new, old, nxt) -> _Node:
        return _Node(next(self.counter), set(incoming), set(new), set(old), set(nxt))

    def expand(self, node: _Node) -> None:
        if not node.new:
            for other in self.nodes.values():
                if other.old == node.old and other.nxt == node.nxt:
                    other.incoming |= node.incoming
                    return
            self.nodes[node.nid] = node
            succ = self.fresh({node.nid}, node.nxt, set(), set())
            self.expand(succ)
            return
        # deterministic order regardless of interpreter hash seed
        f = min(node.new, key=str)
        node.new.remove(f)
        if f in node.old:
            self.expand(node)
            return
        if _is_literal(f):
            if isinstance(f, FalseF) or _negate_literal(f) in node.old:
                return  # contradiction: discard
            if not isinstance(f, TrueF):
                node.old.add(f)
            self.expand(node)
        elif isinstance(f, And):
            node.old.add(f)
            node.new |= {f.left, f.right} - node.old
            self.expand(node)
        elif isinstance(f, Next):
            node.old.add(f)
            node.nxt.add(f.operand)
            self.expand(node)
        elif isinstance(f, (Or, Until, Release)):
            node.old.add(f)
            if isinstance(f, Or):
                new1, new2, nxt1 = {f.left}, {f.right}, set()
            elif isinstance(f, Until):
                new1, new2, nxt1 = {f.left}, {f.right}, {f}
            else:
                new1, new2, nxt1 = {f.right}, {f.left, f.right}, {f}
            n1 = self.fresh(node.incoming, node.new | (new1 - node.old),
                            node.old, node.nxt | nxt1)
            n2 = self.fresh(node.incoming, node.new | (new2 - node.old),
                            node.old, node.nxt)
            self.expand(n1)
            self.expand(n2)
        else:
            raise LtlError(f"unexpected formula in tableau: {f!r}")


@dataclass
class GeneralizedBuchi:
    """Intermediate GBA with guard-on-target edges and multiple acceptance sets."""

    ap: tuple[str, ...]
    num_states: int
    initial: frozenset[int]
    edges: list[tuple[int, LiteralGuard, int]]
    acceptance_sets: list[frozenset[int]] = field(default_factory=list)


def ltl_to_gba(f: Formula) -> GeneralizedBuchi:
    f = _expand_derived(to_nnf(f))
    ap = tuple(sorted(atoms_of(f)))
    tableau = _Tableau()
    root = tableau.fresh({_INIT}, {f}, set(), set())
    tableau.expand(root)

    ids = sorted(tableau.nodes)
    remap = {nid: i for i, nid in enumerate(ids)}

    def guard_of(node: _Node) -> LiteralGuard:
        pos = frozenset(g.name for g in node.old if isinstance(g, Atom))
        neg = frozenset(g.operand.name for g in node.old
                        if isinstance(g, Not) and isinstance(g.operand, Atom))
        return LiteralGuard(pos, neg)

    # Guards are consumed on entry to a node, so the word's first symbol is
    # read while leaving a dedicated initial state.
    init_idx = len(ids)
    edges = []
    for nid in ids:
        node = tableau.nodes[nid]
        guard = guard_of(node)
        for src in node.incoming:
            if src == _INIT:
                edges.append((init_idx, guard, remap[nid]))
            elif src in tableau.nodes:
                edges.append((remap[src], guard, remap[nid]))

    untils = sorted(
        {g for node in tableau.nodes.values() for g in node.old
         if isinstance(g, Until)},
        key=str,
    )
    acceptance = []
    for g in untils:
        members = frozenset(
            remap[nid] for nid, node in tableau.nodes.items()
            if g not in node.old or g.right in node.old) | {init_idx}
        acceptance.append(members)
    return GeneralizedBuchi(ap, len(ids) + 1, frozenset({init_idx}), edges,
                            acceptance)


def degeneralize(gba: GeneralizedBuchi) -> BuchiAutomaton:
    """Counter construction; the counter advances when the source state is in
    the current acceptance set, and acceptance is (set 0, counter 0)."""
    k = len(gba.acceptance_sets)
    if k == 0:
        nba = BuchiAutomaton(
            ap=gba.ap, num_states=gba.num_states, initial=gba.initial,
            accepting=frozenset(range(gba.num_states)),
            edges=list(gba.edges))
        return nba.prune_unreachable()
    index = {}
    for q in range(gba.num_states):
        for i in range(k):
            index[(q, i)] = len(index)
    edges = []
    for src, guard, dst in gba.edges:
        for i in range(k):
            i2 = (i + 1) % k if src in gba.acceptance_sets[i] else i
            edges.append((index[(src, i)], guard, index[(dst, i2)]))
    nba = BuchiAutomaton(
        ap=gba.ap,
        num_states=len(index),
        initial=frozenset(index[(q, 0)] for q in gba.initial),
        accepting=frozenset(index[(q, 0)] for q in gba.acceptance_sets[0]),
        edges=edges,
    )
    return nba.prune_unreachable()


def merge_duplicate_states(nba: BuchiAutomaton) -> BuchiAutomaton:
    """Quotient states that agree on acceptance and outgoing behavior.

    Acceptance marks on states that lie on no cycle are meaningless for a
    Büchi condition and are cleared first, which enables more merging.
    """
    out_sets: dict[int, set[tuple]] = {s: set() for s in range(nba.num_states)}
    succ: dict[int, set[int]] = {s: set() for s in range(nba.num_states)}
    for src, guard, dst in nba.edges:
        out_sets[src].add((guard, dst))
        succ[src].add(dst)
    on_cycle = set()
    for s in range(nba.num_states):
        seen = set(succ[s])
        stack = list(seen)
        while stack:
            cur = stack.pop()
            for nxt in succ[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if s in seen:
            on_cycle.add(s)
    flags = {s: s in nba.accepting for s in range(nba.num_states)}
    for s in range(nba.num_states):
        if s in on_cycle:
            continue
        twins = [t for t in range(nba.num_states)
                 if t != s and out_sets[t] == out_sets[s]]
        if twins:
            flags[s] = flags[min(twins)]
    nba = BuchiAutomaton(ap=nba.ap, num_states=nba.num_states,
                         initial=nba.initial,
                         accepting=frozenset(s for s, v in flags.items() if v),
                         edges=list(nba.edges))
    classes = {s: flags[s] for s in range(nba.num_states)}
    while True:
        signature = {
            s: (classes[s], frozenset((g, classes[d]) for g, d in out_sets[s]))
            for s in range(nba.num_states)
        }
        new_ids: dict = {}
        new_classes = {}
        for s in range(nba.num_states):
            sig = signature[s]
            if sig not in new_ids:
                new_ids[sig] = len(new_ids)
            new_classes[s] = new_ids[sig]
        if new_classes == classes:
            break
        classes = new_classes
    num = len(set(classes.values()))
    edges = sorted({(classes[s], g, classes[d]) for s, g, d in nba.edges},
                   key=lambda e: (e[0], e[2], str(e[1])))
    return BuchiAutomaton(
        ap=nba.ap,
        num_states=num,
        initial=frozenset(classes[s] for s in nba.initial),
        accepting=frozenset(classes[s] for s in nba.accepting),
        edges=list(edges),
    ).prune_unreachable()


def ltl_to_nba(f: Formula) -> BuchiAutomaton:
    """Full pipeline: NNF, tableau, degeneralization, cleanup."""
    return merge_duplicate_states(degeneralize(ltl_to_gba(f)))
