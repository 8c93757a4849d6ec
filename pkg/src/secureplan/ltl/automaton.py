"""Nondeterministic Büchi automata over the alphabet 2^AP.

Transition guards are symbolic (literal conjunctions from the tableau, or
Boolean expressions from HOA import) and are evaluated against explicit
symbols, i.e. subsets of AP.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class Guard:
    def eval(self, symbol: frozenset) -> bool:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class LiteralGuard(Guard):
    """Conjunction of literals: all of ``pos`` present, none of ``neg``."""

    pos: frozenset
    neg: frozenset

    def eval(self, symbol: frozenset) -> bool:
        return self.pos <= symbol and not (self.neg & symbol)

    def __str__(self):
        lits = sorted(self.pos) + [f"!{a}" for a in sorted(self.neg)]
        return " & ".join(lits) if lits else "t"


@dataclass(frozen=True)
class ExprGuard(Guard):
    """Boolean expression tree; nodes are tuples:

    ("t",), ("f",), ("ap", name), ("not", g), ("and", g1, g2), ("or", g1, g2)
    """

    expr: tuple

    def eval(self, symbol: frozenset) -> bool:
        return _eval_expr(self.expr, symbol)


def _eval_expr(e: tuple, symbol: frozenset) -> bool:
    op = e[0]
    if op == "t":
        return True
    if op == "f":
        return False
    if op == "ap":
        return e[1] in symbol
    if op == "not":
        return not _eval_expr(e[1], symbol)
    if op == "and":
        return _eval_expr(e[1], symbol) and _eval_expr(e[2], symbol)
    if op == "or":
        return _eval_expr(e[1], symbol) or _eval_expr(e[2], symbol)
    raise ValueError(f"bad guard expression {e!r}")


@dataclass
class BuchiAutomaton:
    ap: tuple[str, ...]
    num_states: int
    initial: frozenset[int]
    accepting: frozenset[int]
    edges: list[tuple[int, Guard, int]] = field(default_factory=list)

    def __post_init__(self):
        bad = [s for s in self.initial | self.accepting if not 0 <= s < self.num_states]
        if bad:
            raise ValueError(f"state ids out of range: {bad}")
        for src, _, dst in self.edges:
            if not (0 <= src < self.num_states and 0 <= dst < self.num_states):
                raise ValueError(f"edge ({src}, {dst}) out of range")
        self._out: dict[int, list[tuple[Guard, int]]] = {}
        for src, guard, dst in self.edges:
            self._out.setdefault(src, []).append((guard, dst))

    def successors(self, state: int, symbol) -> set[int]:
        symbol = frozenset(symbol)
        return {dst for guard, dst in self._out.get(state, []) if guard.eval(symbol)}

    def delta(self, state: int, symbol) -> set[int]:
        return self.successors(state, symbol)

    def prune_unreachable(self) -> "BuchiAutomaton":
        """Keep only states reachable from the initial set, renumbered."""
        seen = set(self.initial)
        stack = list(self.initial)
        while stack:
            s = stack.pop()
            for _, dst in self._out.get(s, []):
                if dst not in seen:
                    seen.add(dst)
                    stack.append(dst)
        order = sorted(seen)
        remap = {s: i for i, s in enumerate(order)}
        return BuchiAutomaton(
            ap=self.ap,
            num_states=len(order),
            initial=frozenset(remap[s] for s in self.initial),
            accepting=frozenset(remap[s] for s in self.accepting if s in seen),
            edges=[(remap[s], g, remap[d]) for s, g, d in self.edges
                   if s in seen and d in seen],
        )

    def accepts_lasso(self, prefix, cycle) -> bool:
        """Decide acceptance of ``prefix . cycle^omega``.

        Runs the prefix, then searches the (state, cycle-position) product
        graph for a loop through an accepting state.
        """
        prefix = [frozenset(s) for s in prefix]
        cycle = [frozenset(s) for s in cycle]
        if not cycle:
            raise ValueError("cycle must be non-empty")
        current = set(self.initial)
        for sym in prefix:
            current = {d for s in current for d in self.successors(s, sym)}
            if not current:
                return False
        L = len(cycle)

        def product_succ(node):
            s, i = node
            return [(d, (i + 1) % L) for d in self.successors(s, cycle[i])]

        roots = {(s, 0) for s in current}
        reach = set(roots)
        stack = list(roots)
        while stack:
            node = stack.pop()
            for nxt in product_succ(node):
                if nxt not in reach:
                    reach.add(nxt)
                    stack.append(nxt)
        # accept iff some reachable accepting node lies on a product cycle
        for node in reach:
            if node[0] in self.accepting and node in _forward_set(node, product_succ):
                return True
        return False


def _forward_set(node, succ):
    """Nodes reachable from ``node`` in one or more steps."""
    seen = set(succ(node))
    stack = list(seen)
    while stack:
        cur = stack.pop()
        for nxt in succ(cur):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen
