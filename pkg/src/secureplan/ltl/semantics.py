"""Exact LTL semantics over ultimately periodic (lasso) words.

A lasso word is ``prefix . cycle^omega``; only ``len(prefix) + len(cycle)``
suffixes are distinct, so temporal operators reduce to fixpoints on that
finite set of positions.
"""

from __future__ import annotations

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
)


def _as_symbols(word) -> list[frozenset[str]]:
    return [frozenset(sym) for sym in word]


def eval_ltl_on_lasso(f: Formula, prefix, cycle) -> bool:
    """Truth of ``f`` at position 0 of the word ``prefix . cycle^omega``."""
    cycle = _as_symbols(cycle)
    prefix = _as_symbols(prefix)
    if not cycle:
        raise LtlError("lasso cycle must be non-empty")
    word = prefix + cycle
    k, total = len(prefix), len(prefix) + len(cycle)
    nxt = [j + 1 if j + 1 < total else k for j in range(total)]

    cache: dict[Formula, list[bool]] = {}

    def values(g: Formula) -> list[bool]:
        if g in cache:
            return cache[g]
        if isinstance(g, TrueF):
            vals = [True] * total
        elif isinstance(g, FalseF):
            vals = [False] * total
        elif isinstance(g, Atom):
            vals = [g.name in word[j] for j in range(total)]
        elif isinstance(g, Not):
            vals = [not v for v in values(g.operand)]
        elif isinstance(g, And):
            left, right = values(g.left), values(g.right)
            vals = [a and b for a, b in zip(left, right)]
        elif isinstance(g, Or):
            left, right = values(g.left), values(g.right)
            vals = [a or b for a, b in zip(left, right)]
        elif isinstance(g, Next):
            sub = values(g.operand)
            vals = [sub[nxt[j]] for j in range(total)]
        elif isinstance(g, (Until, Eventually)):
            if isinstance(g, Until):
                hold, goal = values(g.left), values(g.right)
            else:
                hold, goal = [True] * total, values(g.operand)
            # least fixpoint of  v = goal | (hold & X v)
            vals = list(goal)
            for _ in range(total):
                changed = False
                for j in range(total):
                    new = vals[j] or (hold[j] and vals[nxt[j]])
                    if new != vals[j]:
                        vals[j] = new
                        changed = True
                if not changed:
                    break
        elif isinstance(g, (Release, Always)):
            if isinstance(g, Release):
                hold, goal = values(g.left), values(g.right)
            else:
                hold, goal = [False] * total, values(g.operand)
            # greatest fixpoint of  v = goal & (hold | X v)
            vals = [True] * total
            for _ in range(total):
                changed = False
                for j in range(total):
                    new = goal[j] and (hold[j] or vals[nxt[j]])
                    if new != vals[j]:
                        vals[j] = new
                        changed = True
                if not changed:
                    break
        else:
            raise LtlError(f"unhandled formula {g!r}")
        cache[g] = vals
        return vals

    return values(f)[0]


def all_symbols(ap) -> list[frozenset[str]]:
    """The alphabet 2^AP in a deterministic order."""
    ap = sorted(ap)
    out = []
    for mask in range(1 << len(ap)):
        out.append(frozenset(a for i, a in enumerate(ap) if mask >> i & 1))
    return out


def all_lassos(ap, max_prefix: int, max_cycle: int):
    """Every lasso with |prefix| <= max_prefix and 1 <= |cycle| <= max_cycle."""
    import itertools

    symbols = all_symbols(ap)
    for plen in range(max_prefix + 1):
        for clen in range(1, max_cycle + 1):
            for prefix in itertools.product(symbols, repeat=plen):
                for cycle in itertools.product(symbols, repeat=clen):
                    yield list(prefix), list(cycle)
