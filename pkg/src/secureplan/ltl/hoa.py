"""HOA v1 import/export for state-based Büchi automata.

Only the Büchi fragment is supported: ``Acceptance: 1 Inf(0)``.  Labels are
Boolean expressions over AP indices; export writes literal conjunctions, import
accepts the full ``t/f/!/&/|`` label grammar.
"""

from __future__ import annotations

import re

from .automaton import BuchiAutomaton, ExprGuard, Guard, LiteralGuard


class HoaError(Exception):
    pass


class HoaUnsupportedError(HoaError):
    """Automaton uses a feature outside the Büchi fragment."""


def to_hoa(aut: BuchiAutomaton, name: str = "secureplan") -> str:
    ap_index = {a: i for i, a in enumerate(aut.ap)}
    lines = [
        "HOA: v1",
        f"name: \"{name}\"",
        f"States: {aut.num_states}",
    ]
    for s in sorted(aut.initial):
        lines.append(f"Start: {s}")
    ap_list = " ".join(f'"{a}"' for a in aut.ap)
    lines.append(f"AP: {len(aut.ap)}{' ' + ap_list if aut.ap else ''}")
    lines.append("acc-name: Buchi")
    lines.append("Acceptance: 1 Inf(0)")
    lines.append("--BODY--")
    out: dict[int, list[tuple[Guard, int]]] = {}
    for src, guard, dst in aut.edges:
        out.setdefault(src, []).append((guard, dst))
    for s in range(aut.num_states):
        acc = " {0}" if s in aut.accepting else ""
        lines.append(f"State: {s}{acc}")
        for guard, dst in sorted(out.get(s, []), key=lambda e: (e[1], str(e[0]))):
            lines.append(f"[{_guard_text(guard, ap_index)}] {dst}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


def _guard_text(guard: Guard, ap_index: dict[str, int]) -> str:
    if isinstance(guard, LiteralGuard):
        lits = [str(ap_index[a]) for a in sorted(guard.pos)]
        lits += [f"!{ap_index[a]}" for a in sorted(guard.neg)]
        return " & ".join(lits) if lits else "t"
    if isinstance(guard, ExprGuard):
        return _expr_text(guard.expr, ap_index)
    raise HoaError(f"cannot serialize guard {guard!r}")


def _expr_text(e: tuple, ap_index) -> str:
    op = e[0]
    if op == "t":
        return "t"
    if op == "f":
        return "f"
    if op == "ap":
        return str(ap_index[e[1]])
    if op == "not":
        return f"!({_expr_text(e[1], ap_index)})"
    if op == "and":
        return f"({_expr_text(e[1], ap_index)} & {_expr_text(e[2], ap_index)})"
    if op == "or":
        return f"({_expr_text(e[1], ap_index)} | {_expr_text(e[2], ap_index)})"
    raise HoaError(f"bad expression {e!r}")


_LABEL_TOKEN = re.compile(r"\s*(?:(\d+)|([tf])|(!)|(&)|(\|)|(\()|(\)))")


def _parse_label(text: str, ap: tuple[str, ...]) -> tuple:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _LABEL_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise HoaError(f"bad label {text!r}")
            break
        tokens.append(m.group().strip())
        pos = m.end()

    def parse_or(i):
        node, i = parse_and(i)
        while i < len(tokens) and tokens[i] == "|":
            rhs, i = parse_and(i + 1)
            node = ("or", node, rhs)
        return node, i

    def parse_and(i):
        node, i = parse_unary(i)
        while i < len(tokens) and tokens[i] == "&":
            rhs, i = parse_unary(i + 1)
            node = ("and", node, rhs)
        return node, i

    def parse_unary(i):
        if i >= len(tokens):
            raise HoaError(f"truncated label {text!r}")
        tok = tokens[i]
        if tok == "!":
            node, i = parse_unary(i + 1)
            return ("not", node), i
        if tok == "(":
            node, i = parse_or(i + 1)
            if i >= len(tokens) or tokens[i] != ")":
                raise HoaError(f"unbalanced label {text!r}")
            return node, i + 1
        if tok == "t":
            return ("t",), i + 1
        if tok == "f":
            return ("f",), i + 1
        if tok.isdigit():
            idx = int(tok)
            if idx >= len(ap):
                raise HoaError(f"AP index {idx} out of range in {text!r}")
            return ("ap", ap[idx]), i + 1
        raise HoaError(f"bad label token {tok!r}")

    node, i = parse_or(0)
    if i != len(tokens):
        raise HoaError(f"trailing tokens in label {text!r}")
    return node


def from_hoa(text: str) -> BuchiAutomaton:
    header, _, body = text.partition("--BODY--")
    if not body:
        raise HoaError("missing --BODY-- marker")
    num_states = None
    initial: set[int] = set()
    ap: tuple[str, ...] = ()
    acceptance_ok = False
    for line in header.splitlines():
        line = line.strip()
        if line.startswith("States:"):
            num_states = int(line.split(":", 1)[1])
        elif line.startswith("Start:"):
            initial.update(int(tok) for tok in line.split(":", 1)[1].split("&"))
        elif line.startswith("AP:"):
            parts = line.split(":", 1)[1].strip()
            names = re.findall(r'"((?:[^"\\]|\\.)*)"', parts)
            count = int(parts.split()[0])
            if count != len(names):
                raise HoaError("AP count does not match the listed names")
            ap = tuple(names)
        elif line.startswith("Acceptance:"):
            spec = line.split(":", 1)[1].strip()
            spec_norm = re.sub(r"\s+", " ", spec)
            if spec_norm not in ("1 Inf(0)", "Inf(0)"):
                raise HoaUnsupportedError(
                    f"unsupported acceptance condition: {spec!r}")
            acceptance_ok = True
    if num_states is None:
        raise HoaError("missing States: header")
    if not acceptance_ok:
        raise HoaUnsupportedError("missing Acceptance header")

    accepting: set[int] = set()
    edges: list[tuple[int, Guard, int]] = []
    current: int | None = None
    for raw in body.splitlines():
        line = raw.strip()
        if not line or line == "--END--":
            continue
        if line.startswith("State:"):
            rest = line.split(":", 1)[1].strip()
            m = re.match(r"(?:\[[^\]]*\]\s*)?(\d+)(?:\s+\"[^\"]*\")?(?:\s*\{([\d\s]*)\})?", rest)
            if not m:
                raise HoaError(f"bad State line: {line!r}")
            current = int(m.group(1))
            if m.group(2) is not None and m.group(2).strip():
                sets = {int(tok) for tok in m.group(2).split()}
                if sets - {0}:
                    raise HoaUnsupportedError(f"state in non-Büchi set: {line!r}")
                accepting.add(current)
        else:
            if current is None:
                raise HoaError(f"edge before any State line: {line!r}")
            m = re.match(r"\[([^\]]*)\]\s*(\d+)(?:\s*\{([\d\s]*)\})?", line)
            if not m:
                raise HoaError(f"bad edge line: {line!r}")
            if m.group(3) is not None and m.group(3).strip():
                raise HoaUnsupportedError(
                    "transition-based acceptance is not supported")
            guard = ExprGuard(_parse_label(m.group(1), ap))
            edges.append((current, guard, int(m.group(2))))
    return BuchiAutomaton(
        ap=ap,
        num_states=num_states,
        initial=frozenset(initial),
        accepting=frozenset(accepting),
        edges=edges,
    )
