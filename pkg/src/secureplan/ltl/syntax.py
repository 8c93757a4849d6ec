"""LTL abstract syntax, concrete parser, and negation normal form.

Surface syntax (ASCII): atoms are identifiers, ``!`` ``&`` ``|`` for Boolean
connectives, ``X`` ``U`` ``R`` ``F`` ``G`` for temporal operators, ``true`` /
``false`` constants.  Precedence, loosest to tightest: ``|``, ``&``, ``U``/``R``
(right associative), unary (``!``, ``X``, ``F``, ``G``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class LtlError(Exception):
    pass


class ParseError(LtlError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class Formula:
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula

    def __str__(self):
        return f"!{_paren(self.operand)}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula

    def __str__(self):
        return f"X {_paren(self.operand)}"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} U {self.right})"


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} R {self.right})"


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula

    def __str__(self):
        return f"F {_paren(self.operand)}"


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula

    def __str__(self):
        return f"G {_paren(self.operand)}"


def _paren(f: Formula) -> str:
    if isinstance(f, (Atom, TrueF, FalseF, Not)):
        return str(f)
    return f"({f})"


def atoms_of(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset([f.name])
    if isinstance(f, (TrueF, FalseF)):
        return frozenset()
    if isinstance(f, (Not, Next, Eventually, Always)):
        return atoms_of(f.operand)
    return atoms_of(f.left) | atoms_of(f.right)


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<amp>&&?)|(?P<bar>\|\|?)|(?P<bang>!)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)

_UNARY = {"X": Next, "F": Eventually, "G": Always, "<>": Eventually, "[]": Always}
_RESERVED = {"X", "F", "G", "U", "R", "true", "false"}


class _Parser:
    def __init__(self, text: str, ap_registry: set[str] | None):
        self.text = text
        self.registry = ap_registry
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == m.start():
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                raise ParseError(f"unexpected character {stripped[0]!r}",
                                 len(text) - len(stripped))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.parse_or()
        kind, text, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected token {text!r}", pos)
        return f

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek()[0] == "bar":
            self.take()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_until()
        while self.peek()[0] == "amp":
            self.take()
            f = And(f, self.parse_until())
        return f

    def parse_until(self) -> Formula:
        f = self.parse_unary()
        kind, text, _ = self.peek()
        if kind == "ident" and text in ("U", "R"):
            self.take()
            rhs = self.parse_until()  # right associative
            return Until(f, rhs) if text == "U" else Release(f, rhs)
        return f

    def parse_unary(self) -> Formula:
        kind, text, pos = self.peek()
        if kind is None:
            raise ParseError("unexpected end of input", pos)
        if kind == "bang":
            self.take()
            return Not(self.parse_unary())
        if kind == "ident" and text in _UNARY:
            self.take()
            return _UNARY[text](self.parse_unary())
        if kind == "ident":
            self.take()
            if text == "true":
                return TrueF()
            if text == "false":
                return FalseF()
            if self.registry is not None and text not in self.registry:
                raise ParseError(f"unknown atomic proposition {text!r}", pos)
            return Atom(text)
        if kind == "lpar":
            self.take()
            f = self.parse_or()
            kind2, _, pos2 = self.peek()
            if kind2 != "rpar":
                raise ParseError("unbalanced parentheses", pos2)
            self.take()
            return f
        raise ParseError(f"unexpected token {text!r}", pos)


def parse_ltl(text: str, ap_registry=None) -> Formula:
    """Parse a formula; atoms must belong to ``ap_registry`` when given."""
    registry = set(ap_registry) if ap_registry is not None else None
    return _Parser(text, registry).parse()


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms using the operator dualities."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Next):
        return Next(to_nnf(f.operand))
    if isinstance(f, Eventually):
        return Eventually(to_nnf(f.operand))
    if isinstance(f, Always):
        return Always(to_nnf(f.operand))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    assert isinstance(f, Not)
    g = f.operand
    if isinstance(g, TrueF):
        return FalseF()
    if isinstance(g, FalseF):
        return TrueF()
    if isinstance(g, Atom):
        return f
    if isinstance(g, Not):
        return to_nnf(g.operand)
    if isinstance(g, And):
        return Or(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if isinstance(g, Or):
        return And(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if isinstance(g, Next):
        return Next(to_nnf(Not(g.operand)))
    if isinstance(g, Eventually):
        return Always(to_nnf(Not(g.operand)))
    if isinstance(g, Always):
        return Eventually(to_nnf(Not(g.operand)))
    if isinstance(g, Until):
        return Release(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if isinstance(g, Release):
        return Until(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    raise LtlError(f"unhandled formula {f!r}")
