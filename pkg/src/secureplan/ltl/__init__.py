"""LTL front-end: parsing, lasso semantics, Büchi translation, HOA interchange."""

from .automaton import BuchiAutomaton, ExprGuard, Guard, LiteralGuard
from .hoa import HoaError, HoaUnsupportedError, from_hoa, to_hoa
from .semantics import all_lassos, all_symbols, eval_ltl_on_lasso
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
    ParseError,
    Release,
    TrueF,
    Until,
    atoms_of,
    parse_ltl,
    to_nnf,
)
from .translate import ltl_to_gba, ltl_to_nba, degeneralize, merge_duplicate_states

__all__ = [
    "Always", "And", "Atom", "BuchiAutomaton", "Eventually", "ExprGuard",
    "FalseF", "Formula", "Guard", "HoaError", "HoaUnsupportedError",
    "LiteralGuard", "LtlError", "Next", "Not", "Or", "ParseError", "Release",
    "TrueF", "Until", "all_lassos", "all_symbols", "atoms_of", "degeneralize",
    "eval_ltl_on_lasso", "from_hoa", "ltl_to_gba", "ltl_to_nba",
    "merge_duplicate_states", "parse_ltl", "to_hoa", "to_nnf",
]
