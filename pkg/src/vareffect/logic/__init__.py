"""Propositional formulas, simplification and SAT queries."""

from .formula import (
    FALSE,
    TRUE,
    And,
    Const,
    Formula,
    Not,
    Or,
    Var,
    Xor,
    conj,
    disj,
    eliminate_xor,
    evaluate,
    has_xor,
    substitute,
    substitute_many,
)
from .sat import AxiomSet, equivalent, find_model, is_satisfiable, is_tautology
from .simplify import negate, simplify
from .text import FormulaSyntaxError, format_formula, parse_formula

__all__ = [
    "FALSE",
    "TRUE",
    "And",
    "AxiomSet",
    "Const",
    "Formula",
    "FormulaSyntaxError",
    "Not",
    "Or",
    "Var",
    "Xor",
    "conj",
    "disj",
    "eliminate_xor",
    "equivalent",
    "evaluate",
    "find_model",
    "format_formula",
    "has_xor",
    "is_satisfiable",
    "is_tautology",
    "negate",
    "parse_formula",
    "simplify",
    "substitute",
    "substitute_many",
]
