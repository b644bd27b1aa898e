from .logic import (
    METARULES, NEGATION, POSTCOND, PRIMITIVE_ARITY, Clause, Literal, MetaSub,
    Metarule, Program, ProgramError,
)
from .prover import DEFAULT_DEPTH, FlounderError, GamePrimitives, InstantiationError, Prover, prove
from .syntax import RuleSyntaxError, load_rules, parse_rules, render_rules, save_rules

__all__ = [
    "METARULES", "NEGATION", "POSTCOND", "PRIMITIVE_ARITY", "Clause", "Literal", "MetaSub",
    "Metarule", "Program", "ProgramError", "DEFAULT_DEPTH", "FlounderError", "GamePrimitives",
    "InstantiationError", "Prover", "prove", "RuleSyntaxError", "load_rules", "parse_rules",
    "render_rules", "save_rules",
]
