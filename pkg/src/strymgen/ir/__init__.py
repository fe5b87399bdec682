"""The target imperative language: nodes, checks, evaluator and text form."""

from .checks import AllocReport, IRTypeError, Violation, alloc_scan, scope_check, type_check
from .evaluator import Counters, EvalError, FuelExhausted, evaluate
from .nodes import Program, Session
from .text import ParseError, parse_program, print_program

__all__ = [
    "AllocReport", "Counters", "EvalError", "FuelExhausted", "IRTypeError", "ParseError", "Program",
    "Session", "Violation", "alloc_scan", "evaluate", "parse_program", "print_program", "scope_check",
    "type_check",
]
