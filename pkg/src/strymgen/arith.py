"""Integer arithmetic shared by the IR evaluator and the reference oracle.

Division truncates toward zero and ``mod`` takes the sign of the dividend,
so ``div(a, b) * b + mod(a, b) == a`` for every ``b != 0``.
"""

from __future__ import annotations


class ArithmeticFault(Exception):
    """Division or remainder by zero."""


def div(a: int, b: int) -> int:
    if b == 0:
        raise ArithmeticFault(f"division by zero: {a} / 0")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def mod(a: int, b: int) -> int:
    if b == 0:
        raise ArithmeticFault(f"modulo by zero: {a} mod 0")
    return a - div(a, b) * b


BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": div,
    "mod": mod,
    "min": min,
}

CMPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}
