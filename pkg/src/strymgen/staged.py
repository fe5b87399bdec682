"""Typed code values for writing per-element logic.

Everything built here carries the user tag, which is how the allocation
checks tell user-generator allocations apart from library overhead. No
simplification happens: ``add(lit(1), lit(2))`` stays ``1 + 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ir.nodes import (
    ARR, BOOL, INT,
    And, Binop, BoolLit, Cmp, ConsE, Expr, IntLit, ListT, NilE, NoneE, Not, OptionT, Or,
    PairE, PairT, SomeE, SomePairE, Ty, show_ty,
)


class StagingTypeError(TypeError):
    pass


@dataclass(frozen=True)
class Code:
    """An IR expression together with its type."""

    expr: Expr
    ty: Ty

    def __add__(self, other):
        return add(self, _lift(other))

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __floordiv__(self, other):
        return div(self, _lift(other))

    def __mod__(self, other):
        return mod_(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __rsub__(self, other):
        return sub(_lift(other), self)


class CodeInt(Code):
    def __init__(self, expr: Expr):
        super().__init__(expr, INT)


class CodeBool(Code):
    def __init__(self, expr: Expr):
        super().__init__(expr, BOOL)


class CodeArr(Code):
    def __init__(self, expr: Expr):
        super().__init__(expr, ARR)


def code(expr: Expr, ty: Ty) -> Code:
    """Wrap ``expr`` in the most specific code class for ``ty``."""
    if ty == INT:
        return CodeInt(expr)
    if ty == BOOL:
        return CodeBool(expr)
    if ty == ARR:
        return CodeArr(expr)
    return Code(expr, ty)


def _lift(x) -> Code:
    if isinstance(x, Code):
        return x
    if isinstance(x, bool):
        return tru() if x else fls()
    if isinstance(x, int):
        return lit(x)
    raise StagingTypeError(f"cannot stage {x!r}")


def _need(x: Code, ty: Ty, what: str) -> None:
    if not isinstance(x, Code):
        raise StagingTypeError(f"{what}: expected code, got {x!r}")
    if x.ty != ty:
        raise StagingTypeError(f"{what}: expected {show_ty(ty)}, got {show_ty(x.ty)}")


def lit(n: int) -> CodeInt:
    return CodeInt(IntLit(int(n), user=True))


def tru() -> CodeBool:
    return CodeBool(BoolLit(True, user=True))


def fls() -> CodeBool:
    return CodeBool(BoolLit(False, user=True))


def _arith(op: str):
    def build(x: Code, y: Code) -> CodeInt:
        x, y = _lift(x), _lift(y)
        _need(x, INT, op)
        _need(y, INT, op)
        return CodeInt(Binop(op, x.expr, y.expr, user=True))
    build.__name__ = {"+": "add", "-": "sub", "*": "mul", "/": "div", "mod": "mod_", "min": "min_"}[op]
    return build


add = _arith("+")
sub = _arith("-")
mul = _arith("*")
div = _arith("/")
mod_ = _arith("mod")
min_ = _arith("min")


def _compare(op: str):
    def build(x: Code, y: Code) -> CodeBool:
        x, y = _lift(x), _lift(y)
        if op == "=":
            if x.ty != y.ty:
                raise StagingTypeError(f"=: operand types differ ({show_ty(x.ty)} vs {show_ty(y.ty)})")
        else:
            _need(x, INT, op)
            _need(y, INT, op)
        return CodeBool(Cmp(op, x.expr, y.expr, user=True))
    build.__name__ = {"<": "lt", "<=": "le", "=": "eq", ">": "gt", ">=": "ge"}[op]
    return build


lt = _compare("<")
le = _compare("<=")
eq = _compare("=")
gt = _compare(">")
ge = _compare(">=")


def and_(x: Code, y: Code) -> CodeBool:
    _need(x, BOOL, "and")
    _need(y, BOOL, "and")
    return CodeBool(And(x.expr, y.expr, user=True))


def or_(x: Code, y: Code) -> CodeBool:
    _need(x, BOOL, "or")
    _need(y, BOOL, "or")
    return CodeBool(Or(x.expr, y.expr, user=True))


def not_(x: Code) -> CodeBool:
    _need(x, BOOL, "not")
    return CodeBool(Not(x.expr, user=True))


def pairE(x: Code, y: Code) -> Code:
    x, y = _lift(x), _lift(y)
    return Code(PairE(x.expr, y.expr, user=True), PairT(x.ty, y.ty))


def consE(h: Code, t: Code) -> Code:
    h = _lift(h)
    if not isinstance(t.ty, ListT) or t.ty.elem != h.ty:
        raise StagingTypeError(f"cons: cannot put {show_ty(h.ty)} onto {show_ty(t.ty)}")
    return Code(ConsE(h.expr, t.expr, user=True), t.ty)


def nilE(elem: Ty = INT) -> Code:
    return Code(NilE(user=True), ListT(elem))


def someE(x: Code) -> Code:
    x = _lift(x)
    return Code(SomeE(x.expr, user=True), OptionT(x.ty))


def somePairE(x: Code, y: Code) -> Code:
    x, y = _lift(x), _lift(y)
    return Code(SomePairE(x.expr, y.expr, user=True), OptionT(PairT(x.ty, y.ty)))


def noneE(elem: Ty) -> Code:
    return Code(NoneE(user=True), OptionT(elem))
