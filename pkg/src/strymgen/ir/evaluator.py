"""Instrumented big-step evaluator.

Programs are translated once into nested Python closures which are then run
against an environment dict. Counters:

* ``steps``: every expression or statement node visited, plus one per loop
  iteration (the loop-control visit). Drives the fuel bound.
* ``ops``: primitive operations only (arithmetic, comparisons, boolean
  connectives, array and cell access, allocation, branches, loop tests,
  calls). Naming is free: variable reads, literals and ``let`` cost nothing.
* ``allocations`` / ``allocations_user``: pair, cons, Some, Some-pair and
  procedure-value creations.
* ``steady_allocations`` / ``steady_allocations_user``: the subset executed
  while some loop body or condition is running.
* ``result_writes``: assignments to the result cell, i.e. fold-consumer
  invocations.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

from ..arith import ArithmeticFault, BINOPS, CMPS
from .nodes import (
    And, ArrGet, ArrLen, Binop, BoolLit, CellGet, CellNew, CellSet, Cmp, ConsE, Expr,
    ForS, IfS, IntLit, LetS, ListT, MatchOptPair, NilE, NoneE, Not, OptionT, Or, PairE,
    PairT, ProcCall, ProcDef, Program, Seq, Skip, SomeE, SomePairE, Stmt, Ty, UnitLit,
    Var, WhileS,
)

DEFAULT_FUEL = 10**8


class EvalError(Exception):
    pass


class FuelExhausted(EvalError):
    pass


class BoundsError(EvalError):
    pass


@dataclass
class Counters:
    steps: int = 0
    ops: int = 0
    allocations: int = 0
    allocations_user: int = 0
    steady_allocations: int = 0
    steady_allocations_user: int = 0
    result_writes: int = 0

    @property
    def steady_allocations_nonuser(self) -> int:
        return self.steady_allocations - self.steady_allocations_user

    def as_dict(self) -> dict:
        return asdict(self)


class Some:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __eq__(self, other):
        return isinstance(other, Some) and self.value == other.value

    def __hash__(self):
        return hash(("Some", self.value))

    def __repr__(self):
        return f"Some({self.value!r})"


class _Closure:
    __slots__ = ("body", "env", "name")

    def __init__(self, body, env, name):
        self.body = body
        self.env = env
        self.name = name


class _Machine:
    __slots__ = ("c", "fuel", "depth", "result_box")

    def __init__(self, fuel):
        self.c = Counters()
        self.fuel = fuel
        self.depth = 0
        self.result_box = None


_UNBOUND = object()


def _alloc(m: _Machine, user: bool) -> None:
    c = m.c
    c.allocations += 1
    if user:
        c.allocations_user += 1
    if m.depth:
        c.steady_allocations += 1
        if user:
            c.steady_allocations_user += 1


class _Compiler:
    def __init__(self, m: _Machine, result_name: str):
        self.m = m
        self.result_name = result_name

    # ------------------------------------------------------------ exprs

    def expr(self, e: Expr):
        m = self.m
        c = m.c
        if isinstance(e, IntLit):
            v = e.value

            def f(env):
                c.steps += 1
                return v
            return f
        if isinstance(e, BoolLit):
            v = e.value

            def f(env):
                c.steps += 1
                return v
            return f
        if isinstance(e, UnitLit):
            def f(env):
                c.steps += 1
                return ()
            return f
        if isinstance(e, Var):
            name = e.name

            def f(env):
                c.steps += 1
                return env[name]
            return f
        if isinstance(e, Binop):
            op = BINOPS[e.op]
            a = self.expr(e.left)
            b = self.expr(e.right)

            def f(env):
                c.steps += 1
                c.ops += 1
                return op(a(env), b(env))
            return f
        if isinstance(e, Cmp):
            op = CMPS[e.op]
            a = self.expr(e.left)
            b = self.expr(e.right)

            def f(env):
                c.steps += 1
                c.ops += 1
                return op(a(env), b(env))
            return f
        if isinstance(e, And):
            a = self.expr(e.left)
            b = self.expr(e.right)

            def f(env):
                c.steps += 1
                c.ops += 1
                return a(env) and b(env)
            return f
        if isinstance(e, Or):
            a = self.expr(e.left)
            b = self.expr(e.right)

            def f(env):
                c.steps += 1
                c.ops += 1
                return a(env) or b(env)
            return f
        if isinstance(e, Not):
            a = self.expr(e.operand)

            def f(env):
                c.steps += 1
                c.ops += 1
                return not a(env)
            return f
        if isinstance(e, ArrLen):
            a = self.expr(e.arr)

            def f(env):
                c.steps += 1
                c.ops += 1
                return len(a(env))
            return f
        if isinstance(e, ArrGet):
            a = self.expr(e.arr)
            i = self.expr(e.idx)

            def f(env):
                c.steps += 1
                c.ops += 1
                arr = a(env)
                k = i(env)
                if 0 <= k < len(arr):
                    return arr[k]
                raise BoundsError(f"index {k} out of bounds for array of length {len(arr)}")
            return f
        if isinstance(e, CellGet):
            if isinstance(e.cell, Var):
                name = e.cell.name

                def f(env):
                    c.steps += 2
                    c.ops += 1
                    return env[name][0]
                return f
            inner = self.expr(e.cell)

            def f(env):
                c.steps += 1
                c.ops += 1
                return inner(env)[0]
            return f
        if isinstance(e, (PairE, SomePairE)):
            a = self.expr(e.fst)
            b = self.expr(e.snd)
            user = e.user
            wrap = isinstance(e, SomePairE)

            def f(env):
                c.steps += 1
                c.ops += 1
                _alloc(m, user)
                v = (a(env), b(env))
                return Some(v) if wrap else v
            return f
        if isinstance(e, ConsE):
            h = self.expr(e.head)
            t = self.expr(e.tail)
            user = e.user

            def f(env):
                c.steps += 1
                c.ops += 1
                _alloc(m, user)
                return (h(env), t(env))
            return f
        if isinstance(e, SomeE):
            a = self.expr(e.value)
            user = e.user

            def f(env):
                c.steps += 1
                c.ops += 1
                _alloc(m, user)
                return Some(a(env))
            return f
        if isinstance(e, NilE):
            def f(env):
                c.steps += 1
                return ()
            return f
        if isinstance(e, NoneE):
            def f(env):
                c.steps += 1
                return None
            return f
        raise EvalError(f"cannot evaluate {e!r}")

    # ------------------------------------------------------------ stmts

    def stmt(self, s: Stmt, bound: frozenset):
        m = self.m
        c = m.c
        if isinstance(s, LetS):
            name = s.name
            rhs = self.expr(s.rhs)
            body = self.stmt(s.body, bound | {name})
            if name in bound:
                def f(env):
                    c.steps += 1
                    old = env.get(name, _UNBOUND)
                    env[name] = rhs(env)
                    body(env)
                    env[name] = old
            else:
                def f(env):
                    c.steps += 1
                    env[name] = rhs(env)
                    body(env)
            return f
        if isinstance(s, CellNew):
            name = s.name
            init = self.expr(s.init)
            body = self.stmt(s.body, bound | {name})
            is_result = name == self.result_name
            shadow = name in bound

            def f(env):
                c.steps += 1
                c.ops += 1
                old = env.get(name, _UNBOUND) if shadow else None
                box = [init(env)]
                if is_result:
                    m.result_box = box
                env[name] = box
                body(env)
                if shadow:
                    env[name] = old
            return f
        if isinstance(s, CellSet):
            name = s.name
            val = self.expr(s.value)
            if name == self.result_name:
                def f(env):
                    c.steps += 1
                    c.ops += 1
                    c.result_writes += 1
                    env[name][0] = val(env)
            else:
                def f(env):
                    c.steps += 1
                    c.ops += 1
                    env[name][0] = val(env)
            return f
        if isinstance(s, ForS):
            idx = s.idx
            upb = self.expr(s.upb)
            body = self.stmt(s.body, bound | {idx})
            fuel = m.fuel

            def f(env):
                c.steps += 1
                hi = upb(env)
                m.depth += 1
                try:
                    for i in range(0, hi + 1):
                        c.steps += 1
                        c.ops += 1
                        if c.steps > fuel:
                            raise FuelExhausted(f"fuel of {fuel} steps exhausted")
                        env[idx] = i
                        body(env)
                finally:
                    m.depth -= 1
            return f
        if isinstance(s, WhileS):
            cond = self.expr(s.cond)
            body = self.stmt(s.body, bound)
            fuel = m.fuel

            def f(env):
                c.steps += 1
                m.depth += 1
                try:
                    while True:
                        c.ops += 1
                        if not cond(env):
                            break
                        c.steps += 1
                        if c.steps > fuel:
                            raise FuelExhausted(f"fuel of {fuel} steps exhausted")
                        body(env)
                finally:
                    m.depth -= 1
            return f
        if isinstance(s, IfS):
            cond = self.expr(s.cond)
            then = self.stmt(s.then, bound)
            els = self.stmt(s.else_, bound) if s.else_ is not None else None

            def f(env):
                c.steps += 1
                c.ops += 1
                if cond(env):
                    then(env)
                elif els is not None:
                    els(env)
            return f
        if isinstance(s, MatchOptPair):
            scrut = self.expr(s.scrutinee)
            el, st = s.el, s.st
            inner = bound | {el} | ({st} if st else set())
            some = self.stmt(s.some, inner)
            none = self.stmt(s.none, bound)
            # binders are rebound each time; outer values of the same names are restored
            restore = bool(inner & bound)

            def f(env):
                c.steps += 1
                c.ops += 1
                v = scrut(env)
                if v is None:
                    none(env)
                    return
                if restore:
                    saved = {n: env.get(n, _UNBOUND) for n in (el, st) if n}
                if st is None:
                    env[el] = v.value
                else:
                    env[el], env[st] = v.value
                some(env)
                if restore:
                    for n, old in saved.items():
                        env[n] = old
            return f
        if isinstance(s, ProcDef):
            name = s.name
            body = self.stmt(s.body, bound | {name})
            scope = self.stmt(s.scope, bound | {name})

            def f(env):
                c.steps += 1
                c.ops += 1
                _alloc(m, False)
                captured = dict(env)
                clo = _Closure(body, captured, name)
                captured[name] = clo
                env[name] = clo
                scope(env)
            return f
        if isinstance(s, ProcCall):
            name = s.name
            fuel = m.fuel

            def f(env):
                c.steps += 1
                c.ops += 1
                if c.steps > fuel:
                    raise FuelExhausted(f"fuel of {fuel} steps exhausted")
                clo = env[name]
                clo.body(dict(clo.env))
            return f
        if isinstance(s, Seq):
            items = tuple(self.stmt(x, bound) for x in s.items)

            def f(env):
                c.steps += 1
                for g in items:
                    g(env)
            return f
        if isinstance(s, Skip):
            def f(env):
                c.steps += 1
            return f
        raise EvalError(f"cannot execute {s!r}")


def to_python(v, ty: Ty):
    """Convert an evaluator value of type ``ty`` to plain Python data."""
    if isinstance(ty, ListT):
        out = []
        while v != ():
            head, v = v
            out.append(to_python(head, ty.elem))
        return out
    if isinstance(ty, PairT):
        return (to_python(v[0], ty.fst), to_python(v[1], ty.snd))
    if isinstance(ty, OptionT):
        return None if v is None else Some(to_python(v.value, ty.elem))
    return v


def _bind_inputs(p: Program, inputs) -> dict:
    if isinstance(inputs, dict):
        missing = [n for n, _ in p.params if n not in inputs]
        if missing:
            raise EvalError(f"missing inputs: {', '.join(missing)}")
        values = [inputs[n] for n, _ in p.params]
    else:
        values = list(inputs)
        if len(values) != len(p.params):
            raise EvalError(f"expected {len(p.params)} inputs, got {len(values)}")
    env = {}
    for (name, _), v in zip(p.params, values):
        env[name] = tuple(v) if isinstance(v, (list, tuple)) else v
    return env


def evaluate(p: Program, inputs, fuel: int = DEFAULT_FUEL):
    """Run ``p`` on ``inputs`` (positional list or name->value dict).

    Returns ``(value, Counters)``; ``value`` is converted to plain Python
    (lists, tuples, ints, bools). Raises :class:`FuelExhausted`,
    :class:`BoundsError` or :class:`~strymgen.arith.ArithmeticFault`.
    """
    m = _Machine(fuel)
    env = _bind_inputs(p, inputs)
    run = _Compiler(m, p.result[0]).stmt(p.body, frozenset(env))
    run(env)
    if m.result_box is None:
        raise EvalError(f"result cell {p.result[0]!r} was never created")
    return to_python(m.result_box[0], p.result[1]), m.c


__all__ = [
    "ArithmeticFault", "BoundsError", "Counters", "DEFAULT_FUEL", "EvalError",
    "FuelExhausted", "Some", "evaluate", "to_python",
]
