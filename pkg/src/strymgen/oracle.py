"""Reference semantics of pipeline specs, evaluated directly on Python values.

Streams are Python generators. Infinite sources draw from a shared element
budget so an unbounded pipeline fails with :class:`BudgetExhausted` instead
of running forever. Arithmetic comes from :mod:`strymgen.arith`, the same
definitions the IR evaluator uses.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from .arith import BINOPS, CMPS
from .pipespec import (
    Chain, Filter, FlatMap, Fold, FoldCons, Iota, Map, OfArr, PipelineSpec, Sum, Take,
    UnfoldSrc, array_names,
)

DEFAULT_BUDGET = 10**6

_ARITH = {"add": "+", "sub": "-", "mul": "*", "div": "/", "mod": "mod", "min": "min"}
_CMP = {"lt": "<", "le": "<=", "eq": "=", "gt": ">", "ge": ">="}


class BudgetExhausted(Exception):
    """An infinite source was asked for more elements than the budget allows."""


class OracleError(Exception):
    pass


def eval_expr(e, env: dict):
    if isinstance(e, (bool, int)):
        return e
    op = e[0]
    if op == "var":
        return env[e[1]]
    if op == "int":
        return e[1]
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "none":
        return None
    if op == "and":
        return eval_expr(e[1], env) and eval_expr(e[2], env)
    if op == "or":
        return eval_expr(e[1], env) or eval_expr(e[2], env)
    if op == "not":
        return not eval_expr(e[1], env)
    a, b = eval_expr(e[1], env), eval_expr(e[2], env)
    if op in _ARITH:
        return BINOPS[_ARITH[op]](a, b)
    if op in _CMP:
        return CMPS[_CMP[op]](a, b)
    if op in ("pair", "some_pair"):
        return (a, b)
    raise OracleError(f"unknown op {op!r}")


def _apply(fn, args, env):
    inner = dict(env)
    inner.update(zip(fn.params, args))
    return eval_expr(fn.body, inner)


class _Budget:
    def __init__(self, n: int):
        self.left = n

    def draw(self):
        if self.left <= 0:
            raise BudgetExhausted("element budget exhausted on an infinite source")
        self.left -= 1


def _zip(xs: Iterator, ys: Iterator, fn, env) -> Iterator:
    for x in xs:
        for y in ys:
            yield _apply(fn, (x, y), env)
            break
        else:
            return


def stream(c: Chain, inputs: dict, env: dict, budget: _Budget) -> Iterator:
    """Lazily produce the elements of chain ``c``."""
    src = c.source
    if isinstance(src, OfArr):
        s = iter(inputs[src.name])
    elif isinstance(src, Iota):
        s = _iota(eval_expr(src.start, env), budget)
    else:
        s = _unfold(src, env, budget)
    for op in c.ops:
        s = _stage(op, s, inputs, env, budget)
    return s


def _iota(n, budget):
    for v in itertools.count(n):
        budget.draw()
        yield v


def _unfold(src: UnfoldSrc, env, budget):
    z = eval_expr(src.seed, env)
    while True:
        nxt = _apply(src.step, (z,), env)
        if nxt is None:
            return
        budget.draw()
        v, z = nxt
        yield v


def _stage(op, s, inputs, env, budget):
    if isinstance(op, Map):
        return (_apply(op.fn, (x,), env) for x in s)
    if isinstance(op, Filter):
        return (x for x in s if _apply(op.fn, (x,), env))
    if isinstance(op, Take):
        return itertools.islice(s, max(0, eval_expr(op.count, env)))
    if isinstance(op, FlatMap):
        return (y for x in s for y in stream(op.inner, inputs, {**env, op.var: x}, budget))
    return _zip(s, stream(op.other, inputs, env, budget), op.fn, env)


def elements(spec: PipelineSpec, inputs, budget: int = DEFAULT_BUDGET) -> list:
    """Every element of the spec's stream, before reduction."""
    return list(stream(spec.chain, _named(spec, inputs), {}, _Budget(budget)))


def _named(spec, inputs) -> dict:
    if isinstance(inputs, dict):
        return inputs
    names = array_names(spec)
    if len(names) != len(inputs):
        raise OracleError(f"expected {len(names)} input arrays, got {len(inputs)}")
    return dict(zip(names, inputs))


def oracle_eval(spec: PipelineSpec, inputs, budget: int = DEFAULT_BUDGET):
    """Reduce the spec's stream. Lists come back newest first (cons fold)."""
    s = stream(spec.chain, _named(spec, inputs), {}, _Budget(budget))
    r = spec.reduce
    if isinstance(r, Sum):
        return sum(s)
    if isinstance(r, FoldCons):
        out = list(s)
        out.reverse()
        return out
    assert isinstance(r, Fold)
    acc = eval_expr(r.seed, {})
    for x in s:
        acc = _apply(r.fn, (acc, x), {})
    return acc
