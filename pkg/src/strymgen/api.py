"""Public pipeline combinators.

Typical use::

    s = Session()
    arr = arr_param(s, "arr")
    prog = (of_arr(s, arr)
            .map(lambda x: x * x)
            .filter(lambda x: eq(mod_(x, lit(2)), lit(0)))
            .fold(add, lit(0)))

User functions receive and return :class:`~strymgen.staged.Code` values.
A pipeline can be consumed once; its session owns every name it emits.
"""

from __future__ import annotations

from typing import Callable

from . import core
from .core import Atom, Card, For, Linear, Producer, StStream, Unfold
from .ir.nodes import (
    ARR, INT,
    ArrGet, ArrLen, Binop, CellGet, CellNew, CellSet, IntLit, LetS, MatchOptPair, OptionT,
    PairT, Program, Session, Var, SKIP, seq, show_ty,
)
from .staged import Code, CodeArr, CodeInt, StagingTypeError, _lift, code, lit, somePairE


class PipelineError(Exception):
    """Misuse of a pipeline: reuse, mixing sessions, ill-typed user code."""


class Pipeline:
    """A staged stream of atoms bound to one generation session."""

    def __init__(self, stream: StStream, session: Session):
        self._stream = stream
        self.session = session
        self._used = False

    def _take_stream(self) -> StStream:
        if self._used:
            raise PipelineError("pipeline already consumed")
        self._used = True
        return self._stream

    @property
    def is_linear(self) -> bool:
        return isinstance(self._stream, Linear)

    def map(self, f):
        return map(f, self)

    def filter(self, pred):
        return filter(pred, self)

    def take(self, n):
        return take(n, self)

    def flat_map(self, f):
        return flat_map(f, self)

    def zip_with(self, f, other):
        return zip_with(f, self, other)

    def fold(self, f, z):
        return fold(f, z, self)


def _as_code(a) -> Code:
    if not isinstance(a, Atom):
        raise PipelineError("pipeline elements must be single values")
    return code(a.expr, a.ty)


def _user(f, *args) -> Code:
    r = f(*args)
    if isinstance(r, int):
        r = _lift(r)
    if not isinstance(r, Code):
        raise PipelineError(f"user function returned {r!r}, expected staged code")
    return r


def arr_param(session: Session, name: str) -> CodeArr:
    """Declare an ``int[]`` program input."""
    return CodeArr(Var(session.add_param(name, ARR)))


def int_param(session: Session, name: str) -> CodeInt:
    """Declare an ``int`` program input."""
    return CodeInt(Var(session.add_param(name, INT)))


# -------------------------------------------------------------- sources


def of_arr(session: Session, arr: Code) -> Pipeline:
    if not isinstance(arr, Code) or arr.ty != ARR:
        raise StagingTypeError("of_arr needs an int[] value")

    def init(k):
        a = session.gensym("arr")
        return LetS(a, ARR, arr.expr, k(a))

    def upb(a):
        return Binop("-", ArrLen(Var(a)), IntLit(1))

    def index(a, i, k):
        el = session.gensym("el")
        return LetS(el, INT, ArrGet(Var(a), i), k(Atom(Var(el), INT)))

    return Pipeline(Linear(Producer(init, For(upb, index))), session)


def unfold(session: Session, f: Callable[[Code], Code], z: Code) -> Pipeline:
    """Stream driven by ``f``: ``Some(x, z')`` emits ``x`` and continues from
    ``z'``; ``None`` ends the stream."""
    first = _user(f, z)
    ty = first.ty
    if not (isinstance(ty, OptionT) and isinstance(ty.elem, PairT) and ty.elem.snd == z.ty):
        raise StagingTypeError(f"unfold step must return option<(a * {show_ty(z.ty)})>, got {show_ty(ty)}")
    el_ty = ty.elem.fst

    def init(k):
        s = session.gensym("s")
        return CellNew(s, ty, first.expr, k(s))

    def term(s):
        return core.is_some(CellGet(Var(s)))

    def step(s, k):
        el, st = session.gensym("el"), session.gensym("st")
        nxt = _user(f, code(Var(st), z.ty))
        return MatchOptPair(CellGet(Var(s)), el, st,
                            seq(CellSet(s, nxt.expr), k(Atom(Var(el), el_ty))), SKIP)

    return Pipeline(Linear(Producer(init, Unfold(term, Card.MANY, step))), session)


def iota(session: Session, n: Code) -> Pipeline:
    """``n, n+1, n+2, ...`` (infinite; bound it with ``take``)."""
    return unfold(session, lambda x: somePairE(x, x + lit(1)), n)


# ---------------------------------------------------------- transformers


def map(f: Callable[[Code], Code], p: Pipeline) -> Pipeline:
    names = p.session

    def tr(a, k):
        r = _user(f, _as_code(a))
        t = names.gensym("t")
        return LetS(t, r.ty, r.expr, k(Atom(Var(t), r.ty)))

    return Pipeline(core.map_raw(tr, p._take_stream()), names)


def filter(pred: Callable[[Code], Code], p: Pipeline) -> Pipeline:
    def test(a):
        r = _user(pred, _as_code(a))
        if r.ty != core.BOOL:
            raise StagingTypeError(f"filter predicate must be bool, got {show_ty(r.ty)}")
        return r.expr

    return Pipeline(core.filter_raw(test, p._take_stream()), p.session)


def take(n, p: Pipeline) -> Pipeline:
    n = lit(n) if isinstance(n, int) else n
    if n.ty != INT:
        raise StagingTypeError("take needs an int count")
    return Pipeline(core.take_raw(n.expr, p._take_stream(), p.session), p.session)


def flat_map(f: Callable[[Code], Pipeline], p: Pipeline) -> Pipeline:
    names = p.session

    def inner(a):
        q = f(_as_code(a))
        if not isinstance(q, Pipeline):
            raise PipelineError("flat_map function must return a pipeline")
        if q.session is not names:
            raise PipelineError("inner pipeline belongs to another session")
        return q._take_stream()

    return Pipeline(core.flat_map_raw(inner, p._take_stream()), names)


def zip_with(f: Callable[[Code, Code], Code], p1: Pipeline, p2: Pipeline) -> Pipeline:
    if p1.session is not p2.session:
        raise PipelineError("zip_with needs pipelines from one session")
    if p1 is p2:
        raise PipelineError("cannot zip a pipeline with itself; build it twice")
    names = p1.session

    def combine(pv, k):
        r = _user(f, _as_code(pv.fst), _as_code(pv.snd))
        return k(Atom(r.expr, r.ty))

    zipped = core.zip_raw(p1._take_stream(), p2._take_stream(), names)
    return Pipeline(core.map_raw(combine, zipped), names)


# ------------------------------------------------------------- consumer


def fold(f: Callable[[Code, Code], Code], z: Code, p: Pipeline) -> Program:
    """Left fold into a fresh accumulator cell; returns the finished program."""
    names = p.session
    if names.finished:
        raise PipelineError("session already produced a program")
    z = lit(z) if isinstance(z, int) else z
    s = names.gensym("s")
    acc = code(CellGet(Var(s)), z.ty)

    def consumer(a):
        r = _user(f, acc, _as_code(a))
        if r.ty != z.ty:
            raise StagingTypeError(f"fold step returns {show_ty(r.ty)}, accumulator is {show_ty(z.ty)}")
        return CellSet(s, r.expr)

    body = CellNew(s, z.ty, z.expr, core.fold_raw(consumer, p._take_stream(), names))
    names.finished = True
    return Program(tuple(names.params), body, (s, z.ty))


def compile(spec) -> Program:
    """Build the program described by a :class:`~strymgen.pipespec.PipelineSpec`."""
    from .pipespec import build
    return build(spec)


__all__ = [
    "Pipeline", "PipelineError", "arr_param", "compile", "filter", "flat_map", "fold",
    "int_param", "iota", "map", "of_arr", "take", "unfold", "zip_with",
]
