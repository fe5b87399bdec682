"""Staged stream representation and the raw fusion machinery.

A stream is described entirely at generation time. Producers hand the
consumer the ingredients of a loop (a ``For`` bound and indexer, or an
``Unfold`` termination test and stepper) instead of a loop; the consumer
picks the loop once the whole pipeline is known. All functions here take and
return generator-time values; IR is emitted only when a consumer calls a
producer's ``init`` with a continuation.

Continuations return :class:`~strymgen.ir.nodes.Stmt`. Stream elements are
:class:`Atom` (one IR expression and its type) or :class:`PairV` (a pair
known to be a pair while generating, so zipping costs no tuples).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Union

from .ir.nodes import (
    BOOL, INT, PROC,
    And, Binop, CellGet, CellNew, CellSet, Cmp, Expr, ForS,
    IfS, IntLit, MatchOptPair, NoneE, Not, OptionT, Or, ProcCall, ProcDef, Session,
    SomeE, Stmt, Ty, Var, WhileS, SKIP, seq,
)


class GenerationError(Exception):
    """Raised for internal misuse of the raw combinators."""


# ------------------------------------------------------------ elements


@dataclass(frozen=True)
class Atom:
    expr: Expr
    ty: Ty


@dataclass(frozen=True)
class PairV:
    fst: Any
    snd: Any


StagedValue = Union[Atom, PairV]


# ----------------------------------------------------------- producers


class Card(Enum):
    AT_MOST_1 = "AtMost1"
    MANY = "Many"


@dataclass(frozen=True)
class For:
    upb: Callable[[Any], Expr]
    index: Callable[[Any, Expr, Callable[[Any], Stmt]], Stmt]


@dataclass(frozen=True)
class Unfold:
    term: Callable[[Any], Expr]
    card: Card
    step: Callable[[Any, Callable[[Any], Stmt]], Stmt]


@dataclass(frozen=True)
class Producer:
    """``init(k)`` emits the state set-up and calls ``k(state)`` for the rest."""

    init: Callable[[Callable[[Any], Stmt]], Stmt]
    shape: Union[For, Unfold]


@dataclass(frozen=True)
class Linear:
    producer: Producer


@dataclass(frozen=True)
class Nested:
    producer: Producer
    binder: Callable[[Any], "StStream"]


StStream = Union[Linear, Nested]


def cell_get(name: str) -> Expr:
    return CellGet(Var(name))


def incr(name: str) -> Stmt:
    return CellSet(name, Binop("+", cell_get(name), IntLit(1)))


def decr(name: str) -> Stmt:
    return CellSet(name, Binop("-", cell_get(name), IntLit(1)))


def is_some(e: Expr) -> Expr:
    return Not(Cmp("=", e, NoneE()))


# --------------------------------------------------------- conversions


def for_unfold_producer(p: Producer, names: Session) -> Producer:
    """Turn a ``For`` producer into a while-style one with an index cell."""
    if not isinstance(p.shape, For):
        return p
    upb, index = p.shape.upb, p.shape.index

    def init(k):
        def with_state(s0):
            i = names.gensym("i")
            return CellNew(i, INT, IntLit(0), k((i, s0)))
        return p.init(with_state)

    def term(st):
        i, s0 = st
        return Cmp("<=", cell_get(i), upb(s0))

    def step(st, k):
        i, s0 = st
        return index(s0, cell_get(i), lambda a: seq(incr(i), k(a)))

    return Producer(init, Unfold(term, Card.MANY, step))


def for_unfold(s: StStream, names: Session) -> StStream:
    """Convert the head producer of ``s`` from ``For`` to ``Unfold``."""
    if isinstance(s, Linear):
        return Linear(for_unfold_producer(s.producer, names))
    return Nested(for_unfold_producer(s.producer, names), s.binder)


# ------------------------------------------------------------- mapping


def map_producer(tr, p: Producer) -> Producer:
    if isinstance(p.shape, For):
        index = p.shape.index
        return Producer(p.init, For(p.shape.upb, lambda s, i, k: index(s, i, lambda e: tr(e, k))))
    step = p.shape.step
    return Producer(p.init, Unfold(p.shape.term, p.shape.card, lambda s, k: step(s, lambda e: tr(e, k))))


def map_raw(tr: Callable[[Any, Callable[[Any], Stmt]], Stmt], s: StStream) -> StStream:
    """Compose ``tr`` (which must call its continuation exactly once) after
    the element production, descending to the innermost nesting level."""
    if isinstance(s, Linear):
        return Linear(map_producer(tr, s.producer))
    binder = s.binder
    return Nested(s.producer, lambda a: map_raw(tr, binder(a)))


def flat_map_raw(tr: Callable[[Any], StStream], s: StStream) -> StStream:
    if isinstance(s, Linear):
        return Nested(s.producer, tr)
    binder = s.binder
    return Nested(s.producer, lambda a: flat_map_raw(tr, binder(a)))


def filter_raw(pred: Callable[[Any], Expr], s: StStream) -> StStream:
    """Nest an at-most-one producer whose test is ``pred``."""
    def filter_stream(a):
        return Linear(Producer(lambda k: k(a), Unfold(pred, Card.AT_MOST_1, lambda x, k: k(x))))
    return flat_map_raw(filter_stream, s)


# ------------------------------------------------------------- folding


def consume_producer(p: Producer, consumer: Callable[[Any], Stmt], names: Session) -> Stmt:
    shape = p.shape
    if isinstance(shape, For):
        def loop(sp):
            i = names.gensym("i")
            return ForS(i, shape.upb(sp), shape.index(sp, Var(i), consumer))
        return p.init(loop)
    if shape.card is Card.AT_MOST_1:
        return p.init(lambda sp: IfS(shape.term(sp), shape.step(sp, consumer)))
    return p.init(lambda sp: WhileS(shape.term(sp), shape.step(sp, consumer)))


def fold_raw(consumer: Callable[[Any], Stmt], s: StStream, names: Session) -> Stmt:
    """Emit the loop nest feeding every element of ``s`` to ``consumer``."""
    if isinstance(s, Linear):
        return consume_producer(s.producer, consumer, names)
    binder = s.binder
    return consume_producer(s.producer, lambda e: fold_raw(consumer, binder(e), names), names)


# --------------------------------------------------- termination and take


def _add_term_producer(cond: Expr, p: Producer, names: Session) -> Producer:
    p = for_unfold_producer(p, names)
    shape = p.shape
    if shape.card is Card.AT_MOST_1:
        return p
    term = shape.term
    return Producer(p.init, Unfold(lambda s: And(cond, term(s)), shape.card, shape.step))


def more_termination(cond: Expr, s: StStream, names: Session) -> StStream:
    """Conjoin ``cond`` to the loop test of every many-element producer of ``s``.

    ``For`` producers are converted first; at-most-one producers (filters)
    compile to a plain conditional and are left alone.
    """
    if isinstance(s, Linear):
        return Linear(_add_term_producer(cond, s.producer, names))
    binder = s.binder
    return Nested(_add_term_producer(cond, s.producer, names),
                  lambda a: more_termination(cond, binder(a), names))


def add_nr(n: Expr, p: Producer, names: Session) -> Producer:
    """Allocate a countdown cell ``nr := n``, guard the loop with ``!nr > 0``
    and pair each element with a reference to the cell."""
    if not isinstance(p.shape, Unfold):
        raise GenerationError("add_nr needs an Unfold producer; apply for_unfold first")
    shape = p.shape

    def init(k):
        def with_state(s):
            nr = names.gensym("nr")
            return CellNew(nr, INT, n, k((nr, s)))
        return p.init(with_state)

    def term(st):
        nr, s = st
        return And(Cmp(">", cell_get(nr), IntLit(0)), shape.term(s))

    def step(st, k):
        nr, s = st
        return shape.step(s, lambda a: k(PairV(Atom(Var(nr), INT), a)))

    return Producer(init, Unfold(term, shape.card, step))


def take_raw(n: Expr, s: StStream, names: Session) -> StStream:
    """Limit ``s`` to its first ``n`` elements."""
    if isinstance(s, Linear) and isinstance(s.producer.shape, For):
        p = s.producer
        upb = p.shape.upb
        names.note("take:for-bound")
        return Linear(Producer(p.init, For(lambda st: Binop("min", Binop("-", n, IntLit(1)), upb(st)),
                                           p.shape.index)))

    def countdown(pv, k):
        return seq(decr(pv.fst.expr.name), k(pv.snd))

    if isinstance(s, Linear):
        names.note("take:linear-unfold")
        return Linear(map_producer(countdown, add_nr(n, for_unfold_producer(s.producer, names), names)))
    names.note("take:nested")
    binder = s.binder

    def inner(pv):
        nr = pv.fst.expr.name
        guarded = more_termination(Cmp(">", cell_get(nr), IntLit(0)), binder(pv.snd), names)
        return map_raw(lambda a, k: seq(decr(nr), k(a)), guarded)

    return Nested(add_nr(n, for_unfold_producer(s.producer, names), names), inner)


# ------------------------------------------------------------------ zip


def zip_producer(p1: Producer, p2: Producer, names: Session) -> Producer:
    """Advance two linear producers in lock step."""
    if isinstance(p1.shape, For) and isinstance(p2.shape, For):
        f1, f2 = p1.shape, p2.shape

        def init(k):
            return p1.init(lambda s1: p2.init(lambda s2: k((s1, s2))))

        def upb(st):
            return Binop("min", f1.upb(st[0]), f2.upb(st[1]))

        def index(st, i, k):
            return f1.index(st[0], i, lambda e1: f2.index(st[1], i, lambda e2: k(PairV(e1, e2))))

        return Producer(init, For(upb, index))

    q1 = for_unfold_producer(p1, names)
    q2 = for_unfold_producer(p2, names)
    u1, u2 = q1.shape, q2.shape
    if u1.card is not Card.MANY or u2.card is not Card.MANY:
        raise GenerationError("zip_producer needs linear producers")

    def init(k):
        return q1.init(lambda s1: q2.init(lambda s2: k((s1, s2))))

    def term(st):
        return And(u1.term(st[0]), u2.term(st[1]))

    def step(st, k):
        return u1.step(st[0], lambda e1: u2.step(st[1], lambda e2: k(PairV(e1, e2))))

    return Producer(init, Unfold(term, Card.MANY, step))


def push_linear(lin: Producer, nested: tuple, names: Session) -> StStream:
    """Zip a linear producer against a nested stream driven by the latter.

    The linear side is stepped only after the nested side has delivered an
    element; its termination test is cached in ``term1r`` and conjoined to
    every loop of the nested side. Elements come out as ``PairV(lin, nested)``.
    """
    p2, binder2 = nested
    if not isinstance(lin.shape, Unfold) or not isinstance(p2.shape, Unfold):
        raise GenerationError("push_linear needs Unfold producers; apply for_unfold first")
    u1, u2 = lin.shape, p2.shape

    def init(k):
        def with_states(s1, s2):
            t = names.gensym("term1r")
            return CellNew(t, BOOL, u1.term(s1), k((t, s1, s2)))
        return lin.init(lambda s1: p2.init(lambda s2: with_states(s1, s2)))

    def term(st):
        t, _, s2 = st
        return And(cell_get(t), u2.term(s2))

    def step(st, k):
        t, s1, s2 = st
        return u2.step(s2, lambda b: k((t, s1, b)))

    def inner(tsb):
        t, s1, b = tsb

        def pair_up(c, k):
            return u1.step(s1, lambda a: seq(CellSet(t, u1.term(s1)), k(PairV(a, c))))

        return map_raw(pair_up, more_termination(cell_get(t), binder2(b), names))

    return Nested(Producer(init, Unfold(term, u2.card, step)), inner)


def make_linear(s: StStream, names: Session) -> Producer:
    """Reify a nested stream into a linear ``Unfold`` producer.

    Emits a cell ``curr`` holding the next element (``None`` at the end),
    one cell ``nadv_k`` per nesting level holding the pending resume
    procedure of that level, and a procedure ``adv`` that clears ``curr``
    and loops until a new element arrives or everything is exhausted,
    resuming the innermost pending level first and otherwise stepping the
    outermost producer. ``adv`` runs once during set-up; the resulting
    producer's ``step`` reads ``curr`` and calls ``adv`` again.
    """
    if not isinstance(s, Nested):
        raise GenerationError("make_linear applies to nested streams only")
    outer = for_unfold_producer(s.producer, names)
    binder0 = s.binder

    def init(k):
        def with_outer(s0):
            curr = names.gensym("curr")
            adv = names.gensym("adv")
            levels: list[str] = []
            elem_ty: list[Ty] = []

            def level_cell(j):
                while len(levels) < j:
                    levels.append(names.gensym("nadv"))
                return levels[j - 1]

            def deliver(e):
                if not isinstance(e, Atom):
                    raise GenerationError("make_linear can only reify streams of atoms")
                elem_ty.append(e.ty)
                return CellSet(curr, SomeE(e.expr))

            def install(j, stream):
                """Code that starts ``stream`` using resume cell ``j`` (>= 1)."""
                if isinstance(stream, Linear):
                    p, nxt = for_unfold_producer(stream.producer, names), None
                else:
                    p, nxt = for_unfold_producer(stream.producer, names), stream.binder

                shape = p.shape
                # at-most-one levels run inline and need no resume cell
                below = j if shape.card is Card.AT_MOST_1 else j + 1

                def on_elem(e):
                    return deliver(e) if nxt is None else install(below, nxt(e))

                if shape.card is Card.AT_MOST_1:
                    return p.init(lambda sj: IfS(shape.term(sj), shape.step(sj, on_elem)))

                def start(sj):
                    nadv = level_cell(j)
                    r = names.gensym("resume")
                    body = IfS(shape.term(sj), shape.step(sj, on_elem), CellSet(nadv, NoneE()))
                    return ProcDef(r, body, CellSet(nadv, SomeE(Var(r))))
                return p.init(start)

            outer_step = outer.shape.step(s0, lambda e0: install(1, binder0(e0)))
            # resume the innermost pending level first
            dispatch = outer_step
            for j in range(1, len(levels) + 1):
                r = names.gensym("r")
                dispatch = MatchOptPair(cell_get(levels[j - 1]), r, None, ProcCall(r), dispatch)
            pending = outer.shape.term(s0)
            for name in levels:
                pending = Or(is_some(cell_get(name)), pending)
            loop = WhileS(And(Cmp("=", cell_get(curr), NoneE()), pending), dispatch)
            adv_body = seq(CellSet(curr, NoneE()), loop)
            if not elem_ty:
                raise GenerationError("nested stream delivers no elements")
            ty = elem_ty[0]
            rest = ProcDef(adv, adv_body, seq(ProcCall(adv), k((curr, adv, ty))))
            for name in reversed(levels):
                rest = CellNew(name, OptionT(PROC), NoneE(), rest)
            return CellNew(curr, OptionT(ty), NoneE(), rest)

        return outer.init(with_outer)

    def term(st):
        return is_some(cell_get(st[0]))

    def step(st, k):
        curr, adv, ty = st
        el = names.gensym("el")
        return MatchOptPair(cell_get(curr), el, None, seq(ProcCall(adv), k(Atom(Var(el), ty))), SKIP)

    return Producer(init, Unfold(term, Card.MANY, step))


def zip_raw(s1: StStream, s2: StStream, names: Session) -> StStream:
    """Stream of ``PairV(e1, e2)``; dispatches on the linearity of both sides."""
    if isinstance(s1, Linear) and isinstance(s2, Linear):
        names.note("zip_raw:linear-linear")
        return Linear(zip_producer(s1.producer, s2.producer, names))
    if isinstance(s1, Linear):
        names.note("zip_raw:linear-nested")
        return push_linear(for_unfold_producer(s1.producer, names),
                           (for_unfold_producer(s2.producer, names), s2.binder), names)
    if isinstance(s2, Linear):
        names.note("zip_raw:nested-linear")
        swapped = push_linear(for_unfold_producer(s2.producer, names),
                              (for_unfold_producer(s1.producer, names), s1.binder), names)
        return map_raw(lambda pv, k: k(PairV(pv.snd, pv.fst)), swapped)
    names.note("zip_raw:nested-nested")
    return zip_raw(Linear(make_linear(s1, names)), s2, names)
