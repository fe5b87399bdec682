"""Target IR: types, expressions, statements, programs and name sessions.

Every node is an immutable dataclass. ``user`` marks expression nodes built
by :mod:`strymgen.staged` (per-element code written by the pipeline author);
it is excluded from structural equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Ty:
    pass


@dataclass(frozen=True)
class IntT(Ty):
    pass


@dataclass(frozen=True)
class BoolT(Ty):
    pass


@dataclass(frozen=True)
class UnitT(Ty):
    pass


@dataclass(frozen=True)
class ArrIntT(Ty):
    pass


@dataclass(frozen=True)
class ProcT(Ty):
    """Nullary procedure returning unit."""


@dataclass(frozen=True)
class PairT(Ty):
    fst: Ty
    snd: Ty


@dataclass(frozen=True)
class ListT(Ty):
    elem: Ty


@dataclass(frozen=True)
class OptionT(Ty):
    elem: Ty


INT = IntT()
BOOL = BoolT()
UNIT = UnitT()
ARR = ArrIntT()
PROC = ProcT()


def show_ty(ty: Ty) -> str:
    if isinstance(ty, IntT):
        return "int"
    if isinstance(ty, BoolT):
        return "bool"
    if isinstance(ty, UnitT):
        return "unit"
    if isinstance(ty, ArrIntT):
        return "int[]"
    if isinstance(ty, ProcT):
        return "proc"
    if isinstance(ty, PairT):
        return f"({show_ty(ty.fst)} * {show_ty(ty.snd)})"
    if isinstance(ty, ListT):
        return f"list<{show_ty(ty.elem)}>"
    if isinstance(ty, OptionT):
        return f"option<{show_ty(ty.elem)}>"
    raise TypeError(f"not a type: {ty!r}")


# ---------------------------------------------------------- expressions


@dataclass(frozen=True)
class Expr:
    user: bool = field(default=False, compare=False, kw_only=True, repr=False)


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class UnitLit(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str


BINOP_NAMES = ("+", "-", "*", "/", "mod", "min")
CMP_NAMES = ("<", "<=", "=", ">", ">=")


@dataclass(frozen=True)
class Binop(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINOP_NAMES:
            raise ValueError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True)
class Cmp(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in CMP_NAMES:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class ArrLen(Expr):
    arr: Expr


@dataclass(frozen=True)
class ArrGet(Expr):
    arr: Expr
    idx: Expr


@dataclass(frozen=True)
class CellGet(Expr):
    cell: Expr


@dataclass(frozen=True)
class PairE(Expr):
    fst: Expr
    snd: Expr


@dataclass(frozen=True)
class ConsE(Expr):
    head: Expr
    tail: Expr


@dataclass(frozen=True)
class NilE(Expr):
    pass


@dataclass(frozen=True)
class SomeE(Expr):
    value: Expr


@dataclass(frozen=True)
class NoneE(Expr):
    pass


@dataclass(frozen=True)
class SomePairE(Expr):
    fst: Expr
    snd: Expr


ALLOC_EXPRS = (PairE, ConsE, SomeE, SomePairE)


# ----------------------------------------------------------- statements


@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class LetS(Stmt):
    name: str
    ty: Ty
    rhs: Expr
    body: Stmt


@dataclass(frozen=True)
class CellNew(Stmt):
    name: str
    ty: Ty
    init: Expr
    body: Stmt


@dataclass(frozen=True)
class CellSet(Stmt):
    name: str
    value: Expr


@dataclass(frozen=True)
class ForS(Stmt):
    """``for idx = 0 to upb``; the bound is inclusive and evaluated once."""

    idx: str
    upb: Expr
    body: Stmt


@dataclass(frozen=True)
class WhileS(Stmt):
    cond: Expr
    body: Stmt


@dataclass(frozen=True)
class IfS(Stmt):
    cond: Expr
    then: Stmt
    else_: Optional[Stmt] = None


@dataclass(frozen=True)
class MatchOptPair(Stmt):
    """Destructure an option.

    With ``st`` set the scrutinee is ``option<(a * b)>`` and both components
    are bound; with ``st=None`` it is ``option<a>`` and ``el`` binds the
    payload.
    """

    scrutinee: Expr
    el: str
    st: Optional[str]
    some: Stmt
    none: Stmt


@dataclass(frozen=True)
class ProcDef(Stmt):
    """Define nullary procedure ``name`` (visible in its own body) over ``scope``."""

    name: str
    body: Stmt
    scope: Stmt


@dataclass(frozen=True)
class ProcCall(Stmt):
    name: str


@dataclass(frozen=True)
class Seq(Stmt):
    items: tuple


@dataclass(frozen=True)
class Skip(Stmt):
    pass


SKIP = Skip()


def seq(*stmts: Stmt) -> Stmt:
    """Normalizing sequence: flattens, drops ``Skip``, unwraps singletons."""
    out: list[Stmt] = []
    for s in stmts:
        if isinstance(s, Seq):
            out.extend(s.items)
        elif isinstance(s, Skip):
            continue
        elif isinstance(s, Stmt):
            out.append(s)
        else:
            raise TypeError(f"not a statement: {s!r}")
    if not out:
        return SKIP
    if len(out) == 1:
        return out[0]
    return Seq(tuple(out))


@dataclass(frozen=True)
class Program:
    params: tuple  # of (name, Ty)
    body: Stmt
    result: tuple  # (name, Ty) of the cell holding the answer


Node = Union[Expr, Stmt]


def children(node) -> tuple:
    """Direct sub-nodes (expressions and statements) in evaluation order."""
    if isinstance(node, (IntLit, BoolLit, UnitLit, Var, NilE, NoneE, ProcCall, Skip)):
        return ()
    if isinstance(node, (Binop, Cmp, And, Or)):
        return (node.left, node.right)
    if isinstance(node, Not):
        return (node.operand,)
    if isinstance(node, ArrLen):
        return (node.arr,)
    if isinstance(node, ArrGet):
        return (node.arr, node.idx)
    if isinstance(node, CellGet):
        return (node.cell,)
    if isinstance(node, (PairE, SomePairE)):
        return (node.fst, node.snd)
    if isinstance(node, ConsE):
        return (node.head, node.tail)
    if isinstance(node, SomeE):
        return (node.value,)
    if isinstance(node, LetS):
        return (node.rhs, node.body)
    if isinstance(node, CellNew):
        return (node.init, node.body)
    if isinstance(node, CellSet):
        return (node.value,)
    if isinstance(node, ForS):
        return (node.upb, node.body)
    if isinstance(node, WhileS):
        return (node.cond, node.body)
    if isinstance(node, IfS):
        return (node.cond, node.then) if node.else_ is None else (node.cond, node.then, node.else_)
    if isinstance(node, MatchOptPair):
        return (node.scrutinee, node.some, node.none)
    if isinstance(node, ProcDef):
        return (node.body, node.scope)
    if isinstance(node, Seq):
        return node.items
    raise TypeError(f"not an IR node: {node!r}")


def walk(node):
    """Pre-order traversal of every node under ``node``."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


# -------------------------------------------------------------- sessions


class Session:
    """Name supply and bookkeeping for one generation run.

    ``gensym`` returns ``hint_k`` with ``k`` strictly increasing. Names of
    program parameters are reserved and never produced.
    """

    def __init__(self):
        self._counter = 0
        self.params: list[tuple[str, Ty]] = []
        self.trace: list[str] = []
        self.finished = False

    def gensym(self, hint: str) -> str:
        reserved = {name for name, _ in self.params}
        while True:
            self._counter += 1
            name = f"{hint}_{self._counter}"
            if name not in reserved:
                return name

    def note(self, event: str) -> None:
        self.trace.append(event)

    def add_param(self, name: str, ty: Ty) -> str:
        if any(n == name for n, _ in self.params):
            raise ValueError(f"duplicate parameter {name!r}")
        self.params.append((name, ty))
        return name
