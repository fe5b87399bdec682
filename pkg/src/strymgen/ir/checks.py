"""Static checks over IR programs: scoping, typing and loop allocations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .nodes import (
    ALLOC_EXPRS, ARR, BOOL, INT, PROC, UNIT,
    And, ArrGet, ArrLen, Binop, BoolLit, CellGet, CellNew, CellSet, Cmp, ConsE,
    Expr, ForS, IfS, IntLit, LetS, ListT, MatchOptPair, NilE, NoneE, Not, OptionT,
    Or, PairE, PairT, ProcCall, ProcDef, ProcT, Program, Seq, Skip, SomeE, SomePairE,
    Stmt, Ty, UnitLit, Var, WhileS, children, show_ty, walk,
)


# ---------------------------------------------------------------- scope


@dataclass(frozen=True)
class Violation:
    name: str
    problem: str  # "unbound" or "kind"
    detail: str


def scope_check(p: Program) -> list[Violation]:
    """Return every unbound or kind-mismatched name use; empty means ok.

    Kinds: ``val`` (params, let, for index, match binders), ``cell`` and
    ``proc``. ``Var`` may name a val or a proc (procedures are first-class
    values); ``CellGet`` needs a ``Var`` naming a cell; ``ProcCall`` needs a
    proc or a val (the latter is type-checked to ``proc``).
    """
    out: list[Violation] = []

    def use(env, name, allowed, what):
        kind = env.get(name)
        if kind is None:
            out.append(Violation(name, "unbound", what))
        elif kind not in allowed:
            out.append(Violation(name, "kind", f"{what}: bound as {kind}"))

    def ex(e: Expr, env):
        if isinstance(e, Var):
            use(env, e.name, ("val", "proc"), "variable")
        elif isinstance(e, CellGet):
            if isinstance(e.cell, Var):
                use(env, e.cell.name, ("cell",), "cell read")
            else:
                out.append(Violation("?", "kind", "cell read of a non-variable"))
                ex(e.cell, env)
        else:
            for c in _expr_children(e):
                ex(c, env)

    def st(s: Stmt, env):
        if isinstance(s, LetS):
            ex(s.rhs, env)
            st(s.body, {**env, s.name: "val"})
        elif isinstance(s, CellNew):
            ex(s.init, env)
            st(s.body, {**env, s.name: "cell"})
        elif isinstance(s, CellSet):
            use(env, s.name, ("cell",), "cell write")
            ex(s.value, env)
        elif isinstance(s, ForS):
            ex(s.upb, env)
            st(s.body, {**env, s.idx: "val"})
        elif isinstance(s, WhileS):
            ex(s.cond, env)
            st(s.body, env)
        elif isinstance(s, IfS):
            ex(s.cond, env)
            st(s.then, env)
            if s.else_ is not None:
                st(s.else_, env)
        elif isinstance(s, MatchOptPair):
            ex(s.scrutinee, env)
            inner = {**env, s.el: "val"}
            if s.st is not None:
                inner[s.st] = "val"
            st(s.some, inner)
            st(s.none, env)
        elif isinstance(s, ProcDef):
            inner = {**env, s.name: "proc"}
            st(s.body, inner)
            st(s.scope, inner)
        elif isinstance(s, ProcCall):
            use(env, s.name, ("proc", "val"), "call")
        elif isinstance(s, Seq):
            for item in s.items:
                st(item, env)
        elif isinstance(s, Skip):
            pass
        else:
            raise TypeError(f"not a statement: {s!r}")

    env = {name: "val" for name, _ in p.params}
    st(p.body, env)
    rname = p.result[0]
    if not any(isinstance(n, CellNew) and n.name == rname for n in walk(p.body)):
        out.append(Violation(rname, "unbound", "result cell is not declared in the body"))
    return out


def _expr_children(e: Expr):
    if isinstance(e, (Binop, Cmp, And, Or)):
        return (e.left, e.right)
    if isinstance(e, (Not,)):
        return (e.operand,)
    if isinstance(e, ArrLen):
        return (e.arr,)
    if isinstance(e, ArrGet):
        return (e.arr, e.idx)
    if isinstance(e, CellGet):
        return (e.cell,)
    if isinstance(e, (PairE, SomePairE)):
        return (e.fst, e.snd)
    if isinstance(e, ConsE):
        return (e.head, e.tail)
    if isinstance(e, SomeE):
        return (e.value,)
    return ()


# ----------------------------------------------------------------- types


class IRTypeError(Exception):
    def __init__(self, message: str, node=None, expected: Ty | None = None, actual: Ty | None = None):
        super().__init__(message)
        self.node = node
        self.expected = expected
        self.actual = actual


def _mismatch(node, expected: Ty, actual: Ty):
    return IRTypeError(
        f"expected {show_ty(expected)}, got {show_ty(actual)} in {type(node).__name__}",
        node, expected, actual,
    )


class _TypeEnv:
    __slots__ = ("vals", "cells")

    def __init__(self, vals, cells):
        self.vals = vals
        self.cells = cells

    def with_val(self, name, ty):
        return _TypeEnv({**self.vals, name: ty}, {k: v for k, v in self.cells.items() if k != name})

    def with_cell(self, name, ty):
        return _TypeEnv({k: v for k, v in self.vals.items() if k != name}, {**self.cells, name: ty})


def infer(e: Expr, env: _TypeEnv) -> Ty:
    if isinstance(e, IntLit):
        return INT
    if isinstance(e, BoolLit):
        return BOOL
    if isinstance(e, UnitLit):
        return UNIT
    if isinstance(e, Var):
        if e.name in env.vals:
            return env.vals[e.name]
        raise IRTypeError(f"{e.name!r} is not a value in scope", e)
    if isinstance(e, Binop):
        check(e.left, INT, env)
        check(e.right, INT, env)
        return INT
    if isinstance(e, Cmp):
        if e.op == "=":
            if isinstance(e.left, (NoneE, NilE)):
                check(e.left, infer(e.right, env), env)
            else:
                check(e.right, infer(e.left, env), env)
        else:
            check(e.left, INT, env)
            check(e.right, INT, env)
        return BOOL
    if isinstance(e, (And, Or)):
        check(e.left, BOOL, env)
        check(e.right, BOOL, env)
        return BOOL
    if isinstance(e, Not):
        check(e.operand, BOOL, env)
        return BOOL
    if isinstance(e, ArrLen):
        check(e.arr, ARR, env)
        return INT
    if isinstance(e, ArrGet):
        check(e.arr, ARR, env)
        check(e.idx, INT, env)
        return INT
    if isinstance(e, CellGet):
        if isinstance(e.cell, Var) and e.cell.name in env.cells:
            return env.cells[e.cell.name]
        raise IRTypeError("cell read of something that is not a cell", e)
    if isinstance(e, PairE):
        return PairT(infer(e.fst, env), infer(e.snd, env))
    if isinstance(e, SomePairE):
        return OptionT(PairT(infer(e.fst, env), infer(e.snd, env)))
    if isinstance(e, SomeE):
        return OptionT(infer(e.value, env))
    if isinstance(e, ConsE):
        t = ListT(infer(e.head, env))
        check(e.tail, t, env)
        return t
    if isinstance(e, (NilE, NoneE)):
        raise IRTypeError(f"cannot infer the type of {type(e).__name__} without context", e)
    raise IRTypeError(f"not an expression: {e!r}", e)


def check(e: Expr, ty: Ty, env: _TypeEnv) -> None:
    if isinstance(e, NilE):
        if not isinstance(ty, ListT):
            raise _mismatch(e, ty, ListT(UNIT))
        return
    if isinstance(e, NoneE):
        if not isinstance(ty, OptionT):
            raise _mismatch(e, ty, OptionT(UNIT))
        return
    if isinstance(e, ConsE) and isinstance(ty, ListT):
        check(e.head, ty.elem, env)
        check(e.tail, ty, env)
        return
    if isinstance(e, SomeE) and isinstance(ty, OptionT):
        check(e.value, ty.elem, env)
        return
    if isinstance(e, SomePairE) and isinstance(ty, OptionT) and isinstance(ty.elem, PairT):
        check(e.fst, ty.elem.fst, env)
        check(e.snd, ty.elem.snd, env)
        return
    if isinstance(e, PairE) and isinstance(ty, PairT):
        check(e.fst, ty.fst, env)
        check(e.snd, ty.snd, env)
        return
    actual = infer(e, env)
    if actual != ty:
        raise _mismatch(e, ty, actual)


def _check_stmt(s: Stmt, env: _TypeEnv) -> None:
    if isinstance(s, LetS):
        check(s.rhs, s.ty, env)
        _check_stmt(s.body, env.with_val(s.name, s.ty))
    elif isinstance(s, CellNew):
        check(s.init, s.ty, env)
        _check_stmt(s.body, env.with_cell(s.name, s.ty))
    elif isinstance(s, CellSet):
        if s.name not in env.cells:
            raise IRTypeError(f"{s.name!r} is not a cell", s)
        check(s.value, env.cells[s.name], env)
    elif isinstance(s, ForS):
        check(s.upb, INT, env)
        _check_stmt(s.body, env.with_val(s.idx, INT))
    elif isinstance(s, WhileS):
        check(s.cond, BOOL, env)
        _check_stmt(s.body, env)
    elif isinstance(s, IfS):
        check(s.cond, BOOL, env)
        _check_stmt(s.then, env)
        if s.else_ is not None:
            _check_stmt(s.else_, env)
    elif isinstance(s, MatchOptPair):
        t = infer(s.scrutinee, env)
        if not isinstance(t, OptionT):
            raise IRTypeError(f"match on non-option {show_ty(t)}", s, None, t)
        if s.st is None:
            inner = env.with_val(s.el, t.elem)
        else:
            if not isinstance(t.elem, PairT):
                raise IRTypeError(f"pair match on {show_ty(t)}", s, OptionT(PairT(INT, INT)), t)
            inner = env.with_val(s.el, t.elem.fst).with_val(s.st, t.elem.snd)
        _check_stmt(s.some, inner)
        _check_stmt(s.none, env)
    elif isinstance(s, ProcDef):
        inner = env.with_val(s.name, PROC)
        _check_stmt(s.body, inner)
        _check_stmt(s.scope, inner)
    elif isinstance(s, ProcCall):
        t = env.vals.get(s.name)
        if not isinstance(t, ProcT):
            raise IRTypeError(f"call of non-procedure {s.name!r}", s, PROC, t)
    elif isinstance(s, Seq):
        for item in s.items:
            _check_stmt(item, env)
    elif isinstance(s, Skip):
        pass
    else:
        raise IRTypeError(f"not a statement: {s!r}", s)


def type_check(p: Program) -> None:
    """Raise :class:`IRTypeError` at the first ill-typed node."""
    env = _TypeEnv(dict(p.params), {})
    _check_stmt(p.body, env)
    rname, rty = p.result
    decls = [n for n in walk(p.body) if isinstance(n, CellNew) and n.name == rname]
    if not decls:
        raise IRTypeError(f"result cell {rname!r} is not declared", p)
    if decls[0].ty != rty:
        raise _mismatch(decls[0], rty, decls[0].ty)


def expr_type(e: Expr, vals: dict | None = None, cells: dict | None = None) -> Ty:
    return infer(e, _TypeEnv(dict(vals or {}), dict(cells or {})))


# ------------------------------------------------------------ allocations


@dataclass
class AllocReport:
    loop_allocs_nonuser: int = 0
    loop_allocs_user: int = 0
    locations: list[str] = field(default_factory=list)


def alloc_scan(p: Program) -> AllocReport:
    """Count allocation nodes that can execute once per loop iteration.

    Allocation nodes are pairs, conses, options carrying a value, and
    procedure definitions. A node counts when it sits inside a for/while
    body or condition, or inside a procedure that may run from a loop: one
    called from a loop body or one that escapes as a value (and so may be
    called from anywhere). User-tagged nodes are counted separately.
    """
    defs: dict[str, ProcDef] = {}
    escaping: set[str] = set()
    called_in_loop: set[str] = set()

    def pre(node, in_loop):
        if isinstance(node, ProcDef):
            defs[node.name] = node
        elif isinstance(node, Var):
            escaping.add(node.name)
        elif isinstance(node, ProcCall) and in_loop:
            called_in_loop.add(node.name)
        for c in children(node):
            pre(c, in_loop or isinstance(node, (ForS, WhileS)) and c is not getattr(node, "upb", None))

    pre(p.body, False)

    hot: set[str] = set()
    for name in defs:
        if name in escaping or name in called_in_loop:
            hot.add(name)
    # a proc called from a hot proc body is hot as well
    changed = True
    while changed:
        changed = False
        for name in list(hot):
            for n in walk(defs[name].body):
                if isinstance(n, ProcCall) and n.name in defs and n.name not in hot:
                    hot.add(n.name)
                    changed = True

    report = AllocReport()

    def scan(node, in_loop, path):
        here = path + "/" + _label(node)
        if in_loop:
            if isinstance(node, ALLOC_EXPRS):
                if node.user:
                    report.loop_allocs_user += 1
                else:
                    report.loop_allocs_nonuser += 1
                    report.locations.append(here)
            elif isinstance(node, ProcDef):
                report.loop_allocs_nonuser += 1
                report.locations.append(here)
        if isinstance(node, ProcDef):
            scan(node.body, in_loop or node.name in hot, here)
            scan(node.scope, in_loop, path)
            return
        for c in children(node):
            inner = in_loop or (isinstance(node, (ForS, WhileS)) and c is not getattr(node, "upb", None))
            scan(c, inner, here)

    scan(p.body, False, "")
    return report


def _label(node) -> str:
    name = type(node).__name__
    for attr in ("name", "idx", "el"):
        v = getattr(node, attr, None)
        if isinstance(v, str):
            return f"{name}({v})"
    return name


# ------------------------------------------------------------ renaming

_NAME_FIELDS = {
    Var: ("name",), LetS: ("name",), CellNew: ("name",), CellSet: ("name",), ForS: ("idx",),
    MatchOptPair: ("el", "st"), ProcDef: ("name",), ProcCall: ("name",),
}


def canonical(p: Program) -> Program:
    """Rename every local name to ``v<k>`` in order of first occurrence.

    Parameter names are kept. Two programs from separate generation runs are
    alpha-equivalent when their canonical forms are equal.
    """
    from dataclasses import fields, replace

    keep = {name for name, _ in p.params}
    table: dict[str, str] = {}

    def rename(n):
        if n is None or n in keep:
            return n
        if n not in table:
            table[n] = f"v{len(table) + 1}"
        return table[n]

    def go(node):
        if isinstance(node, tuple):
            return tuple(go(x) for x in node)
        if not isinstance(node, (Expr, Stmt)):
            return node
        changes = {}
        names = _NAME_FIELDS.get(type(node), ())
        for f in fields(node):
            v = getattr(node, f.name)
            changes[f.name] = rename(v) if f.name in names else go(v)
        return replace(node, **changes)

    body = go(p.body)
    return Program(p.params, body, (table.get(p.result[0], p.result[0]), p.result[1]))


def alpha_equivalent(p: Program, q: Program) -> bool:
    return canonical(p) == canonical(q)
