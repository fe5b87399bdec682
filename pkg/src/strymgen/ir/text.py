"""Textual form of the IR: a deterministic printer and its parser.

Grammar sketch::

    program(a: int[], n: int) { <stmts> return s_1; }

    let x: int = e;            var c: int := e;         c := e;
    for i = 0 to e { ... }     while e { ... }          if e { ... } else { ... }
    match e { Some(a, s) => { ... }, None => { ... } }   (or Some(a))
    proc p() { ... }           p();                     skip;        { ... }

``let``, ``var`` and ``proc`` scope over the rest of their block; a binder
that is not last in a sequence is printed inside its own braces.
Expressions: ``|| && < <= = > >= :: + - * / mod`` (loosest to tightest),
prefix ``!c`` for cell reads, ``len(a)``, ``a[i]``, ``min(a, b)``,
``not(e)``, ``Some(e)``, ``Some(a, b)``, ``None``, ``(a, b)``, ``[]``, ``()``.
"""

from __future__ import annotations

import re

from .nodes import (
    ARR, BOOL, INT, PROC, UNIT,
    And, ArrGet, ArrLen, Binop, BoolLit, CellGet, CellNew, CellSet, Cmp, ConsE, Expr,
    ForS, IfS, IntLit, LetS, ListT, MatchOptPair, NilE, NoneE, Not, OptionT, Or, PairE,
    PairT, ProcCall, ProcDef, Program, Seq, Skip, SomeE, SomePairE, Stmt, Ty, UnitLit,
    Var, WhileS, show_ty, walk,
)

INDENT = "  "

_PREC = {"||": 1, "&&": 2, "cmp": 3, "::": 4, "+": 5, "-": 5, "*": 6, "/": 6, "mod": 6}
_ATOM = 9


def _prec(e: Expr) -> int:
    if isinstance(e, Or):
        return 1
    if isinstance(e, And):
        return 2
    if isinstance(e, Cmp):
        return 3
    if isinstance(e, ConsE):
        return 4
    if isinstance(e, Binop) and e.op != "min":
        return _PREC[e.op]
    if isinstance(e, IntLit) and e.value < 0:
        return 7
    if isinstance(e, CellGet):
        return 7
    return _ATOM


def print_expr(e: Expr, ctx: int = 0) -> str:
    text = _expr(e)
    return f"({text})" if _prec(e) < ctx else text


def _expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, UnitLit):
        return "()"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Binop):
        if e.op == "min":
            return f"min({print_expr(e.left)}, {print_expr(e.right)})"
        p = _PREC[e.op]
        return f"{print_expr(e.left, p)} {e.op} {print_expr(e.right, p + 1)}"
    if isinstance(e, Cmp):
        return f"{print_expr(e.left, 4)} {e.op} {print_expr(e.right, 4)}"
    if isinstance(e, And):
        return f"{print_expr(e.left, 2)} && {print_expr(e.right, 3)}"
    if isinstance(e, Or):
        return f"{print_expr(e.left, 1)} || {print_expr(e.right, 2)}"
    if isinstance(e, Not):
        return f"not({print_expr(e.operand)})"
    if isinstance(e, ArrLen):
        return f"len({print_expr(e.arr)})"
    if isinstance(e, ArrGet):
        return f"{print_expr(e.arr, _ATOM)}[{print_expr(e.idx)}]"
    if isinstance(e, CellGet):
        return f"!{print_expr(e.cell, _ATOM)}"
    if isinstance(e, PairE):
        return f"({print_expr(e.fst)}, {print_expr(e.snd)})"
    if isinstance(e, SomePairE):
        return f"Some({print_expr(e.fst)}, {print_expr(e.snd)})"
    if isinstance(e, SomeE):
        return f"Some({print_expr(e.value)})"
    if isinstance(e, NoneE):
        return "None"
    if isinstance(e, NilE):
        return "[]"
    if isinstance(e, ConsE):
        return f"{print_expr(e.head, 5)} :: {print_expr(e.tail, 4)}"
    raise TypeError(f"not an expression: {e!r}")


_BINDERS = (LetS, CellNew, ProcDef)


def _block(s: Stmt, depth: int) -> list[str]:
    """Lines for ``s`` used as the full contents of a block."""
    if isinstance(s, Seq):
        lines: list[str] = []
        last = len(s.items) - 1
        for k, item in enumerate(s.items):
            if k < last and isinstance(item, _BINDERS) or isinstance(item, Seq):
                pad = INDENT * depth
                lines.append(pad + "{")
                lines.extend(_block(item, depth + 1))
                lines.append(pad + "}")
            else:
                lines.extend(_block(item, depth))
        return lines
    return _stmt(s, depth)


def _braced(head: str, body: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    return [f"{pad}{head} {{", *_block(body, depth + 1), pad + "}"]


def _stmt(s: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, LetS):
        return [f"{pad}let {s.name}: {show_ty(s.ty)} = {print_expr(s.rhs)};", *_block(s.body, depth)]
    if isinstance(s, CellNew):
        return [f"{pad}var {s.name}: {show_ty(s.ty)} := {print_expr(s.init)};", *_block(s.body, depth)]
    if isinstance(s, ProcDef):
        return [*_braced(f"proc {s.name}()", s.body, depth), *_block(s.scope, depth)]
    if isinstance(s, CellSet):
        return [f"{pad}{s.name} := {print_expr(s.value)};"]
    if isinstance(s, ForS):
        return _braced(f"for {s.idx} = 0 to {print_expr(s.upb)}", s.body, depth)
    if isinstance(s, WhileS):
        return _braced(f"while {print_expr(s.cond)}", s.body, depth)
    if isinstance(s, IfS):
        lines = _braced(f"if {print_expr(s.cond)}", s.then, depth)
        if s.else_ is not None:
            lines[-1] = pad + "} else {"
            lines.extend(_block(s.else_, depth + 1))
            lines.append(pad + "}")
        return lines
    if isinstance(s, MatchOptPair):
        pat = f"Some({s.el})" if s.st is None else f"Some({s.el}, {s.st})"
        inner = INDENT * (depth + 1)
        return [
            f"{pad}match {print_expr(s.scrutinee)} {{",
            f"{inner}{pat} => {{",
            *_block(s.some, depth + 2),
            f"{inner}}},",
            f"{inner}None => {{",
            *_block(s.none, depth + 2),
            f"{inner}}}",
            pad + "}",
        ]
    if isinstance(s, ProcCall):
        return [f"{pad}{s.name}();"]
    if isinstance(s, Skip):
        return [f"{pad}skip;"]
    if isinstance(s, Seq):
        return _block(s, depth)
    raise TypeError(f"not a statement: {s!r}")


def print_stmt(s: Stmt, depth: int = 0) -> str:
    return "\n".join(_block(s, depth))


def print_program(p: Program) -> str:
    params = ", ".join(f"{n}: {show_ty(t)}" for n, t in p.params)
    lines = [f"program({params}) {{", *_block(p.body, 1), f"{INDENT}return {p.result[0]};", "}"]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ parse


class ParseError(Exception):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9']*)"
    r"|(?P<op>:=|::|=>|<=|>=|&&|\|\||[-+*/<>=!(){}\[\],;:]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
    out.append(("eof", ""))
    return out


_KEYWORDS = {"let", "var", "for", "to", "while", "if", "else", "match", "proc", "skip",
             "return", "program", "true", "false", "len", "min", "not", "Some", "None", "mod"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[self.i + k]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, value: str) -> bool:
        kind, v = self.peek()
        return v == value and kind != "eof"

    def expect(self, value: str):
        kind, v = self.next()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v!r} (token {self.i})")

    def ident(self) -> str:
        kind, v = self.next()
        if kind != "name" or v in _KEYWORDS:
            raise ParseError(f"expected identifier, found {v!r} (token {self.i})")
        return v

    # types
    def ty(self) -> Ty:
        kind, v = self.next()
        if v == "int":
            if self.at("["):
                self.expect("[")
                self.expect("]")
                return ARR
            return INT
        if v == "bool":
            return BOOL
        if v == "unit":
            return UNIT
        if v == "proc":
            return PROC
        if v in ("list", "option"):
            self.expect("<")
            inner = self.ty()
            self.expect(">")
            return ListT(inner) if v == "list" else OptionT(inner)
        if v == "(":
            a = self.ty()
            self.expect("*")
            b = self.ty()
            self.expect(")")
            return PairT(a, b)
        raise ParseError(f"expected a type, found {v!r}")

    # expressions
    def expr(self) -> Expr:
        return self.or_()

    def or_(self):
        e = self.and_()
        while self.at("||"):
            self.next()
            e = Or(e, self.and_())
        return e

    def and_(self):
        e = self.cmp()
        while self.at("&&"):
            self.next()
            e = And(e, self.cmp())
        return e

    def cmp(self):
        e = self.cons()
        if self.peek()[1] in ("<", "<=", "=", ">", ">=") and self.peek()[0] == "op":
            op = self.next()[1]
            e = Cmp(op, e, self.cons())
        return e

    def cons(self):
        e = self.add()
        if self.at("::"):
            self.next()
            return ConsE(e, self.cons())
        return e

    def add(self):
        e = self.mul()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            e = Binop(op, e, self.mul())
        return e

    def mul(self):
        e = self.prefix()
        while self.peek()[1] in ("*", "/", "mod"):
            op = self.next()[1]
            e = Binop(op, e, self.prefix())
        return e

    def prefix(self):
        if self.at("!"):
            self.next()
            return CellGet(self.postfix())
        if self.at("-") and self.peek(1)[0] == "num":
            self.next()
            return IntLit(-int(self.next()[1]))
        return self.postfix()

    def postfix(self):
        e = self.atom()
        while self.at("["):
            self.next()
            idx = self.expr()
            self.expect("]")
            e = ArrGet(e, idx)
        return e

    def atom(self):
        kind, v = self.next()
        if kind == "num":
            return IntLit(int(v))
        if v == "true":
            return BoolLit(True)
        if v == "false":
            return BoolLit(False)
        if v == "None":
            return NoneE()
        if v in ("len", "not"):
            self.expect("(")
            a = self.expr()
            self.expect(")")
            return ArrLen(a) if v == "len" else Not(a)
        if v == "min":
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Binop("min", a, b)
        if v == "Some":
            self.expect("(")
            a = self.expr()
            if self.at(","):
                self.next()
                b = self.expr()
                self.expect(")")
                return SomePairE(a, b)
            self.expect(")")
            return SomeE(a)
        if v == "[":
            self.expect("]")
            return NilE()
        if v == "(":
            if self.at(")"):
                self.next()
                return UnitLit()
            a = self.expr()
            if self.at(","):
                self.next()
                b = self.expr()
                self.expect(")")
                return PairE(a, b)
            self.expect(")")
            return a
        if kind == "name" and v not in _KEYWORDS:
            return Var(v)
        raise ParseError(f"unexpected {v!r} in expression (token {self.i})")

    # statements
    def block(self, stop: tuple = ("}",)) -> Stmt:
        items: list[Stmt] = []
        while not (self.peek()[1] in stop or self.peek()[0] == "eof"):
            kind, v = self.peek()
            if v == "let":
                self.next()
                name = self.ident()
                self.expect(":")
                ty = self.ty()
                self.expect("=")
                rhs = self.expr()
                self.expect(";")
                items.append(LetS(name, ty, rhs, self.block(stop)))
                break
            if v == "var":
                self.next()
                name = self.ident()
                self.expect(":")
                ty = self.ty()
                self.expect(":=")
                init = self.expr()
                self.expect(";")
                items.append(CellNew(name, ty, init, self.block(stop)))
                break
            if v == "proc":
                self.next()
                name = self.ident()
                self.expect("(")
                self.expect(")")
                body = self.braces()
                items.append(ProcDef(name, body, self.block(stop)))
                break
            items.append(self.simple())
        if not items:
            return Skip()
        if len(items) == 1:
            return items[0]
        return Seq(tuple(items))

    def braces(self) -> Stmt:
        self.expect("{")
        s = self.block()
        self.expect("}")
        return s

    def simple(self) -> Stmt:
        kind, v = self.peek()
        if v == "{":
            return self.braces()
        if v == "skip":
            self.next()
            self.expect(";")
            return Skip()
        if v == "for":
            self.next()
            idx = self.ident()
            self.expect("=")
            kind, zero = self.next()
            if zero != "0":
                raise ParseError("for loops start at 0")
            self.expect("to")
            upb = self.expr()
            return ForS(idx, upb, self.braces())
        if v == "while":
            self.next()
            cond = self.expr()
            return WhileS(cond, self.braces())
        if v == "if":
            self.next()
            cond = self.expr()
            then = self.braces()
            els = None
            if self.at("else"):
                self.next()
                els = self.braces()
            return IfS(cond, then, els)
        if v == "match":
            self.next()
            scrut = self.expr()
            self.expect("{")
            self.expect("Some")
            self.expect("(")
            el = self.ident()
            st = None
            if self.at(","):
                self.next()
                st = self.ident()
            self.expect(")")
            self.expect("=>")
            some = self.braces()
            self.expect(",")
            self.expect("None")
            self.expect("=>")
            none = self.braces()
            self.expect("}")
            return MatchOptPair(scrut, el, st, some, none)
        name = self.ident()
        if self.at(":="):
            self.next()
            val = self.expr()
            self.expect(";")
            return CellSet(name, val)
        self.expect("(")
        self.expect(")")
        self.expect(";")
        return ProcCall(name)


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.peek()[0] != "eof":
        raise ParseError(f"trailing input after expression: {p.peek()[1]!r}")
    return e


def parse_stmt(text: str) -> Stmt:
    p = _Parser(text)
    s = p.block(stop=())
    return s


def parse_program(text: str) -> Program:
    p = _Parser(text)
    p.expect("program")
    p.expect("(")
    params = []
    while not p.at(")"):
        name = p.ident()
        p.expect(":")
        params.append((name, p.ty()))
        if p.at(","):
            p.next()
    p.expect(")")
    p.expect("{")
    body = p.block(stop=("return", "}"))
    p.expect("return")
    rname = p.ident()
    p.expect(";")
    p.expect("}")
    if p.peek()[0] != "eof":
        raise ParseError("trailing input after program")
    decl = next((n for n in walk(body) if isinstance(n, CellNew) and n.name == rname), None)
    if decl is None:
        raise ParseError(f"result cell {rname!r} is not declared")
    return Program(tuple(params), body, (rname, decl.ty))
