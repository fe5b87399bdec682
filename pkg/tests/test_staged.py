import pytest

from strymgen import api
from strymgen.ir.nodes import BOOL, INT, Binop, BoolLit, IntLit, ListT, OptionT, PairT, Session, Var, walk
from strymgen.ir.text import print_expr
from strymgen.staged import (
    CodeBool, CodeInt, StagingTypeError, add, and_, code, consE, div, eq, fls, gt, lit, mod_, mul,
    nilE, noneE, not_, or_, pairE, someE, somePairE, sub, tru,
)

from conftest import run


def test_literals_are_user_tagged():
    z = lit(0)
    assert z.expr == IntLit(0) and z.expr.user
    assert lit(-3).expr.value == -3
    assert print_expr(lit(7).expr) == "7"
    assert tru().expr == BoolLit(True) and fls().expr.user


def test_add_prints_without_folding():
    assert print_expr(add(lit(1), lit(2)).expr) == "1 + 2"


def test_operand_order_kept():
    x, y = CodeInt(Var("x")), CodeInt(Var("y"))
    assert print_expr(sub(y, x).expr) == "y - x"
    assert print_expr((x - y).expr) == "x - y"
    assert print_expr((3 * x).expr) == "3 * x"


def test_evenness_predicate():
    x = CodeInt(Var("x"))
    p = eq(mod_(x, lit(2)), lit(0))
    assert isinstance(p, CodeBool)
    assert print_expr(p.expr) == "x mod 2 = 0"


def test_every_created_node_is_tagged():
    x = CodeInt(Var("x"))
    e = and_(gt(div(x, lit(3)), lit(1)), not_(or_(tru(), fls())))
    made = [n for n in walk(e.expr) if not isinstance(n, Var)]
    assert made and all(n.user for n in made)


def test_type_errors():
    with pytest.raises(StagingTypeError):
        add(lit(1), tru())
    with pytest.raises(StagingTypeError):
        and_(lit(1), tru())
    with pytest.raises(StagingTypeError):
        eq(lit(1), tru())
    with pytest.raises(StagingTypeError):
        consE(lit(1), nilE(PairT(INT, INT)))


def test_data_constructors_types():
    assert pairE(lit(1), tru()).ty == PairT(INT, BOOL)
    assert consE(lit(1), nilE()).ty == ListT(INT)
    assert someE(lit(1)).ty == OptionT(INT)
    assert somePairE(lit(1), lit(2)).ty == OptionT(PairT(INT, INT))
    assert noneE(INT).ty == OptionT(INT)


def test_code_picks_subclass():
    assert isinstance(code(Var("x"), INT), CodeInt)


def test_cons_builds_one_element_list():
    s = Session()
    prog = api.fold(lambda acc, x: consE(x, nilE()), nilE(), api.take(1, api.iota(s, lit(4))))
    assert run(prog) == [4]


def test_cons_fold_reverses():
    s = Session()
    a = api.arr_param(s, "a")
    prog = api.of_arr(s, a).fold(lambda acc, x: consE(x, acc), nilE())
    assert run(prog, {"a": [1, 2, 3]}) == [3, 2, 1]


def test_user_pair_in_loop_is_not_a_violation():
    from strymgen.ir.checks import alloc_scan
    s = Session()
    a = api.arr_param(s, "a")
    prog = api.of_arr(s, a).map(lambda x: x).fold(lambda acc, x: consE(pairE(x, x), acc), nilE(PairT(INT, INT)))
    r = alloc_scan(prog)
    assert r.loop_allocs_nonuser == 0 and r.loop_allocs_user == 2
    assert run(prog, {"a": [1, 2]}) == [(2, 2), (1, 1)]


def test_mul_squares():
    x = CodeInt(Var("el_4"))
    assert mul(x, x).expr == Binop("*", Var("el_4"), Var("el_4"))
