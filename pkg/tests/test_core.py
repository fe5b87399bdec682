import random

import pytest

from strymgen import api, core
from strymgen.api import Pipeline
from strymgen.core import Atom, Card, GenerationError, Linear, Nested, PairV, Unfold
from strymgen.ir.checks import alloc_scan
from strymgen.ir.nodes import INT, BoolLit, CellGet, CellNew, Cmp, IntLit, Session, Var, WhileS, walk
from strymgen.ir.text import print_expr, print_program
from strymgen.oracle import oracle_eval
from strymgen.pipespec import reduce_pipeline, spec_from_json, to_pipeline
from strymgen.randpipe import random_inputs, random_spec_json
from strymgen.staged import add, gt, lit, mul

from conftest import count, run, shape


def arrays(*names):
    s = Session()
    return (s,) + tuple(api.arr_param(s, n) for n in names)


def fold_stream(stream, s, z=0):
    return api.fold(add, lit(z), Pipeline(stream, s))


def cart(s, a, b, f=mul):
    return api.of_arr(s, a).flat_map(lambda x: api.of_arr(s, b).map(lambda y: f(x, y)))


class TestForUnfold:
    def test_same_sum_as_for(self):
        s, a = arrays("a")
        direct = api.of_arr(s, a).fold(add, lit(0))
        s2, a2 = arrays("a")
        p = api.of_arr(s2, a2)
        loop = fold_stream(core.for_unfold(p._take_stream(), s2), s2)
        assert count(direct, WhileS) == 0 and count(loop, WhileS) == 1
        assert run(direct, {"a": [1, 2, 3]}) == run(loop, {"a": [1, 2, 3]}) == 6

    def test_condition_reads_index_cell(self):
        s, a = arrays("a")
        prog = fold_stream(core.for_unfold(api.of_arr(s, a)._take_stream(), s), s)
        [w] = [n for n in walk(prog.body) if isinstance(n, WhileS)]
        assert print_expr(w.cond) == "!i_3 <= len(arr_2) - 1"

    def test_identity_on_unfold(self):
        s = Session()
        st = api.iota(s, lit(0))._take_stream()
        assert core.for_unfold(st, s).producer is st.producer


class TestMapRaw:
    def test_identity_map_changes_nothing(self):
        s, a = arrays("a")
        plain = api.of_arr(s, a).fold(add, lit(0))
        s2, a2 = arrays("a")
        mapped = fold_stream(core.map_raw(lambda e, k: k(e), api.of_arr(s2, a2)._take_stream()), s2)
        assert mapped == plain

    def test_let_insertion_inside_loop(self):
        s, a = arrays("arr")
        prog = api.of_arr(s, a).map(lambda x: mul(x, x)).fold(lambda z, e: add(e, z), lit(0))
        text = print_program(prog)
        assert "let t_5: int = el_4 * el_4;" in text

    def test_map_after_flat_map_applies_innermost(self):
        s, a, b = arrays("a", "b")
        after = cart(s, a, b, add).map(lambda v: v * 3).fold(add, lit(0))
        s2, a2, b2 = arrays("a", "b")
        inside = api.of_arr(s2, a2).flat_map(lambda x: api.of_arr(s2, b2).map(lambda y: (x + y) * 3)).fold(add, lit(0))
        inputs = {"a": [1, 2], "b": [1, 2]}
        assert run(after, inputs) == run(inside, inputs) == 3 * (2 + 3 + 3 + 4)

    def test_preserves_constructor(self):
        s, a = arrays("a")
        assert isinstance(core.map_raw(lambda e, k: k(e), api.of_arr(s, a)._take_stream()), Linear)
        s, a, b = arrays("a", "b")
        assert isinstance(core.map_raw(lambda e, k: k(e), cart(s, a, b)._take_stream()), Nested)


class TestFlatMap:
    def test_depth_one(self):
        s, a, b = arrays("a", "b")
        st = cart(s, a, b)._take_stream()
        assert isinstance(st, Nested) and isinstance(st.binder(Atom(Var("x"), None)), Linear)

    def test_twice_gives_two_nested_loops(self):
        s, a = arrays("a")
        p = (api.of_arr(s, a)
             .flat_map(lambda x: api.of_arr(s, a))
             .flat_map(lambda y: api.of_arr(s, a).map(lambda z: z * y))
             .fold(add, lit(0)))
        assert shape(p)["for"] == 3
        assert run(p, {"a": [1, 2]}) == 2 * (1 + 2) * (1 + 2)

    def test_cart(self):
        s, a, b = arrays("a", "b")
        assert run(cart(s, a, b).fold(add, lit(0)), {"a": [1, 2, 3], "b": [1, 2]}) == 18

    def test_filter_always_nested(self):
        s, a = arrays("a")
        assert isinstance(api.of_arr(s, a).filter(lambda x: gt(x, 0))._take_stream(), Nested)


class TestFoldRaw:
    def test_for_source_gives_for_loop(self):
        s, a = arrays("a")
        assert shape(api.of_arr(s, a).map(lambda x: x * x).fold(add, lit(0)))["for"] == 1

    def test_filter_is_a_conditional(self):
        s, a = arrays("a")
        p = api.of_arr(s, a).filter(lambda x: gt(x, 2)).fold(add, lit(0))
        assert shape(p) == {"for": 1, "while": 0, "if": 1, "cells": 1}

    def test_filter_take(self):
        s, a = arrays("a")
        p = api.of_arr(s, a).filter(lambda x: gt(x, 2)).take(2).fold(add, lit(0))
        assert shape(p)["while"] == 1 and shape(p)["if"] == 1
        assert run(p, {"a": [5, 1, 3, 9, 7]}) == 8


class TestMoreTermination:
    def _nested(self):
        s, a, b = arrays("a", "b")
        return s, cart(s, a, b)._take_stream()

    def test_true_keeps_value(self):
        s, st = self._nested()
        p = fold_stream(core.more_termination(BoolLit(True), st, s), s)
        assert run(p, {"a": [1, 2], "b": [3, 4]}) == 21

    def test_false_gives_seed(self):
        s, st = self._nested()
        p = fold_stream(core.more_termination(BoolLit(False), st, s), s, 5)
        assert run(p, {"a": [1, 2], "b": [3, 4]}) == 5

    def test_guard_reaches_every_loop(self):
        s, st = self._nested()
        guard = Cmp(">", CellGet(Var("s_1")), IntLit(-1))
        p = fold_stream(core.more_termination(guard, st, s), s)
        loops = [n for n in walk(p.body) if isinstance(n, WhileS)]
        assert len(loops) == 2
        assert all(print_expr(w.cond).startswith("!s_1 > -1 && ") for w in loops)

    def test_at_most_one_untouched(self):
        s, a = arrays("a")
        st = api.of_arr(s, a).filter(lambda x: gt(x, 0))._take_stream()
        guarded = core.more_termination(BoolLit(False), st, s)
        x = Atom(Var("x"), INT)
        inner = guarded.binder(x)
        assert inner.producer.shape.card is Card.AT_MOST_1
        assert "false" not in print_expr(inner.producer.shape.term(x))


class TestTake:
    def test_zero(self):
        s, a, b = arrays("a", "b")
        assert run(cart(s, a, b).take(0).fold(add, lit(7)), {"a": [1], "b": [1]}) == 7

    def test_negative_is_zero(self):
        s, a = arrays("a")
        assert run(api.of_arr(s, a).filter(lambda x: gt(x, 0)).take(-3).fold(add, lit(0)), {"a": [1, 2]}) == 0

    def test_two_of_three(self):
        s, a = arrays("a")
        assert run(api.of_arr(s, a).take(2).fold(add, lit(0)), {"a": [5, 6, 7]}) == 11

    def test_for_bound_adjusted_without_cells(self):
        s, a = arrays("a")
        p = api.of_arr(s, a).take(3).fold(add, lit(0))
        assert shape(p) == {"for": 1, "while": 0, "if": 0, "cells": 1}
        assert "min(3 - 1, len(arr_2) - 1)" in print_program(p)

    def test_nested_gets_exactly_one_counter(self):
        s, a, b = arrays("a", "b")
        p = cart(s, a, b).take(3).fold(add, lit(0))
        cells = [n.name for n in walk(p.body) if isinstance(n, CellNew)]
        assert sum(c.startswith("nr_") for c in cells) == 1
        assert run(p, {"a": [1, 2], "b": [1, 10]}) == 1 + 10 + 2

    def test_counter_declared_and_decremented(self):
        s = Session()
        p = api.iota(s, lit(1)).take(3).fold(add, lit(0))
        text = print_program(p)
        assert "var nr_" in text and ":= !nr_" in text and " - 1;" in text
        assert run(p) == 6

    def test_add_nr_needs_unfold(self):
        s, a = arrays("a")
        with pytest.raises(GenerationError):
            core.add_nr(IntLit(1), api.of_arr(s, a)._take_stream().producer, s)


class TestZip:
    def test_dot_product_single_for(self):
        s, a, b = arrays("a", "b")
        p = api.zip_with(mul, api.of_arr(s, a), api.of_arr(s, b)).fold(add, lit(0))
        assert shape(p)["for"] == 1 and shape(p)["while"] == 0
        assert "min(len(arr_2) - 1, len(arr_3) - 1)" in print_program(p)
        assert run(p, {"a": [1, 2, 3], "b": [4, 5, 6]}) == 32

    def test_zip_with_itself_doubles(self):
        s, a = arrays("a")
        p = api.zip_with(add, api.of_arr(s, a), api.of_arr(s, a)).fold(add, lit(0))
        assert run(p, {"a": [3, 4, 5]}) == 24

    def test_unequal_lengths(self):
        s, a, b = arrays("a", "b")
        p = api.zip_with(add, api.of_arr(s, a), api.of_arr(s, b)).fold(add, lit(0))
        assert run(p, {"a": [1, 2, 3], "b": [4, 5]}) == 12

    def test_linear_against_nested_stops_with_linear(self):
        s, a, b = arrays("a", "b")
        lin = api.of_arr(s, a)
        p = api.zip_with(add, lin, cart(s, b, b)).fold(lambda z, e: z + 1, lit(0))
        assert run(p, {"a": [10, 20], "b": [1, 2, 3]}) == 2

    def test_push_linear_code_shape(self):
        s, a, b = arrays("a", "b")
        p = api.zip_with(add, api.of_arr(s, a), cart(s, b, b)).fold(add, lit(0))
        text = print_program(p)
        assert "var term1r_" in text
        loops = [n for n in walk(p.body) if isinstance(n, WhileS)]
        assert loops and all(print_expr(w.cond).startswith("!term1r_") for w in loops)

    def test_empty_linear_side(self):
        s, a, b = arrays("a", "b")
        p = api.zip_with(add, api.of_arr(s, a), cart(s, b, b)).fold(add, lit(9))
        assert run(p, {"a": [], "b": [1, 2]}) == 9

    def test_reified_zip_matches_and_allocates(self):
        s, a, b = arrays("a", "b")
        p = api.zip_with(add, cart(s, a, b, add), cart(s, b, a, mul)).fold(add, lit(0))
        inputs = {"a": [1, 2, 3], "b": [10, 20]}
        xs = [x + y for x in inputs["a"] for y in inputs["b"]]
        ys = [x * y for x in inputs["b"] for y in inputs["a"]]
        assert run(p, inputs) == sum(x + y for x, y in zip(xs, ys))
        r = alloc_scan(p)
        assert r.loop_allocs_nonuser > 0
        assert any(loc.split("/")[-2].startswith("CellSet(curr_") and loc.endswith("SomeE") for loc in r.locations)

    @pytest.mark.parametrize("left,right,event", [
        ("lin", "lin", "zip_raw:linear-linear"),
        ("lin", "nest", "zip_raw:linear-nested"),
        ("nest", "lin", "zip_raw:nested-linear"),
        ("nest", "nest", "zip_raw:nested-nested"),
    ])
    def test_dispatch(self, left, right, event):
        s, a, b = arrays("a", "b")

        def make(kind):
            return api.of_arr(s, a) if kind == "lin" else cart(s, a, b)

        api.zip_with(add, make(left), make(right)).fold(add, lit(0))
        assert [e for e in s.trace if e.startswith("zip_raw")][0] == event

    def test_nested_linear_keeps_pair_order(self):
        s, a, b = arrays("a", "b")
        p = api.zip_with(lambda x, y: x - y, cart(s, a, b), api.of_arr(s, b)).fold(add, lit(0))
        inputs = {"a": [1, 2], "b": [5, 7]}
        xs = [x * y for x in inputs["a"] for y in inputs["b"]]
        assert run(p, inputs) == sum(x - y for x, y in zip(xs, inputs["b"]))

    def test_linear_linear_stays_linear(self):
        s, a, b = arrays("a", "b")
        st = core.zip_raw(api.of_arr(s, a)._take_stream(), api.of_arr(s, b)._take_stream(), s)
        assert isinstance(st, Linear)

    def test_zip_producer_mixed_shapes(self):
        s, a = arrays("a")
        p = api.zip_with(add, api.of_arr(s, a), api.iota(s, lit(100))).fold(add, lit(0))
        assert shape(p)["while"] == 1
        assert run(p, {"a": [1, 2]}) == 1 + 100 + 2 + 101


class TestMakeLinear:
    def test_rejects_linear(self):
        s, a = arrays("a")
        with pytest.raises(GenerationError):
            core.make_linear(api.of_arr(s, a)._take_stream(), s)

    def test_reified_stream_folds_the_same(self):
        checked = 0
        for seed in range(400):
            rng = random.Random(seed)
            js = random_spec_json(rng)
            spec = spec_from_json(js)
            s = Session()
            pl = to_pipeline(spec, s)
            st = pl._take_stream()
            if not isinstance(st, Nested):
                continue
            prog = reduce_pipeline(spec, Pipeline(Linear(core.make_linear(st, s)), s))
            inputs = random_inputs(rng)
            assert run(prog, inputs) == oracle_eval(spec, inputs), js
            checked += 1
            if checked == 100:
                break
        assert checked == 100

    def test_resume_cell_per_many_level(self):
        s, a = arrays("a")
        st = (api.of_arr(s, a)
              .flat_map(lambda x: api.of_arr(s, a).filter(lambda y: gt(y, x)))
              .flat_map(lambda y: api.of_arr(s, a).map(lambda z: z + y)))._take_stream()
        p = fold_stream(Linear(core.make_linear(st, s)), s)
        cells = [n.name for n in walk(p.body) if isinstance(n, CellNew)]
        assert sum(c.startswith("nadv_") for c in cells) == 2
        a_ = [1, 2, 3]
        assert run(p, {"a": a_}) == sum(z + y for x in a_ for y in a_ if y > x for z in a_)


def test_pairv_elements_need_no_tuples():
    s, a, b = arrays("a", "b")
    st = core.zip_raw(api.of_arr(s, a)._take_stream(), api.of_arr(s, b)._take_stream(), s)
    seen = []
    core.fold_raw(lambda e: seen.append(e) or core.SKIP, st, s)
    assert isinstance(seen[0], PairV)
    assert isinstance(st.producer.shape, core.For) and not isinstance(st.producer.shape, Unfold)
