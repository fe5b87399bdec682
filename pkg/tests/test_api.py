import pytest

from strymgen import api
from strymgen.api import PipelineError
from strymgen.ir.checks import alpha_equivalent
from strymgen.ir.evaluator import FuelExhausted, evaluate
from strymgen.ir.nodes import Session
from strymgen.ir.text import parse_program, print_program
from strymgen.pipespec import parse_spec
from strymgen.staged import StagingTypeError, add, consE, eq, gt, lit, mod_, mul, nilE, somePairE

from conftest import run, shape
from test_ir import SUM_OF_SQUARES

# transcribed by hand from published listings
FILTER_TAKE = """
program(arr: int[], n: int) {
  var s_1: int := 0;
  let arr_2: int[] = arr;
  var i_3: int := 0;
  var nr_4: int := n;
  while !nr_4 > 0 && !i_3 <= len(arr_2) - 1 {
    let el_5: int = arr_2[!i_3];
    let t_6: int = el_5 * el_5;
    i_3 := !i_3 + 1;
    if t_6 mod 17 > 7 {
      nr_4 := !nr_4 - 1;
      s_1 := t_6 + !s_1;
    }
  }
  return s_1;
}
"""

DOT_PRODUCT = """
program(arr1: int[], arr2: int[]) {
  var s_17: int := 0;
  let arr_18: int[] = arr1;
  let arr_19: int[] = arr2;
  for i_20 = 0 to min(len(arr_18) - 1, len(arr_19) - 1) {
    let el_21: int = arr_18[i_20];
    let el_22: int = arr_19[i_20];
    s_17 := el_21 * el_22 + !s_17;
  }
  return s_17;
}
"""


def acc(z, a):
    return add(a, z)


def squares(s, arr):
    return api.of_arr(s, arr).map(lambda x: mul(x, x))


class TestGoldens:
    def test_sum_of_squares_exact(self):
        s = Session()
        prog = squares(s, api.arr_param(s, "arr")).fold(acc, lit(0))
        assert prog == parse_program(SUM_OF_SQUARES)

    def test_filter_take_exact(self):
        s = Session()
        arr, n = api.arr_param(s, "arr"), api.int_param(s, "n")
        prog = (squares(s, arr)
                .filter(lambda x: gt(mod_(x, lit(17)), lit(7)))
                .take(n)
                .fold(acc, lit(0)))
        assert prog == parse_program(FILTER_TAKE)
        assert run(prog, {"arr": [1, 3, 5, 9], "n": 2}) == 9 + 25

    def test_dot_product_alpha(self):
        s = Session()
        a, b = api.arr_param(s, "arr1"), api.arr_param(s, "arr2")
        prog = api.zip_with(mul, api.of_arr(s, a), api.of_arr(s, b)).fold(acc, lit(0))
        assert alpha_equivalent(prog, parse_program(DOT_PRODUCT))
        assert prog != parse_program(DOT_PRODUCT)


class TestSources:
    def test_of_arr_sum(self):
        s = Session()
        prog = api.of_arr(s, api.arr_param(s, "a")).fold(add, lit(0))
        assert run(prog, {"a": list(range(10))}) == 45
        assert run(prog, {"a": []}) == 0

    def test_iota_take(self):
        s = Session()
        assert run(api.iota(s, lit(5)).take(3).fold(add, lit(0))) == 18

    def test_iota_without_take_runs_out_of_fuel(self):
        s = Session()
        prog = api.iota(s, lit(0)).fold(add, lit(0))
        with pytest.raises(FuelExhausted):
            evaluate(prog, {}, fuel=10_000)

    def test_unfold_take(self):
        s = Session()
        p = api.unfold(s, lambda z: somePairE(mul(z, lit(2)), add(z, lit(1))), lit(1))
        assert run(p.take(3).fold(add, lit(0))) == 2 + 4 + 6

    def test_take_beyond_length(self):
        s = Session()
        p = api.of_arr(s, api.arr_param(s, "a")).take(12).fold(add, lit(0))
        assert run(p, {"a": list(range(10))}) == 45

    def test_take_int_param(self):
        s = Session()
        a, n = api.arr_param(s, "a"), api.int_param(s, "n")
        p = api.of_arr(s, a).take(n).fold(add, lit(0))
        assert [run(p, {"a": [4, 5, 6], "n": k}) for k in range(5)] == [0, 4, 9, 15, 15]


class TestCombinators:
    def test_filter_even_squares(self):
        s = Session()
        p = (api.of_arr(s, api.arr_param(s, "a"))
             .filter(lambda x: eq(mod_(x, lit(2)), lit(0)))
             .map(lambda x: mul(x, x))
             .fold(add, lit(0)))
        assert run(p, {"a": [0, 1, 2, 3, 4]}) == 20

    def test_filter_needs_bool(self):
        s = Session()
        with pytest.raises(StagingTypeError):
            api.of_arr(s, api.arr_param(s, "a")).filter(lambda x: x + 1).fold(add, lit(0))

    def test_flat_map_empty_inner(self):
        s = Session()
        a, b = api.arr_param(s, "a"), api.arr_param(s, "b")
        p = api.of_arr(s, a).flat_map(lambda x: api.of_arr(s, b)).fold(add, lit(3))
        assert run(p, {"a": [1, 2], "b": []}) == 3
        assert run(p, {"a": [], "b": [1]}) == 3

    def test_flat_map_other_session(self):
        s, t = Session(), Session()
        b = api.arr_param(t, "b")
        with pytest.raises(PipelineError):
            api.of_arr(s, api.arr_param(s, "a")).flat_map(lambda x: api.of_arr(t, b)).fold(add, lit(0))

    def test_fold_cons_newest_first(self):
        s = Session()
        p = api.of_arr(s, api.arr_param(s, "a")).fold(lambda z, x: consE(x, z), nilE())
        assert run(p, {"a": [1, 2, 3]}) == [3, 2, 1]

    def test_zip_self_rejected(self):
        s = Session()
        p = api.of_arr(s, api.arr_param(s, "a"))
        with pytest.raises(PipelineError):
            api.zip_with(add, p, p)

    def test_zip_sessions_must_match(self):
        s, t = Session(), Session()
        with pytest.raises(PipelineError):
            api.zip_with(add, api.of_arr(s, api.arr_param(s, "a")), api.of_arr(t, api.arr_param(t, "b")))

    def test_is_linear(self):
        s = Session()
        a = api.arr_param(s, "a")
        assert api.of_arr(s, a).map(lambda x: x).is_linear
        assert not api.of_arr(s, a).filter(lambda x: gt(x, 0)).is_linear


class TestReuse:
    def test_pipeline_used_twice(self):
        s = Session()
        p = api.of_arr(s, api.arr_param(s, "a"))
        p.map(lambda x: x)
        with pytest.raises(PipelineError):
            p.map(lambda x: x)

    def test_second_fold_in_session(self):
        s = Session()
        api.of_arr(s, api.arr_param(s, "a")).fold(add, lit(0))
        with pytest.raises(PipelineError):
            api.of_arr(s, api.arr_param(s, "b")).fold(add, lit(0))


def test_compile_from_spec():
    spec = parse_spec('{"source": {"of_arr": "a"}, "ops": [], "reduce": "sum"}')
    prog = api.compile(spec)
    assert shape(prog)["for"] == 1
    assert run(prog, {"a": [1, 2, 3]}) == 6
    assert print_program(prog).startswith("program(a: int[])")
