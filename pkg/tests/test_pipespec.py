import json

import pytest

from strymgen.bench import EXTRA, SUITE, load_spec
from strymgen.ir.checks import alpha_equivalent
from strymgen.ir.nodes import INT, ListT, PairT
from strymgen.pipespec import (
    FlatMap, Fn, Iota, Map, SpecError, Take, ZipWith, array_names, build, check_types, dump_spec,
    finiteness_problems, parse_spec, spec_from_json, spec_to_json,
)

X = ["var", "x"]


def errpath(obj, strict=False):
    with pytest.raises(SpecError) as e:
        spec_from_json(obj, strict)
    return e.value.path


class TestParse:
    def test_defaults(self):
        s = spec_from_json({"source": {"of_arr": "a"}})
        assert s.chain.ops == () and type(s.reduce).__name__ == "Sum"

    def test_operator_shorthand(self):
        s = spec_from_json({"source": {"of_arr": "a"},
                            "ops": [{"zip_with": {"with": {"source": {"of_arr": "b"}}, "fn": "mul"}}]})
        z = s.chain.ops[0]
        assert isinstance(z, ZipWith) and z.fn.params == ("x", "y")

    def test_named_params(self):
        s = spec_from_json({"source": {"of_arr": "a"},
                            "ops": [{"map": {"vars": ["v"], "body": ["add", ["var", "v"], 1]}}]})
        assert s.chain.ops[0] == Map(Fn(("v",), ("add", ("var", "v"), 1)))

    def test_flat_map_var_default(self):
        s = spec_from_json({"source": {"of_arr": "a"}, "ops": [{"flat_map": {"pipeline": {"source": {"iota": X}}}},
                                                                {"take": 5}]})
        assert isinstance(s.chain.ops[0], FlatMap) and s.chain.ops[0].var == "x"
        assert isinstance(s.chain.ops[0].inner.source, Iota)
        assert s.chain.ops[1] == Take(5)


class TestErrors:
    def test_bad_json(self):
        with pytest.raises(SpecError, match="invalid JSON"):
            parse_spec("{")

    def test_unknown_op_path(self):
        assert errpath({"source": {"of_arr": "a"}, "ops": [{"map": X}, {"scan": 1}]}) == "$.ops[1]"

    def test_unknown_variable(self):
        assert errpath({"source": {"of_arr": "a"}, "ops": [{"map": ["var", "y"]}]}).startswith("$.ops[0].map")

    def test_zip_needs_two_streams(self):
        with pytest.raises(SpecError, match="two streams"):
            spec_from_json({"source": {"of_arr": "a"}, "ops": [{"zip_with": {"fn": "add"}}]})

    def test_filter_must_be_bool(self):
        assert errpath({"source": {"of_arr": "a"}, "ops": [{"filter": ["add", X, 1]}]}).startswith("$.ops[0]")

    def test_sum_of_pairs_rejected(self):
        with pytest.raises(SpecError):
            spec_from_json({"source": {"of_arr": "a"},
                            "ops": [{"zip_with": {"with": {"source": {"of_arr": "b"}}, "fn": "pair"}}]})

    def test_bad_reduce(self):
        assert errpath({"source": {"of_arr": "a"}, "reduce": "max"}) == "$.reduce"

    def test_strict_iota(self):
        obj = {"source": {"iota": 0}, "ops": [{"map": X}]}
        assert errpath(obj, strict=True) == "$.source"
        assert finiteness_problems(spec_from_json(obj)) == ["$.source"]

    def test_strict_accepts_take(self):
        obj = {"source": {"iota": 0}, "ops": [{"map": X}, {"take": 3}]}
        assert finiteness_problems(spec_from_json(obj, strict=True)) == []

    def test_inner_iota_guarded_by_outer_take(self):
        inner = {"source": {"iota": X}}
        obj = {"source": {"of_arr": "a"}, "ops": [{"flat_map": {"pipeline": inner}}, {"take": 4}]}
        assert finiteness_problems(spec_from_json(obj)) == []


class TestTypes:
    def test_result_types(self):
        assert check_types(load_spec("sum")) == INT
        assert check_types(load_spec("complex_zip")) == ListT(PairT(INT, INT))

    def test_array_names_in_order(self):
        assert array_names(load_spec("cart")) == ["arr1", "arr2"]


@pytest.mark.parametrize("name", SUITE + EXTRA)
def test_benchmark_round_trip(name):
    s = load_spec(name)
    again = parse_spec(dump_spec(s))
    assert again == s
    assert json.loads(dump_spec(s)) == spec_to_json(s)
    assert alpha_equivalent(build(s), build(again))
