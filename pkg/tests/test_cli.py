import json
import subprocess
import sys
from importlib import resources

from strymgen.cli import main


def bench_file(name):
    return str(resources.files("strymgen.benchmarks").joinpath(f"{name}.json"))


def test_gen_sum_is_one_for_loop(capsys):
    assert main(["gen", bench_file("sum")]) == 0
    out, err = capsys.readouterr()
    assert out.count("for ") == 1 and "while" not in out
    assert "scope: ok" in err and "loop allocations: 0 library" in err


def test_gen_filter_take_is_one_while(capsys):
    assert main(["gen", bench_file("filter_take")]) == 0
    out = capsys.readouterr().out
    assert out.count("while ") == 1 and "&&" in out and "for " not in out


def test_gen_to_file(tmp_path, capsys):
    out = tmp_path / "p.txt"
    assert main(["gen", bench_file("cart"), "--out", str(out)]) == 0
    assert out.read_text().startswith("program(arr1: int[], arr2: int[])")
    assert capsys.readouterr().out == ""


def test_gen_invalid_spec(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text('{"source": {"of_arr": "a"}, "ops": [{"scan": 1}]}')
    assert main(["gen", str(f)]) == 2
    assert "$.ops[0]" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["gen", "/nonexistent/x.json"]) == 2


def test_no_command():
    assert main([]) == 2


def test_strict_warning_and_error(tmp_path, capsys):
    f = tmp_path / "inf.json"
    f.write_text('{"source": {"iota": 0}, "ops": []}')
    assert main(["gen", "--strict", str(f)]) == 2
    capsys.readouterr()
    assert main(["gen", str(f)]) == 0
    assert "warning: $.source" in capsys.readouterr().err


def test_check_with_inputs(tmp_path, capsys):
    f = tmp_path / "in.json"
    f.write_text(json.dumps({"arr1": [1, 2, 3], "arr2": [4, 5, 6]}))
    assert main(["check", bench_file("dotProduct"), "--inputs", str(f)]) == 0
    out = capsys.readouterr().out
    assert "set 0: 32" in out and "pass: 1 input set(s)" in out


def test_check_inputs_missing_array(tmp_path):
    f = tmp_path / "in.json"
    f.write_text(json.dumps({"arr1": [1]}))
    assert main(["check", bench_file("dotProduct"), "--inputs", str(f)]) == 2


def test_check_random_trials(capsys):
    assert main(["check", bench_file("complex_zip"), "--trials", "20"]) == 0
    assert "pass: 20" in capsys.readouterr().out


def test_mutated_program_is_caught(capsys):
    assert main(["check", bench_file("sum"), "--mutate", "--trials", "5"]) == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_bench_deterministic(capsys):
    args = ["bench", "--suite", "sum,cart", "--scale", "200", "--seed", "3", "--json"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    rows = json.loads(first)
    assert [r["name"] for r in rows] == ["sum", "cart"]
    assert all(r["value"] == r["oracle_value"] for r in rows)


def test_bench_unknown_name():
    assert main(["bench", "--suite", "nope"]) == 2


def test_console_script_module():
    r = subprocess.run([sys.executable, "-m", "strymgen.cli", "gen", bench_file("sum")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("program(arr: int[])")
