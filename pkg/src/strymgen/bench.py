"""Benchmark suite: pipeline specs, hand-written baseline programs, inputs and runs.

Baselines are written in the textual IR, transcribing the straightforward
loops a programmer would write for each benchmark. Generated and baseline
programs run on the same evaluator, so the step and operation counts compare
loop structure rather than machine effects.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, replace
from importlib import resources

from .ir.checks import alloc_scan, scope_check, type_check
from .ir.evaluator import evaluate
from .ir.nodes import CellNew, ForS, IfS, Program, WhileS, walk
from .ir.text import parse_program
from .oracle import oracle_eval
from .pipespec import PipelineSpec, Take, array_names, build, parse_spec

SUITE = (
    "sum", "sumOfSquares", "sumOfSquaresEven", "maps", "filters", "cart", "dotProduct",
    "flatMap_after_zipWith", "zipWith_after_flatMap", "flat_map_take",
)
EXTRA = ("zipWith_after_flatMap_linear", "filter_take", "complex_zip")

# benchmarks whose generated code must stay within the parity bound
PARITY = ("sum", "sumOfSquares", "sumOfSquaresEven", "maps", "filters", "cart", "dotProduct")
PARITY_BOUND = 1.10

# the one benchmark expected to allocate per element
ALLOC_EXCEPTION = "zipWith_after_flatMap"

DESK_SCALE = 100_000


def load_spec(name: str) -> PipelineSpec:
    text = resources.files("strymgen.benchmarks").joinpath(f"{name}.json").read_text()
    return parse_spec(text)


def scaled_spec(name: str, scale: int) -> PipelineSpec:
    """The suite spec, with the flat_map_take limit set to a fifth of ``scale``."""
    spec = load_spec(name)
    if name == "flat_map_take":
        ops = tuple(Take(scale // 5) if isinstance(op, Take) else op for op in spec.chain.ops)
        spec = replace(spec, chain=replace(spec.chain, ops=ops))
    return spec


# ------------------------------------------------------------- baselines

_HAND = {
    "sum": """
program(arr: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr) - 1 {
    sum := !sum + arr[c1];
  }
  return sum;
}""",
    "sumOfSquares": """
program(arr: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr) - 1 {
    let item1: int = arr[c1];
    sum := !sum + item1 * item1;
  }
  return sum;
}""",
    "sumOfSquaresEven": """
program(arr: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr) - 1 {
    let item1: int = arr[c1];
    if item1 mod 2 = 0 {
      sum := !sum + item1 * item1;
    }
  }
  return sum;
}""",
    "maps": """
program(arr: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr) - 1 {
    let item1: int = arr[c1];
    sum := !sum + item1 * 1 * 2 * 3 * 4 * 5 * 6 * 7;
  }
  return sum;
}""",
    "filters": """
program(arr: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr) - 1 {
    let item1: int = arr[c1];
    if item1 > 1 && item1 > 2 && item1 > 3 && item1 > 4 && item1 > 5 && item1 > 6 && item1 > 7 {
      sum := !sum + item1;
    }
  }
  return sum;
}""",
    "cart": """
program(arr1: int[], arr2: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr1) - 1 {
    let item1: int = arr1[c1];
    for c2 = 0 to len(arr2) - 1 {
      let item2: int = arr2[c2];
      sum := !sum + item1 * item2;
    }
  }
  return sum;
}""",
    "dotProduct": """
program(arr1: int[], arr2: int[]) {
  var sum: int := 0;
  for c = 0 to min(len(arr1), len(arr2)) - 1 {
    let item1: int = arr1[c];
    let item2: int = arr2[c];
    sum := !sum + item1 * item2;
  }
  return sum;
}""",
    "flatMap_after_zipWith": """
program(arr1: int[], arr2: int[]) {
  var sum: int := 0;
  for c1 = 0 to len(arr1) - 1 {
    let x: int = arr1[c1] + arr1[c1];
    for c2 = 0 to len(arr2) - 1 {
      let item2: int = arr2[c2];
      sum := !sum + item2 + x;
    }
  }
  return sum;
}""",
    # Drives the second stream (outer arr2, inner arr1) with loops and walks
    # the first one (outer arr1, inner arr2) by hand with two index cells.
    "zipWith_after_flatMap": """
program(arr1: int[], arr2: int[]) {
  var sum: int := 0;
  var i1: int := 0;
  var j1: int := 0;
  var flag: bool := !i1 <= len(arr1) - 1;
  var c1: int := 0;
  while !flag && !c1 <= len(arr2) - 1 {
    let x2: int = arr2[!c1];
    c1 := !c1 + 1;
    var c2: int := 0;
    while !flag && !c2 <= len(arr1) - 1 {
      let y2: int = arr1[!c2];
      c2 := !c2 + 1;
      let a: int = arr2[!j1] + arr1[!i1];
      j1 := !j1 + 1;
      if !j1 > len(arr2) - 1 {
        j1 := 0;
        i1 := !i1 + 1;
      }
      flag := !i1 <= len(arr1) - 1;
      sum := !sum + (a + (y2 + x2));
    }
  }
  return sum;
}""",
    "zipWith_after_flatMap_linear": """
program(arr1: int[], arr2: int[]) {
  var sum: int := 0;
  var i1: int := 0;
  var i2: int := 0;
  var flag1: bool := !i1 <= len(arr1) - 1;
  while !flag1 && !i2 <= len(arr2) - 1 {
    let el2: int = arr2[!i2];
    i2 := !i2 + 1;
    var i_zip: int := 0;
    while !flag1 && !i_zip <= len(arr1) - 1 {
      let el1: int = arr1[!i_zip];
      i_zip := !i_zip + 1;
      let elz: int = arr1[!i1];
      i1 := !i1 + 1;
      flag1 := !i1 <= len(arr1) - 1;
      sum := !sum + (elz + el1 + el2);
    }
  }
  return sum;
}""",
    "flat_map_take": """
program(arr1: int[], arr2: int[]) {
  var counter1: int := 0;
  var counter2: int := 0;
  var sum: int := 0;
  var n: int := 0;
  var flag: bool := true;
  let size1: int = len(arr1);
  let size2: int = len(arr2);
  while !counter1 < size1 && !flag {
    let item1: int = arr1[!counter1];
    while !counter2 < size2 && !flag {
      let item2: int = arr2[!counter2];
      sum := !sum + item1 * item2;
      counter2 := !counter2 + 1;
      n := !n + 1;
      if !n = LIMIT {
        flag := false;
      }
    }
    counter2 := 0;
    counter1 := !counter1 + 1;
  }
  return sum;
}""",
}


def baseline(name: str, scale: int = DESK_SCALE) -> Program | None:
    """Hand-written program for ``name``; ``None`` when there is none."""
    text = _HAND.get(name)
    if text is None:
        return None
    return parse_program(text.replace("LIMIT", str(scale // 5)))


# ---------------------------------------------------------------- inputs


def _arr(n: int, rng: random.Random | None) -> list[int]:
    if rng is None:
        return [i % 10 for i in range(n)]
    return [rng.randrange(10) for _ in range(n)]


def bench_inputs(name: str, scale: int = DESK_SCALE, seed: int | None = None) -> dict:
    """Arrays of ``x_i = i mod 10`` (or random digits when seeded).

    Single-array benchmarks and dotProduct use ``scale`` elements; the
    nested ones use an outer array of ``scale // 10`` and an inner one of 10.
    """
    rng = None if seed is None else random.Random(f"{name}:{seed}")
    names = array_names(load_spec(name))
    if name in ("sum", "sumOfSquares", "sumOfSquaresEven", "maps", "filters", "filter_take"):
        return {names[0]: _arr(scale, rng)}
    if name == "dotProduct":
        return {"arr1": _arr(scale, rng), "arr2": _arr(scale, rng)}
    if name == "complex_zip":
        return {"arr1": _arr(min(scale, 64), rng)}
    return {"arr1": _arr(max(1, scale // 10), rng), "arr2": _arr(10, rng)}


# ------------------------------------------------------------------ runs


def structure(p: Program) -> dict:
    nodes = list(walk(p.body))
    return {
        "for": sum(isinstance(n, ForS) for n in nodes),
        "while": sum(isinstance(n, WhileS) for n in nodes),
        "if": sum(isinstance(n, IfS) for n in nodes),
        "cells": sum(isinstance(n, CellNew) for n in nodes),
    }


@dataclass
class BenchResult:
    name: str
    value: object
    oracle_value: object
    steps_generated: int
    steps_handwritten: int | None
    ops_generated: int
    ops_handwritten: int | None
    hand_value: object
    loop_allocs_nonuser: int
    steady_allocs_nonuser: int
    for_loops: int
    while_loops: int
    ifs: int
    cells: int

    @property
    def passed(self) -> bool:
        return self.value == self.oracle_value

    @property
    def steps_ratio(self) -> float | None:
        return None if not self.steps_handwritten else self.steps_generated / self.steps_handwritten

    @property
    def ops_ratio(self) -> float | None:
        return None if not self.ops_handwritten else self.ops_generated / self.ops_handwritten

    def row(self) -> dict:
        d = asdict(self)
        d["steps_ratio"] = None if self.steps_ratio is None else round(self.steps_ratio, 4)
        d["ops_ratio"] = None if self.ops_ratio is None else round(self.ops_ratio, 4)
        d["pass"] = self.passed
        return d


def run_bench(name: str, scale: int = DESK_SCALE, seed: int | None = None) -> BenchResult:
    spec = scaled_spec(name, scale)
    prog = build(spec)
    if scope_check(prog):
        raise AssertionError(f"{name}: generated program is not well scoped")
    type_check(prog)
    inputs = bench_inputs(name, scale, seed)
    value, counters = evaluate(prog, inputs)
    expected = oracle_eval(spec, inputs)
    hand = baseline(name, scale)
    hand_value = hsteps = hops = None
    if hand is not None:
        hand_value, hc = evaluate(hand, inputs)
        hsteps, hops = hc.steps, hc.ops
    shape = structure(prog)
    return BenchResult(
        name=name, value=value, oracle_value=expected,
        steps_generated=counters.steps, steps_handwritten=hsteps,
        ops_generated=counters.ops, ops_handwritten=hops, hand_value=hand_value,
        loop_allocs_nonuser=alloc_scan(prog).loop_allocs_nonuser,
        steady_allocs_nonuser=counters.steady_allocations_nonuser,
        for_loops=shape["for"], while_loops=shape["while"], ifs=shape["if"], cells=shape["cells"],
    )


COLUMNS = (
    "name", "pass", "value", "oracle_value", "hand_value", "steps_generated", "steps_handwritten",
    "steps_ratio", "ops_generated", "ops_handwritten", "ops_ratio", "loop_allocs_nonuser",
    "steady_allocs_nonuser", "for_loops", "while_loops", "ifs", "cells",
)


def format_tsv(results: list[BenchResult]) -> str:
    lines = ["\t".join(COLUMNS)]
    for r in results:
        row = r.row()
        lines.append("\t".join("-" if row[c] is None else str(row[c]) for c in COLUMNS))
    return "\n".join(lines) + "\n"
