"""Command-line front end: ``strymgen gen|check|bench``.

Exit codes: 0 success, 1 check mismatch or failed program check, 2 usage or
spec error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import replace

from .arith import ArithmeticFault
from .bench import DESK_SCALE, EXTRA, SUITE, format_tsv, run_bench
from .ir.checks import IRTypeError, alloc_scan, scope_check, type_check
from .ir.evaluator import DEFAULT_FUEL, EvalError, evaluate
from .ir.nodes import Binop, Program
from .ir.text import print_program
from .oracle import BudgetExhausted, oracle_eval
from .pipespec import SpecError, array_names, build, finiteness_problems, parse_spec
from .randpipe import random_inputs

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load(path: str | None, strict: bool):
    if path is None:
        raise UsageError("a spec file is required")
    spec = parse_spec(_read(path), strict=strict)
    for where in finiteness_problems(spec):
        print(f"warning: {where}: infinite source not bounded by a take", file=sys.stderr)
    return spec


def check_report(p: Program) -> list[str]:
    """One line per checker; a line starting with ``FAIL`` means the check failed."""
    lines = []
    violations = scope_check(p)
    if violations:
        lines.append("FAIL scope: " + "; ".join(f"{v.problem} {v.name}" for v in violations))
    else:
        lines.append("scope: ok")
        try:
            type_check(p)
            lines.append("types: ok")
        except IRTypeError as e:
            lines.append(f"FAIL types: {e}")
    rep = alloc_scan(p)
    lines.append(f"loop allocations: {rep.loop_allocs_nonuser} library, {rep.loop_allocs_user} user")
    for loc in rep.locations:
        lines.append(f"  at {loc}")
    return lines


def cmd_gen(args) -> int:
    spec = _load(args.file, args.strict)
    prog = build(spec)
    text = print_program(prog)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)
    report = check_report(prog)
    for line in report:
        print(line, file=sys.stderr)
    return EXIT_MISMATCH if any(line.startswith("FAIL") for line in report) else EXIT_OK


def mutate(p: Program) -> Program:
    """Corrupt ``p`` by turning its first ``+`` into ``-`` (for testing the checker)."""
    done = []

    def go(node):
        if done or not hasattr(node, "__dataclass_fields__"):
            return node
        if isinstance(node, Binop) and node.op == "+":
            done.append(True)
            return replace(node, op="-")
        changes = {}
        for name in node.__dataclass_fields__:
            v = getattr(node, name)
            if isinstance(v, tuple):
                nv = tuple(go(x) for x in v)
            else:
                nv = go(v)
            if nv is not v:
                changes[name] = nv
        return replace(node, **changes) if changes else node

    return replace(p, body=go(p.body))


def _outcome(thunk):
    try:
        return ("value", thunk())
    except ArithmeticFault:
        return ("fault", "arithmetic")


def cmd_check(args) -> int:
    spec = _load(args.file, args.strict)
    prog = build(spec)
    if args.mutate:
        prog = mutate(prog)
    bad = [line for line in check_report(prog) if line.startswith("FAIL")]
    if bad:
        print("\n".join(bad))
        return EXIT_MISMATCH
    names = array_names(spec)
    if args.inputs:
        data = json.loads(_read(args.inputs))
        sets = data if isinstance(data, list) else [data]
        for s in sets:
            missing = [n for n in names if n not in s]
            if missing:
                raise UsageError(f"inputs lack arrays: {', '.join(missing)}")
    else:
        rng = random.Random(args.seed)
        sets = [random_inputs(rng, names) for _ in range(args.trials)]
    for k, inputs in enumerate(sets):
        try:
            got = _outcome(lambda: evaluate(prog, inputs, fuel=args.fuel)[0])
        except EvalError as e:
            got = ("error", type(e).__name__)
        try:
            want = _outcome(lambda: oracle_eval(spec, inputs))
        except BudgetExhausted:
            want = ("error", "budget")
        if got != want:
            print(f"MISMATCH on input set {k}: generated {got[1]!r}, oracle {want[1]!r}")
            print(json.dumps(inputs))
            return EXIT_MISMATCH
        if args.inputs:
            print(f"set {k}: {got[1]!r}")
    print(f"pass: {len(sets)} input set(s)")
    return EXIT_OK


def _suite(name: str) -> tuple:
    if name == "paper":
        return SUITE
    if name == "extra":
        return EXTRA
    if name == "all":
        return SUITE + EXTRA
    names = tuple(n for n in name.split(",") if n)
    unknown = [n for n in names if n not in SUITE + EXTRA]
    if unknown:
        raise UsageError(f"unknown benchmark(s): {', '.join(unknown)}")
    return names


def cmd_bench(args) -> int:
    if args.scale < 10:
        raise UsageError("--scale must be at least 10")
    results = [run_bench(n, args.scale, args.seed) for n in _suite(args.suite)]
    if args.json:
        print(json.dumps([r.row() for r in results], indent=2))
    else:
        sys.stdout.write(format_tsv(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="strymgen", description="Fused stream pipeline compiler.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="compile a spec and print the program")
    g.add_argument("file")
    g.add_argument("--out")
    g.add_argument("--strict", action="store_true", help="reject infinite sources without a take")
    g.set_defaults(run=cmd_gen)

    c = sub.add_parser("check", help="compare the compiled program against the oracle")
    c.add_argument("file")
    c.add_argument("--inputs", help="JSON object (or list of objects) of named arrays")
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--strict", action="store_true")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="evaluator step limit per run")
    c.add_argument("--mutate", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(run=cmd_check)

    b = sub.add_parser("bench", help="run the benchmark suite")
    b.add_argument("--suite", default="paper", help="paper, extra, all, or comma-separated names")
    b.add_argument("--scale", type=int, default=DESK_SCALE)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--json", action="store_true")
    b.set_defaults(run=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.run(args)
    except (SpecError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as e:
        print(f"error: bad inputs file: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
