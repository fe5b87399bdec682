from strymgen.ir.checks import scope_check, type_check
from strymgen.ir.evaluator import evaluate
from strymgen.ir.nodes import CellNew, ForS, IfS, WhileS, walk


def run(prog, inputs=None, fuel=10**7):
    """Check ``prog`` and return its value."""
    assert scope_check(prog) == []
    type_check(prog)
    return evaluate(prog, inputs if inputs is not None else {}, fuel=fuel)[0]


def count(prog, kind):
    return sum(isinstance(n, kind) for n in walk(prog.body))


def shape(prog):
    return {k: count(prog, t) for k, t in (("for", ForS), ("while", WhileS), ("if", IfS), ("cells", CellNew))}


# PASS/FAIL lines recorded by test_acceptance, shown after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
