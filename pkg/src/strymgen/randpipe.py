"""Random pipeline specs for differential testing.

Specs stay small: at most three levels of flat_map, at most two zips,
constants in [-8, 8], division only by non-zero literals, and every iota or
unfold source is followed directly by a take. Output is plain JSON data so
it also exercises the spec parser.
"""

from __future__ import annotations

import random

ARRAYS = ("a", "b", "c")
MAX_DEPTH = 3
MAX_ZIPS = 2
MAX_LEN = 32
CONST = 8


def _const(rng: random.Random) -> int:
    return rng.randint(-CONST, CONST)


def _nonzero(rng: random.Random) -> int:
    return rng.choice([k for k in range(-CONST, CONST + 1) if k != 0])


def int_expr(rng: random.Random, names: list[str], size: int = 2):
    if size <= 0 or rng.random() < 0.3:
        if names and rng.random() < 0.7:
            return ["var", rng.choice(names)]
        return _const(rng)
    op = rng.choice(["add", "sub", "mul", "min", "div", "mod", "add", "sub"])
    left = int_expr(rng, names, size - 1)
    if op in ("div", "mod"):
        return [op, left, _nonzero(rng)]
    return [op, left, int_expr(rng, names, size - 1)]


def bool_expr(rng: random.Random, names: list[str], size: int = 2):
    r = rng.random()
    if size > 0 and r < 0.15:
        return [rng.choice(["and", "or"]), bool_expr(rng, names, size - 1), bool_expr(rng, names, size - 1)]
    if size > 0 and r < 0.22:
        return ["not", bool_expr(rng, names, size - 1)]
    if r < 0.25:
        return rng.choice([True, False])
    op = rng.choice(["lt", "le", "eq", "gt", "ge"])
    return [op, int_expr(rng, names, 1), int_expr(rng, names, 1)]


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.zips = MAX_ZIPS

    def chain(self, outer: list[str], depth: int) -> dict:
        rng = self.rng
        r = rng.random()
        ops: list = []
        if r < 0.7:
            source = {"of_arr": rng.choice(ARRAYS)}
        elif r < 0.85:
            source = {"iota": int_expr(rng, outer, 1)}
            ops.append({"take": rng.randint(0, 6)})
        else:
            step = ["some_pair", int_expr(rng, ["z"] + outer, 1), ["add", ["var", "z"], rng.randint(1, 3)]]
            if rng.random() < 0.1:
                step = ["none"]
            source = {"unfold": {"seed": int_expr(rng, outer, 1), "step": step}}
            ops.append({"take": rng.randint(0, 6)})
        for _ in range(rng.randint(0, 3)):
            ops.append(self.op(outer, depth))
        return {"source": source, "ops": ops}

    def op(self, outer: list[str], depth: int) -> dict:
        rng = self.rng
        elem = ["x"] + outer
        kinds = ["map", "map", "filter", "filter", "take"]
        if depth < MAX_DEPTH:
            kinds.append("flat_map")
        if self.zips > 0:
            kinds.append("zip_with")
        kind = rng.choice(kinds)
        if kind == "map":
            return {"map": int_expr(rng, elem)}
        if kind == "filter":
            return {"filter": bool_expr(rng, elem)}
        if kind == "take":
            return {"take": int_expr(rng, outer, 1) if outer and rng.random() < 0.3 else rng.randint(-1, 12)}
        if kind == "flat_map":
            var = f"o{depth + 1}"
            return {"flat_map": {"var": var, "pipeline": self.chain(outer + [var], depth + 1)}}
        self.zips -= 1
        fn = rng.choice(["add", "sub", "mul", "min", {"vars": ["x", "y"], "body": int_expr(rng, ["x", "y"] + outer)}])
        return {"zip_with": {"with": self.chain(outer, depth), "fn": fn}}


def random_spec_json(rng: random.Random) -> dict:
    """One random spec as JSON data."""
    g = _Gen(rng)
    spec = g.chain([], 0)
    r = rng.random()
    if r < 0.5:
        spec["reduce"] = "sum"
    elif r < 0.8:
        spec["reduce"] = "fold_cons"
    else:
        spec["reduce"] = {"fold": {"fn": int_expr(rng, ["acc", "x"]), "seed": _const(rng)}}
    if rng.random() < 0.1 and g.zips > 0:
        # pair-valued elements, collected into a list
        spec["ops"].append({"zip_with": {"with": g.chain([], 0), "fn": "pair"}})
        spec["reduce"] = "fold_cons"
    return spec


def random_inputs(rng: random.Random, names=ARRAYS, max_len: int = MAX_LEN) -> dict:
    return {n: [_const(rng) for _ in range(rng.randint(0, max_len))] for n in names}
