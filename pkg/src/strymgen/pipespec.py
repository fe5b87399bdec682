"""Serializable pipeline descriptions.

A spec is a JSON object::

    {"source": {"of_arr": "arr"},
     "ops": [{"map": ["mul", ["var", "x"], ["var", "x"]]},
             {"take": 10}],
     "reduce": "sum"}

Expressions are ints, booleans or prefix lists ``[op, arg...]``. Function
bodies name their parameters ``x`` (map, filter), ``x, y`` (zip_with),
``acc, x`` (fold) and ``z`` (unfold) unless given as
``{"vars": [...], "body": expr}``. Binary zip and fold functions may also be
written as an operator name such as ``"add"``.

Sources: ``{"of_arr": name}``, ``{"iota": expr}``,
``{"unfold": {"seed": expr, "step": fn}}`` where ``step`` returns
``["some_pair", elem, next_seed]`` or ``["none"]``.
Ops: ``map``, ``filter``, ``take``, ``{"flat_map": {"var": v, "pipeline": chain}}``,
``{"zip_with": {"with": chain, "fn": fn}}`` (the current stream is the first
argument). Reducers: ``"sum"``, ``"fold_cons"``, ``{"fold": {"fn": fn, "seed": expr}}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Union

from .ir.nodes import BOOL, INT, ListT, OptionT, PairT, Program, Session, Ty, show_ty


class SpecError(Exception):
    """Invalid spec; ``path`` locates the offending JSON value."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = path


# ------------------------------------------------------------ data model

# expression op -> (arity, kind)
EXPR_OPS = {
    "add": (2, "arith"), "sub": (2, "arith"), "mul": (2, "arith"),
    "div": (2, "arith"), "mod": (2, "arith"), "min": (2, "arith"),
    "lt": (2, "cmp"), "le": (2, "cmp"), "gt": (2, "cmp"), "ge": (2, "cmp"),
    "eq": (2, "eq"),
    "and": (2, "bool"), "or": (2, "bool"), "not": (1, "bool"),
    "pair": (2, "pair"), "some_pair": (2, "some_pair"), "none": (0, "none"),
    "var": (1, "var"), "int": (1, "int"), "true": (0, "lit"), "false": (0, "lit"),
}

BINARY_FN_OPS = ("add", "sub", "mul", "div", "mod", "min", "pair")


@dataclass(frozen=True)
class Fn:
    params: tuple
    body: Any
    op: str | None = None   # set when written as an operator name


@dataclass(frozen=True)
class OfArr:
    name: str


@dataclass(frozen=True)
class Iota:
    start: Any


@dataclass(frozen=True)
class UnfoldSrc:
    seed: Any
    step: Fn


@dataclass(frozen=True)
class Map:
    fn: Fn


@dataclass(frozen=True)
class Filter:
    fn: Fn


@dataclass(frozen=True)
class Take:
    count: Any


@dataclass(frozen=True)
class FlatMap:
    var: str
    inner: "Chain"


@dataclass(frozen=True)
class ZipWith:
    other: "Chain"
    fn: Fn


Source = Union[OfArr, Iota, UnfoldSrc]
Op = Union[Map, Filter, Take, FlatMap, ZipWith]


@dataclass(frozen=True)
class Chain:
    source: Source
    ops: tuple = ()


@dataclass(frozen=True)
class Sum:
    pass


@dataclass(frozen=True)
class FoldCons:
    pass


@dataclass(frozen=True)
class Fold:
    fn: Fn
    seed: Any


Reduce = Union[Sum, FoldCons, Fold]


@dataclass(frozen=True)
class PipelineSpec:
    chain: Chain
    reduce: Reduce = Sum()


# --------------------------------------------------------------- parsing


def _thaw(v):
    return [_thaw(x) for x in v] if isinstance(v, tuple) else v


def _expr(v, path):
    if isinstance(v, bool) or isinstance(v, int):
        return v
    if not isinstance(v, list) or not v or not isinstance(v[0], str):
        raise SpecError("expected an int, a bool or [op, args...]", path)
    op = v[0]
    if op not in EXPR_OPS:
        raise SpecError(f"unknown expression op {op!r}", path)
    arity, kind = EXPR_OPS[op]
    if len(v) - 1 != arity:
        raise SpecError(f"{op} takes {arity} argument(s), got {len(v) - 1}", path)
    if kind == "var":
        if not isinstance(v[1], str):
            raise SpecError("var needs a name", path)
        return ("var", v[1])
    if kind == "int":
        if isinstance(v[1], bool) or not isinstance(v[1], int):
            raise SpecError("int needs an integer", path)
        return ("int", v[1])
    return (op,) + tuple(_expr(a, f"{path}[{i + 1}]") for i, a in enumerate(v[1:]))


def _fn(v, default: tuple, path) -> Fn:
    if isinstance(v, str):
        if len(default) != 2 or v not in BINARY_FN_OPS:
            raise SpecError(f"operator shorthand {v!r} not allowed here", path)
        return Fn(default, (v, ("var", default[0]), ("var", default[1])), op=v)
    if isinstance(v, dict):
        _keys(v, {"vars", "body"}, {"vars", "body"}, path)
        names = v["vars"]
        if (not isinstance(names, list) or len(names) != len(default)
                or not all(isinstance(n, str) for n in names) or len(set(names)) != len(names)):
            raise SpecError(f"vars must list {len(default)} distinct names", path + ".vars")
        return Fn(tuple(names), _expr(v["body"], path + ".body"))
    return Fn(default, _expr(v, path))


def _keys(obj, required: set, allowed: set, path):
    if not isinstance(obj, dict):
        raise SpecError("expected an object", path)
    missing = required - obj.keys()
    if missing:
        raise SpecError(f"missing key {sorted(missing)[0]!r}", path)
    extra = obj.keys() - allowed
    if extra:
        raise SpecError(f"unknown key {sorted(extra)[0]!r}", path)


def _single(obj, path):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecError("expected an object with exactly one key", path)
    return next(iter(obj.items()))


def _source(v, path) -> Source:
    key, arg = _single(v, path)
    p = f"{path}.{key}"
    if key == "of_arr":
        if not isinstance(arg, str) or not arg.isidentifier():
            raise SpecError("of_arr needs an input name", p)
        return OfArr(arg)
    if key == "iota":
        return Iota(_expr(arg, p))
    if key == "unfold":
        _keys(arg, {"seed", "step"}, {"seed", "step"}, p)
        return UnfoldSrc(_expr(arg["seed"], p + ".seed"), _fn(arg["step"], ("z",), p + ".step"))
    raise SpecError(f"unknown source {key!r}", path)


def _op(v, path) -> Op:
    key, arg = _single(v, path)
    p = f"{path}.{key}"
    if key == "map":
        return Map(_fn(arg, ("x",), p))
    if key == "filter":
        return Filter(_fn(arg, ("x",), p))
    if key == "take":
        return Take(_expr(arg, p))
    if key == "flat_map":
        _keys(arg, {"pipeline"}, {"var", "pipeline"}, p)
        var = arg.get("var", "x")
        if not isinstance(var, str):
            raise SpecError("var must be a name", p + ".var")
        return FlatMap(var, _chain(arg["pipeline"], p + ".pipeline"))
    if key == "zip_with":
        if not isinstance(arg, dict):
            raise SpecError("zip_with needs {\"with\": pipeline, \"fn\": fn}", p)
        if "with" not in arg:
            raise SpecError("zip_with takes two streams; missing key 'with'", p)
        _keys(arg, {"with", "fn"}, {"with", "fn"}, p)
        return ZipWith(_chain(arg["with"], p + ".with"), _fn(arg["fn"], ("x", "y"), p + ".fn"))
    raise SpecError(f"unknown op {key!r}", path)


def _chain(v, path) -> Chain:
    _keys(v, {"source"}, {"source", "ops"}, path)
    ops = v.get("ops", [])
    if not isinstance(ops, list):
        raise SpecError("ops must be a list", path + ".ops")
    return Chain(_source(v["source"], path + ".source"),
                 tuple(_op(o, f"{path}.ops[{i}]") for i, o in enumerate(ops)))


def _reduce(v, path) -> Reduce:
    if v == "sum":
        return Sum()
    if v == "fold_cons":
        return FoldCons()
    if isinstance(v, dict) and set(v) == {"fold"}:
        arg = v["fold"]
        _keys(arg, {"fn", "seed"}, {"fn", "seed"}, path + ".fold")
        return Fold(_fn(arg["fn"], ("acc", "x"), path + ".fold.fn"), _expr(arg["seed"], path + ".fold.seed"))
    raise SpecError("reduce must be \"sum\", \"fold_cons\" or {\"fold\": ...}", path)


def spec_from_json(obj, strict: bool = False) -> PipelineSpec:
    """Validate a decoded JSON value; see the module docstring for the shape."""
    if not isinstance(obj, dict):
        raise SpecError("spec must be an object")
    _keys(obj, {"source"}, {"source", "ops", "reduce"}, "$")
    chain = _chain({k: obj[k] for k in ("source", "ops") if k in obj}, "$")
    spec = PipelineSpec(chain, _reduce(obj.get("reduce", "sum"), "$.reduce"))
    check_types(spec)
    if strict:
        problems = finiteness_problems(spec)
        if problems:
            raise SpecError("infinite source not bounded by a take", problems[0])
    return spec


def parse_spec(text: str, strict: bool = False) -> PipelineSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from None
    return spec_from_json(obj, strict)


# ---------------------------------------------------------- serializing


def _fn_json(fn: Fn, default: tuple):
    if fn.op is not None:
        return fn.op
    if fn.params == default:
        return _thaw(fn.body)
    return {"vars": list(fn.params), "body": _thaw(fn.body)}


def _chain_json(c: Chain) -> dict:
    src = c.source
    if isinstance(src, OfArr):
        s = {"of_arr": src.name}
    elif isinstance(src, Iota):
        s = {"iota": _thaw(src.start)}
    else:
        s = {"unfold": {"seed": _thaw(src.seed), "step": _fn_json(src.step, ("z",))}}
    ops = []
    for op in c.ops:
        if isinstance(op, Map):
            ops.append({"map": _fn_json(op.fn, ("x",))})
        elif isinstance(op, Filter):
            ops.append({"filter": _fn_json(op.fn, ("x",))})
        elif isinstance(op, Take):
            ops.append({"take": _thaw(op.count)})
        elif isinstance(op, FlatMap):
            ops.append({"flat_map": {"var": op.var, "pipeline": _chain_json(op.inner)}})
        else:
            ops.append({"zip_with": {"with": _chain_json(op.other), "fn": _fn_json(op.fn, ("x", "y"))}})
    return {"source": s, "ops": ops}


def spec_to_json(spec: PipelineSpec) -> dict:
    out = _chain_json(spec.chain)
    r = spec.reduce
    if isinstance(r, Sum):
        out["reduce"] = "sum"
    elif isinstance(r, FoldCons):
        out["reduce"] = "fold_cons"
    else:
        out["reduce"] = {"fold": {"fn": _fn_json(r.fn, ("acc", "x")), "seed": _thaw(r.seed)}}
    return out


def dump_spec(spec: PipelineSpec) -> str:
    return json.dumps(spec_to_json(spec), indent=2)


# ---------------------------------------------------------------- typing


def expr_type(e, env: dict, path: str = "$") -> Ty:
    """Static type of a spec expression; ``env`` maps variable names to types."""
    if isinstance(e, bool):
        return BOOL
    if isinstance(e, int):
        return INT
    op = e[0]
    kind = EXPR_OPS[op][1]
    if kind == "var":
        if e[1] not in env:
            raise SpecError(f"unbound variable {e[1]!r}", path)
        return env[e[1]]
    if kind == "int":
        return INT
    if kind == "lit":
        return BOOL
    if kind == "none":
        return OptionT(PairT(INT, INT))
    args = [expr_type(a, env, f"{path}[{i + 1}]") for i, a in enumerate(e[1:])]

    def need(ty):
        for i, a in enumerate(args):
            if a != ty:
                raise SpecError(f"{op} expects {show_ty(ty)} operands, got {show_ty(a)}", f"{path}[{i + 1}]")

    if kind == "arith":
        need(INT)
        return INT
    if kind == "cmp":
        need(INT)
        return BOOL
    if kind == "eq":
        if args[0] != args[1]:
            raise SpecError(f"eq compares {show_ty(args[0])} with {show_ty(args[1])}", path)
        return BOOL
    if kind == "bool":
        need(BOOL)
        return BOOL
    if kind == "pair":
        return PairT(args[0], args[1])
    # some_pair
    return OptionT(PairT(args[0], args[1]))


def _value_type(ty: Ty) -> bool:
    return ty == INT or ty == BOOL or (isinstance(ty, PairT) and _value_type(ty.fst) and _value_type(ty.snd))


def _fn_type(fn: Fn, arg_tys: list, env: dict, path: str) -> Ty:
    inner = dict(env)
    inner.update(zip(fn.params, arg_tys))
    return expr_type(fn.body, inner, path)


def _need_int(e, env, path):
    ty = expr_type(e, env, path)
    if ty != INT:
        raise SpecError(f"expected int, got {show_ty(ty)}", path)


def chain_type(c: Chain, env: dict, path: str = "$") -> Ty:
    """Element type of a chain, checking every embedded expression."""
    src = c.source
    p = path + ".source"
    if isinstance(src, OfArr):
        ty = INT
    elif isinstance(src, Iota):
        _need_int(src.start, env, p + ".iota")
        ty = INT
    else:
        _need_int(src.seed, env, p + ".unfold.seed")
        st = _fn_type(src.step, [INT], env, p + ".unfold.step")
        if not (isinstance(st, OptionT) and isinstance(st.elem, PairT) and st.elem.snd == INT):
            raise SpecError(f"unfold step must return option<(a * int)>, got {show_ty(st)}", p + ".unfold.step")
        ty = st.elem.fst
    for i, op in enumerate(c.ops):
        p = f"{path}.ops[{i}]"
        if isinstance(op, Map):
            ty = _fn_type(op.fn, [ty], env, p + ".map")
        elif isinstance(op, Filter):
            t = _fn_type(op.fn, [ty], env, p + ".filter")
            if t != BOOL:
                raise SpecError(f"filter predicate must be bool, got {show_ty(t)}", p + ".filter")
        elif isinstance(op, Take):
            _need_int(op.count, env, p + ".take")
        elif isinstance(op, FlatMap):
            inner = dict(env)
            inner[op.var] = ty
            ty = chain_type(op.inner, inner, p + ".flat_map.pipeline")
        else:
            other = chain_type(op.other, env, p + ".zip_with.with")
            ty = _fn_type(op.fn, [ty, other], env, p + ".zip_with.fn")
        if not _value_type(ty):
            raise SpecError(f"stream elements must be ints, bools or pairs, got {show_ty(ty)}", p)
    return ty


def check_types(spec: PipelineSpec) -> Ty:
    """Check the spec and return the type of its result."""
    ty = chain_type(spec.chain, {})
    r = spec.reduce
    if isinstance(r, Sum):
        if ty != INT:
            raise SpecError(f"sum needs int elements, got {show_ty(ty)}", "$.reduce")
        return INT
    if isinstance(r, FoldCons):
        return ListT(ty)
    seed = expr_type(r.seed, {}, "$.reduce.fold.seed")
    res = _fn_type(r.fn, [seed, ty], {}, "$.reduce.fold.fn")
    if res != seed:
        raise SpecError(f"fold step returns {show_ty(res)} but the seed is {show_ty(seed)}", "$.reduce.fold.fn")
    return seed


# ------------------------------------------------------------ finiteness


def finiteness_problems(spec: PipelineSpec) -> list[str]:
    """Paths of infinite sources with no dominating take."""
    out: list[str] = []

    def visit(c: Chain, guarded: bool, path: str):
        if isinstance(c.source, (Iota, UnfoldSrc)) and not guarded:
            if not any(isinstance(op, Take) for op in c.ops):
                out.append(path + ".source")
        for i, op in enumerate(c.ops):
            later = guarded or any(isinstance(o, Take) for o in c.ops[i + 1:])
            if isinstance(op, FlatMap):
                visit(op.inner, later, f"{path}.ops[{i}].flat_map.pipeline")
            elif isinstance(op, ZipWith):
                visit(op.other, later, f"{path}.ops[{i}].zip_with.with")

    visit(spec.chain, False, "$")
    return out


def array_names(spec: PipelineSpec) -> list[str]:
    """Input arrays in order of first appearance."""
    names: list[str] = []

    def visit(c: Chain):
        if isinstance(c.source, OfArr) and c.source.name not in names:
            names.append(c.source.name)
        for op in c.ops:
            if isinstance(op, FlatMap):
                visit(op.inner)
            elif isinstance(op, ZipWith):
                visit(op.other)

    visit(spec.chain)
    return names


# ------------------------------------------------------------- building


def _staged_ops():
    from . import staged as st
    return {
        "add": st.add, "sub": st.sub, "mul": st.mul, "div": st.div, "mod": st.mod_, "min": st.min_,
        "lt": st.lt, "le": st.le, "eq": st.eq, "gt": st.gt, "ge": st.ge,
        "and": st.and_, "or": st.or_, "not": st.not_,
        "pair": st.pairE, "some_pair": st.somePairE,
    }


def _to_code(e, env: dict, ops: dict):
    from . import staged as st
    if isinstance(e, bool):
        return st.tru() if e else st.fls()
    if isinstance(e, int):
        return st.lit(e)
    op = e[0]
    if op == "var":
        return env[e[1]]
    if op == "int":
        return st.lit(e[1])
    if op == "true":
        return st.tru()
    if op == "false":
        return st.fls()
    if op == "none":
        return st.noneE(PairT(INT, INT))
    return ops[op](*(_to_code(a, env, ops) for a in e[1:]))


def _fn_code(fn: Fn, env: dict, ops: dict):
    def call(*args):
        inner = dict(env)
        inner.update(zip(fn.params, args))
        return _to_code(fn.body, inner, ops)
    return call


def to_pipeline(spec: PipelineSpec, session: Session):
    """The spec's stream as an unreduced :class:`~strymgen.api.Pipeline`."""
    from . import api
    check_types(spec)
    s = session
    ops = _staged_ops()
    arrays = {name: api.arr_param(s, name) for name in array_names(spec)}

    def pipeline(c: Chain, env: dict):
        src = c.source
        if isinstance(src, OfArr):
            p = api.of_arr(s, arrays[src.name])
        elif isinstance(src, Iota):
            p = api.iota(s, _to_code(src.start, env, ops))
        else:
            p = api.unfold(s, _fn_code(src.step, env, ops), _to_code(src.seed, env, ops))
        for op in c.ops:
            if isinstance(op, Map):
                p = api.map(_fn_code(op.fn, env, ops), p)
            elif isinstance(op, Filter):
                p = api.filter(_fn_code(op.fn, env, ops), p)
            elif isinstance(op, Take):
                p = api.take(_to_code(op.count, env, ops), p)
            elif isinstance(op, FlatMap):
                p = api.flat_map(lambda x, op=op: pipeline(op.inner, {**env, op.var: x}), p)
            else:
                p = api.zip_with(_fn_code(op.fn, env, ops), p, pipeline(op.other, env))
        return p

    return pipeline(spec.chain, {})


def reduce_pipeline(spec: PipelineSpec, p) -> Program:
    """Apply the spec's reducer to ``p``."""
    from . import api, staged as st
    r = spec.reduce
    if isinstance(r, Sum):
        return api.fold(st.add, st.lit(0), p)
    if isinstance(r, FoldCons):
        return api.fold(lambda acc, x: st.consE(x, acc), st.nilE(check_types(spec).elem), p)
    ops = _staged_ops()
    return api.fold(_fn_code(r.fn, {}, ops), _to_code(r.seed, {}, ops), p)


def build(spec: PipelineSpec, session: Session | None = None) -> Program:
    """Compile ``spec`` through the public combinators in a fresh session."""
    s = session or Session()
    return reduce_pipeline(spec, to_pipeline(spec, s))
