"""Deterministic, instrumented execution.

Programs are compiled once into nested closures (cached on the Program) and then
run per call. Integers are 64-bit two's complement with wrapping; division and
modulo truncate toward zero and trap on a zero divisor. Traps never escape
:func:`execute`; they are reported in the returned :class:`ExecOutcome`.
"""
from __future__ import annotations

import json
import operator
import sys
from dataclasses import dataclass
from typing import NamedTuple, Optional

from sbstdp.minilang import ast

MASK64 = (1 << 64) - 1
INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1

DEFAULT_MAX_STEPS = 10_000
DEFAULT_MAX_CALL_DEPTH = 64

TRAP_KINDS = ("div_zero", "step_limit", "recursion_limit")

if sys.getrecursionlimit() < 5000:
    sys.setrecursionlimit(5000)


@dataclass(frozen=True)
class Limits:
    max_steps: int = DEFAULT_MAX_STEPS
    max_call_depth: int = DEFAULT_MAX_CALL_DEPTH

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_call_depth <= 0:
            raise ValueError("limits must be positive")


DEFAULT_LIMITS = Limits()


class InvalidArguments(ValueError):
    pass


class ArityMismatch(InvalidArguments):
    pass


class TypeMismatch(InvalidArguments):
    pass


class PredicateEvent(NamedTuple):
    """One evaluation of an ``if``/``while`` condition.

    For a single comparison ``lhs``/``rhs`` are its operands. For a plain boolean
    condition ``lhs`` is the value and ``rhs`` is None. For conditions built with
    ``and``/``or``/``not``, both are None and ``leaves`` lists
    ``(leaf_node_id, a, b)`` for every atomic operand actually evaluated.
    """

    node: int
    lhs: object
    rhs: object
    outcome: bool
    leaves: Optional[tuple] = None


def entry_key(fid: int) -> tuple:
    return ("entry", fid)


def branch_key(node: int, outcome: bool) -> tuple:
    return ("branch", node, outcome)


def derive_covered(entered, events) -> frozenset:
    covered = {entry_key(f) for f in entered}
    covered.update(branch_key(e.node, e.outcome) for e in events)
    return frozenset(covered)


@dataclass(frozen=True)
class ExecTrace:
    entered_functions: frozenset
    predicate_events: tuple
    covered_targets: frozenset  # entry_key / branch_key tuples


@dataclass(frozen=True)
class ExecOutcome:
    status: str  # "returned" or "trap"
    value: object  # return value, or the trap kind
    outputs: tuple
    trace: ExecTrace

    @property
    def trap(self) -> Optional[str]:
        return self.value if self.status == "trap" else None

    def observable(self) -> tuple:
        """Behaviour compared between program versions; the trace is not part of it."""
        return (self.status, _canon(self.value), tuple(_canon(v) for v in self.outputs))

    def canonical(self) -> str:
        t = self.trace
        return json.dumps(
            {
                "observable": self.observable(),
                "entered": sorted(t.entered_functions),
                "events": [[e.node, _canon(e.lhs), _canon(e.rhs), e.outcome,
                            None if e.leaves is None else [list(map(_canon, x)) for x in e.leaves]]
                           for e in t.predicate_events],
                "covered": sorted(map(list, t.covered_targets)),
            },
            sort_keys=True,
        )


def _canon(v):
    if isinstance(v, bool):
        return {"bool": v}
    return v


class _Trap(Exception):
    def __init__(self, kind: str):
        self.kind = kind


def wrap(v: int) -> int:
    if INT_MIN <= v <= INT_MAX:
        return v
    return ((v - INT_MIN) & MASK64) + INT_MIN


def trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise _Trap("div_zero")
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _div(a, b):
    return wrap(trunc_div(a, b))


def _mod(a, b):
    return wrap(a - b * trunc_div(a, b))


def _add(a, b):
    return wrap(a + b)


def _sub(a, b):
    return wrap(a - b)


def _mul(a, b):
    return wrap(a * b)


ARITH = {"+": _add, "-": _sub, "*": _mul, "/": _div, "%": _mod}
COMPARE = {
    "<": operator.lt, "<=": operator.le, ">": operator.gt,
    ">=": operator.ge, "==": operator.eq, "!=": operator.ne,
}


class _Ctx:
    __slots__ = ("steps", "max_steps", "depth", "max_depth", "outputs", "events", "entered")

    def __init__(self, limits: Limits):
        self.steps = 0
        self.max_steps = limits.max_steps
        self.depth = 0
        self.max_depth = limits.max_call_depth
        self.outputs = []
        self.events = []
        self.entered = set()


def _is_compound(e) -> bool:
    return (isinstance(e, ast.Binary) and e.op in ast.LOGICAL_OPS) or (
        isinstance(e, ast.Unary) and e.op == "not"
    )


class _Compiler:
    def __init__(self, program: ast.Program):
        self.program = program
        self.index = {fn.name: fn.id for fn in program.functions}
        self.bodies: list = [None] * len(program.functions)
        self.param_names = [tuple(p.name for p in fn.params) for fn in program.functions]

    def compile(self):
        for fn in self.program.functions:
            self.bodies[fn.id] = self.block(fn.body)
        return self.invoke

    def invoke(self, fid: int, values, ctx: _Ctx):
        ctx.depth += 1
        if ctx.depth > ctx.max_depth:
            raise _Trap("recursion_limit")
        ctx.entered.add(fid)
        env = dict(zip(self.param_names[fid], values))
        r = self.bodies[fid](env, ctx)
        ctx.depth -= 1
        return 0 if r is None else r[0]

    # statements return None to continue or a 1-tuple carrying a return value
    def block(self, stmts):
        compiled = tuple(self.stmt(s) for s in stmts)

        def run(env, ctx):
            for s in compiled:
                r = s(env, ctx)
                if r is not None:
                    return r
            return None

        return run

    def stmt(self, s):
        if isinstance(s, (ast.Let, ast.Assign)):
            name, value = s.name, self.expr(s.value)

            def run(env, ctx):
                ctx.steps += 1
                if ctx.steps > ctx.max_steps:
                    raise _Trap("step_limit")
                env[name] = value(env, ctx)

            return run
        if isinstance(s, ast.Return):
            value = self.expr(s.value)

            def run(env, ctx):
                ctx.steps += 1
                if ctx.steps > ctx.max_steps:
                    raise _Trap("step_limit")
                return (value(env, ctx),)

            return run
        if isinstance(s, ast.Output):
            value = self.expr(s.value)

            def run(env, ctx):
                ctx.steps += 1
                if ctx.steps > ctx.max_steps:
                    raise _Trap("step_limit")
                ctx.outputs.append(value(env, ctx))

            return run
        if isinstance(s, ast.If):
            cond = self.condition(s)
            then = self.block(s.then)
            orelse = self.block(s.orelse) if s.orelse is not None else None

            def run(env, ctx):
                ctx.steps += 1
                if ctx.steps > ctx.max_steps:
                    raise _Trap("step_limit")
                if cond(env, ctx):
                    return then(env, ctx)
                if orelse is not None:
                    return orelse(env, ctx)
                return None

            return run
        if isinstance(s, ast.While):
            cond = self.condition(s)
            body = self.block(s.body)

            def run(env, ctx):
                while True:
                    ctx.steps += 1
                    if ctx.steps > ctx.max_steps:
                        raise _Trap("step_limit")
                    if not cond(env, ctx):
                        return None
                    r = body(env, ctx)
                    if r is not None:
                        return r

            return run
        raise TypeError(s)

    def condition(self, pred):
        """Compile an if/while condition so that each evaluation records one event."""
        e, nid = pred.cond, pred.id
        if ast.is_relational(e):
            lhs, rhs, cmp = self.expr(e.lhs), self.expr(e.rhs), COMPARE[e.op]

            def cond(env, ctx):
                a = lhs(env, ctx)
                b = rhs(env, ctx)
                out = cmp(a, b)
                ctx.events.append(PredicateEvent(nid, a, b, out))
                return out

            return cond
        if _is_compound(e):
            rec_eval = self.recording(e)

            def cond(env, ctx):
                rec = []
                out = rec_eval(env, ctx, rec)
                ctx.events.append(PredicateEvent(nid, None, None, out, tuple(rec)))
                return out

            return cond
        value = self.expr(e)

        def cond(env, ctx):
            v = value(env, ctx)
            out = bool(v)
            ctx.events.append(PredicateEvent(nid, v, None, out))
            return out

        return cond

    def recording(self, e):
        """Short-circuit evaluator that logs the atomic operands it evaluates."""
        if isinstance(e, ast.Binary) and e.op == "and":
            p, q = self.recording(e.lhs), self.recording(e.rhs)
            return lambda env, ctx, rec: p(env, ctx, rec) and q(env, ctx, rec)
        if isinstance(e, ast.Binary) and e.op == "or":
            p, q = self.recording(e.lhs), self.recording(e.rhs)
            return lambda env, ctx, rec: p(env, ctx, rec) or q(env, ctx, rec)
        if isinstance(e, ast.Unary) and e.op == "not":
            p = self.recording(e.operand)
            return lambda env, ctx, rec: not p(env, ctx, rec)
        nid = e.id
        if ast.is_relational(e):
            lhs, rhs, cmp = self.expr(e.lhs), self.expr(e.rhs), COMPARE[e.op]

            def leaf(env, ctx, rec):
                a = lhs(env, ctx)
                b = rhs(env, ctx)
                rec.append((nid, a, b))
                return cmp(a, b)

            return leaf
        value = self.expr(e)

        def leaf(env, ctx, rec):
            v = value(env, ctx)
            rec.append((nid, v, None))
            return bool(v)

        return leaf

    def expr(self, e):
        if isinstance(e, (ast.IntLit, ast.BoolLit)):
            v = e.value
            return lambda env, ctx: v
        if isinstance(e, ast.Var):
            name = e.name
            return lambda env, ctx: env[name]
        if isinstance(e, ast.Unary):
            p = self.expr(e.operand)
            if e.op == "not":
                return lambda env, ctx: not p(env, ctx)
            return lambda env, ctx: wrap(-p(env, ctx))
        if isinstance(e, ast.Binary):
            p, q = self.expr(e.lhs), self.expr(e.rhs)
            if e.op == "and":
                return lambda env, ctx: bool(p(env, ctx)) and bool(q(env, ctx))
            if e.op == "or":
                return lambda env, ctx: bool(p(env, ctx)) or bool(q(env, ctx))
            f = ARITH.get(e.op) or COMPARE[e.op]
            return lambda env, ctx: f(p(env, ctx), q(env, ctx))
        if isinstance(e, ast.Call):
            fid = self.index[e.name]
            args = tuple(self.expr(a) for a in e.args)
            invoke = self.invoke
            return lambda env, ctx: invoke(fid, [a(env, ctx) for a in args], ctx)
        raise TypeError(e)


def _compiled(program: ast.Program):
    invoke = program._compiled
    if invoke is None:
        invoke = _Compiler(program).compile()
        object.__setattr__(program, "_compiled", invoke)
    return invoke


def check_args(program: ast.Program, entry: int, args) -> None:
    fn = program.functions[entry]
    if len(args) != fn.arity:
        raise ArityMismatch(f"{fn.name} expects {fn.arity} arguments, got {len(args)}")
    for p, v in zip(fn.params, args):
        ok = type(v) is bool if p.type == "bool" else (type(v) is int and INT_MIN <= v <= INT_MAX)
        if not ok:
            raise TypeMismatch(f"{fn.name}: parameter {p.name} expects {p.type}, got {v!r}")


def execute(program: ast.Program, entry: int, args, limits: Limits = DEFAULT_LIMITS) -> ExecOutcome:
    """Call function ``entry`` with ``args`` and return the observed behaviour and trace."""
    if not 0 <= entry < len(program.functions):
        raise ArityMismatch(f"no function with id {entry}")
    check_args(program, entry, args)
    invoke = _compiled(program)
    ctx = _Ctx(limits)
    try:
        status, value = "returned", invoke(entry, list(args), ctx)
    except _Trap as t:
        status, value = "trap", t.kind
    events = tuple(ctx.events)
    entered = frozenset(ctx.entered)
    trace = ExecTrace(entered, events, derive_covered(entered, events))
    return ExecOutcome(status, value, tuple(ctx.outputs), trace)
