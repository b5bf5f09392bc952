"""Per-target fitness: approach level plus normalised branch distance.

Lower is better and 0 means covered. The branch distance table (K = 1) is
documented in docs/grammar.md.
"""
from __future__ import annotations

from sbstdp import cdg as cdg_mod
from sbstdp.minilang import ast
from sbstdp.minilang.interp import (
    DEFAULT_LIMITS,
    ExecOutcome,
    ExecTrace,
    InvalidArguments,
    Limits,
    execute,
)
from sbstdp.testcase import TestCase

K = 1
# fitness used when the owning function was entered but no predicate on the
# target's control-dependency chain was evaluated
_UNREACHED_DISTANCE = 0.5


class UnsupportedOperator(ValueError):
    pass


class InvalidTest(ValueError):
    pass


def branch_distance(op: str, lhs, rhs, desired: bool) -> int:
    """Distance of ``lhs op rhs`` from evaluating to ``desired``; 0 iff it already does."""
    a, b = lhs, rhs
    if op == "<":
        if desired:
            return 0 if a < b else a - b + K
        return 0 if a >= b else b - a
    if op == "<=":
        if desired:
            return 0 if a <= b else a - b
        return 0 if a > b else b - a + K
    if op == ">":
        if desired:
            return 0 if a > b else b - a + K
        return 0 if a <= b else a - b
    if op == ">=":
        if desired:
            return 0 if a >= b else b - a
        return 0 if a < b else a - b + K
    if op == "==":
        if desired:
            return abs(a - b)
        return K if a == b else 0
    if op == "!=":
        if desired:
            return K if a == b else 0
        return abs(a - b)
    raise UnsupportedOperator(op)


def normalize(d: float) -> float:
    if d < 0:
        raise ValueError("distance must be non-negative")
    return d / (d + 1.0)


def _compound_distance(e, leaves: dict, desired: bool) -> int:
    if isinstance(e, ast.Binary) and e.op == "and":
        if desired:
            return _compound_distance(e.lhs, leaves, True) + _compound_distance(e.rhs, leaves, True)
        return min(_compound_distance(e.lhs, leaves, False), _compound_distance(e.rhs, leaves, False))
    if isinstance(e, ast.Binary) and e.op == "or":
        if desired:
            return min(_compound_distance(e.lhs, leaves, True), _compound_distance(e.rhs, leaves, True))
        return _compound_distance(e.lhs, leaves, False) + _compound_distance(e.rhs, leaves, False)
    if isinstance(e, ast.Unary) and e.op == "not":
        return _compound_distance(e.operand, leaves, not desired)
    if e.id not in leaves:
        return K  # operand skipped by short-circuit evaluation
    a, b = leaves[e.id]
    if ast.is_relational(e):
        return branch_distance(e.op, a, b, desired)
    return 0 if bool(a) == desired else K


def event_distance(cond, event, desired: bool) -> int:
    """Branch distance of one recorded predicate evaluation towards ``desired``."""
    if event.leaves is not None:
        return _compound_distance(cond, {nid: (a, b) for nid, a, b in event.leaves}, desired)
    if ast.is_relational(cond):
        return branch_distance(cond.op, event.lhs, event.rhs, desired)
    return 0 if event.outcome == desired else K


def node_distances(trace: ExecTrace, conditions: dict) -> dict[int, list]:
    """Minimum branch distance per predicate node, as ``[to_true, to_false]``."""
    best: dict[int, list] = {}
    for ev in trace.predicate_events:
        cond = conditions[ev.node]
        dt = 0 if ev.outcome else event_distance(cond, ev, True)
        df = event_distance(cond, ev, False) if ev.outcome else 0
        cur = best.get(ev.node)
        if cur is None:
            best[ev.node] = [dt, df]
        else:
            if dt < cur[0]:
                cur[0] = dt
            if df < cur[1]:
                cur[1] = df
    return best


def target_fitness(trace: ExecTrace, target: cdg_mod.CoverageTarget, space: cdg_mod.TargetSpace,
                   distances: dict | None = None) -> float:
    """Approach level plus normalised branch distance at the divergence predicate.

    A target in a function that was never entered gets ``depth + 1``.
    """
    if target.key in trace.covered_targets:
        return 0.0
    if target.owner not in trace.entered_functions:
        return float(target.depth + 1)
    if distances is None:
        distances = node_distances(trace, space.conditions)
    chain = target.chain
    for j in range(len(chain) - 1, -1, -1):
        node, outcome = chain[j]
        d = distances.get(node)
        if d is not None:
            approach = len(chain) - 1 - j
            return approach + normalize(d[0] if outcome else d[1])
    return len(chain) + _UNREACHED_DISTANCE


def fitness_vector(trace: ExecTrace, space: cdg_mod.TargetSpace, target_ids) -> dict[int, float]:
    distances = node_distances(trace, space.conditions)
    targets = space.targets
    return {t: target_fitness(trace, targets[t], space, distances) for t in target_ids}


def evaluate_test(space: cdg_mod.TargetSpace, test: TestCase, target_ids=None,
                  limits: Limits = DEFAULT_LIMITS) -> tuple[ExecOutcome, dict[int, float]]:
    """Execute ``test`` on the space's program and score it on ``target_ids`` (default: all)."""
    try:
        outcome = execute(space.program, test.entry, test.args, limits)
    except InvalidArguments as exc:
        raise InvalidTest(str(exc)) from exc
    if target_ids is None:
        target_ids = range(len(space.targets))
    return outcome, fitness_vector(outcome.trace, space, target_ids)
