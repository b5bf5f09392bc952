"""Many-objective test generation restricted to predicted-buggy functions.

The loop keeps covered targets in the search, archives every distinct covering
test, admits targets once their control-dependency parent is covered, and
temporarily switches off the side of each predicate whose archive holds more
tests per independent path than its sibling.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from sbstdp.cdg import TargetSpace, collect_targets
from sbstdp.fitness import evaluate_test
from sbstdp.minilang.ast import Program
from sbstdp.search.archive import Archive
from sbstdp.search.operators import SearchParams, generate_offspring, random_test
from sbstdp.search.ranking import preference_sort
from sbstdp.testcase import TestCase

SKIPPED = "skipped"
COMPLETED = "completed"


@dataclass
class SearchResult:
    status: str
    suite: list[TestCase]
    stats: dict = field(default_factory=dict)
    archive: Optional[Archive] = field(default=None, repr=False)

    def to_json(self, program: Program) -> dict:
        return {
            "program": program.source_name,
            "status": self.status,
            "tests": [t.to_json(program) for t in self.suite],
            "stats": self.stats,
        }


def filter_targets(space: TargetSpace, labels: Sequence[int]) -> list[int]:
    """Targets owned by functions labelled buggy."""
    if len(labels) != len(space.program.functions):
        raise ValueError(f"{len(labels)} labels for {len(space.program.functions)} functions")
    return [t.id for t in space.targets if labels[t.owner]]


def initial_targets(u_b, space: TargetSpace) -> set[int]:
    """Targets of ``u_b`` without control dependencies: entries and top-level branch outcomes."""
    return {t for t in u_b if space.targets[t].parent is None}


def update_targets(base: set[int], covered: set[int], space: TargetSpace, u_b) -> set[int]:
    """Add every target of ``u_b`` whose controlling branch outcome is covered. Nothing is removed."""
    targets = space.targets
    out = set(base)
    for t in u_b:
        parent = targets[t].parent
        if parent is None or parent in covered:
            out.add(t)
    return out


def update_archive(evaluated, archive: Archive, u_b) -> Archive:
    """Insert each ``(test, covered_target_ids)`` under every covered target in ``u_b``."""
    u_b = u_b if isinstance(u_b, (set, frozenset)) else set(u_b)
    for test, covered in evaluated:
        for t in sorted(covered):
            if t in u_b:
                archive.add(t, test)
    return archive


def switch_off_targets(base: set[int], archive: Archive, space: TargetSpace,
                       rng: random.Random, functions: Optional[Sequence[int]] = None) -> set[int]:
    """Drop, per predicate, the side with more archived tests per independent path.

    Comparison uses one target drawn at random from each side's phi set. Equal
    ratios keep both sides. The result is for one iteration; ``base`` is not modified.
    """
    active = set(base)
    fids = sorted(space.cdgs) if functions is None else sorted(functions)
    for fid in fids:
        g = space.cdgs[fid]
        paths = space.path_counts[fid]
        for node in g.predicate_nodes():
            out = {e.outcome: e for e in g.outgoing(node.index)}
            e_t, e_f = out[True], out[False]
            u_t = rng.choice(sorted(g.phi[e_t.index]))
            u_f = rng.choice(sorted(g.phi[e_f.index]))
            # |A_T| / l_T  vs  |A_F| / l_F, compared without division
            lhs = archive.size(u_t) * paths[e_f.index]
            rhs = archive.size(u_f) * paths[e_t.index]
            if lhs > rhs:
                active -= g.phi[e_t.index]
            elif lhs < rhs:
                active -= g.phi[e_f.index]
    return active


def select_population(tests: Sequence[TestCase], fitness: Sequence[dict], active, size: int):
    """Preference sorting over the active targets.

    Returns ``(survivors, ranks, crowding)``.
    """
    cols = sorted(active)
    F = np.array([[f[t] for t in cols] for f in fitness], dtype=float).reshape(len(tests), len(cols))
    rows, ranks, crowd = preference_sort(F, [t.size for t in tests], size)
    return [tests[i] for i in rows], ranks, crowd


class _Evaluator:
    """Evaluates tests on the program, memoising by (entry, args); every call counts."""

    def __init__(self, space: TargetSpace, u_b, params: SearchParams):
        self.space = space
        self.u_b = list(u_b)
        self.params = params
        self.cache: dict[tuple, tuple] = {}
        self.count = 0

    def __call__(self, test: TestCase) -> tuple[frozenset, dict]:
        self.count += 1
        key = (test.entry, test.args)
        hit = self.cache.get(key)
        if hit is None:
            outcome, fit = evaluate_test(self.space, test, self.u_b, self.params.limits)
            hit = (frozenset(self.space.ids_of(outcome.trace.covered_targets)), fit)
            self.cache[key] = hit
        return hit


def run_search(program: Program, labels: Sequence[int], budget: int, seed: int,
               params: SearchParams = SearchParams(), space: Optional[TargetSpace] = None) -> SearchResult:
    """Generate a test suite for the functions labelled buggy within ``budget`` evaluations.

    Runs until the budget is spent, even after every target is covered.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    space = space or collect_targets(program)
    u_b = filter_targets(space, labels)
    if not u_b:
        return SearchResult(SKIPPED, [], {"evaluations": 0, "generations": 0, "targets": 0,
                                          "covered_targets": [], "archive_sizes": {}})
    u_b_set = set(u_b)
    entries = sorted({space.targets[t].owner for t in u_b})
    rng = random.Random(seed)
    archive = Archive(params.archive_cap)
    evaluate = _Evaluator(space, u_b, params)
    covered: set[int] = set()
    M = params.population_size

    def evaluate_all(tests):
        results = [evaluate(t) for t in tests]
        update_archive([(t, c) for t, (c, _) in zip(tests, results)], archive, u_b_set)
        for c, _ in results:
            covered.update(c & u_b_set)
        return [f for _, f in results]

    base = initial_targets(u_b, space)
    population = [random_test(program, entries, rng, params) for _ in range(min(M, budget))]
    fitness = evaluate_all(population)
    base = update_targets(base, covered, space, u_b)
    population, ranks, crowd = select_population(population, fitness, base, M)
    fitness = [evaluate.cache[(t.entry, t.args)][1] for t in population]
    generations = 0

    while evaluate.count < budget:
        n = min(M, budget - evaluate.count)
        offspring = generate_offspring(population, ranks, crowd, rng, params, program, entries, n)
        off_fitness = evaluate_all(offspring)
        base = update_targets(base, covered, space, u_b)
        union = population + offspring
        union_fitness = fitness + off_fitness
        active = switch_off_targets(base, archive, space, rng, entries) or base
        population, ranks, crowd = select_population(union, union_fitness, active, M)
        fitness = [evaluate.cache[(t.entry, t.args)][1] for t in population]
        generations += 1

    stats = {
        "evaluations": evaluate.count,
        "generations": generations,
        "targets": len(u_b),
        "covered_targets": sorted(covered),
        "archive_sizes": {str(t): n for t, n in archive.sizes().items()},
    }
    return SearchResult(COMPLETED, archive.suite(), stats, archive)
