import random

import numpy as np

from conftest import ABS
from sbstdp.cdg import collect_targets
from sbstdp.fitness import evaluate_test
from sbstdp.minilang import execute, parse_program
from sbstdp.minilang.ast import predicates
from sbstdp.search import (
    COMPLETED,
    SKIPPED,
    Archive,
    SearchParams,
    filter_targets,
    generate_offspring,
    initial_targets,
    mutate,
    random_test,
    run_search,
    select_population,
    switch_off_targets,
    update_archive,
    update_targets,
)
from sbstdp.search.ranking import crowding_distance, non_dominated_fronts, preference_sort
from sbstdp.testcase import TestCase

TWO = """
fn f0(a: int) { if (a > 3) { return 1; } return 0; }
fn f1(a: int, b: int) { if (a == b) { if (a > 10) { return 2; } } return 0; }
"""


def nested_ids(space, program):
    a, b, d = predicates(program.functions[0])
    k = space.key_to_id
    return {
        "entry": 0,
        "b1": k[("branch", a.id, True)], "b2": k[("branch", a.id, False)],
        "b3": k[("branch", b.id, True)], "b4": k[("branch", b.id, False)],
        "b5": k[("branch", d.id, True)], "b6": k[("branch", d.id, False)],
    }


def fill(archive, target, n, entry=0):
    for i in range(n):
        archive.add(target, TestCase(entry, (i, target, 0)))


def test_filter_targets():
    program = parse_program(TWO)
    space = collect_targets(program)
    assert filter_targets(space, [1, 1]) == [t.id for t in space.targets]
    assert filter_targets(space, [0, 0]) == []
    assert filter_targets(space, [0, 1]) == [t.id for t in space.targets if t.owner == 1]


def test_initial_targets(nested):
    space = collect_targets(nested)
    ids = nested_ids(space, nested)
    u_b = filter_targets(space, [1])
    assert initial_targets(u_b, space) == {ids["entry"], ids["b1"], ids["b2"]}
    branchless = collect_targets(parse_program("fn f(a: int){ return a; }"))
    assert initial_targets(filter_targets(branchless, [1]), branchless) == {0}
    assert initial_targets([], space) == set()


def test_update_targets(nested):
    space = collect_targets(nested)
    ids = nested_ids(space, nested)
    u_b = filter_targets(space, [1])
    base = initial_targets(u_b, space)
    assert update_targets(base, set(), space, u_b) == base
    grown = update_targets(base, {ids["b1"]}, space, u_b)
    assert grown == base | {ids["b3"], ids["b4"]}
    # covered targets stay
    assert base <= update_targets(grown, {ids["b1"], ids["b2"]}, space, u_b)


def test_update_targets_respects_filter():
    program = parse_program(TWO)
    space = collect_targets(program)
    u_b = filter_targets(space, [1, 0])
    inner = predicates(program.functions[1])
    covered = {space.key_to_id[("branch", inner[0].id, True)]}
    assert update_targets(initial_targets(u_b, space), covered, space, u_b) <= set(u_b)


def test_update_archive():
    a = Archive()
    t = TestCase(0, (1, 2, 3))
    update_archive([(t, {1, 3})], a, {1, 3, 5})
    assert a.size(1) == a.size(3) == 1
    update_archive([(TestCase(0, (1, 2, 3), "mutation"), {1})], a, {1, 3, 5})
    assert a.size(1) == 1
    update_archive([(TestCase(0, (9, 9, 9)), {7})], a, {1, 3, 5})
    assert a.targets() == [1, 3]


def test_archive_cap_is_fifo():
    a = Archive(cap=2)
    for i in range(4):
        a.add(0, TestCase(0, (i,)))
    assert [t.args for t in a.tests(0)] == [(2,), (3,)]


def test_switch_off_30_vs_20(nested):
    space = collect_targets(nested)
    ids = nested_ids(space, nested)
    base = set(ids.values())
    archive = Archive()
    fill(archive, ids["b1"], 30)
    fill(archive, ids["b2"], 20)
    active = switch_off_targets(base, archive, space, random.Random(0))
    assert ids["b2"] not in active
    assert ids["b1"] in active
    assert base == set(ids.values())


def test_switch_off_equal_ratios_keep_both(nested):
    space = collect_targets(nested)
    ids = nested_ids(space, nested)
    base = set(ids.values())
    archive = Archive()
    fill(archive, ids["b1"], 30)
    fill(archive, ids["b2"], 10)
    fill(archive, ids["b3"], 8)
    fill(archive, ids["b4"], 4)
    fill(archive, ids["b5"], 5)
    fill(archive, ids["b6"], 5)
    assert switch_off_targets(base, archive, space, random.Random(0)) == base


def test_switch_off_with_empty_archive(nested):
    space = collect_targets(nested)
    base = set(range(7))
    assert switch_off_targets(base, Archive(), space, random.Random(1)) == base


def test_offspring_are_clones_without_variation():
    program = parse_program(TWO)
    rng = random.Random(0)
    params = SearchParams(crossover_rate=0.0, mutation_rate=0.0)
    pop = [random_test(program, [0, 1], rng, params) for _ in range(10)]
    kids = generate_offspring(pop, [0] * 10, [0.0] * 10, rng, params, program, [0, 1])
    assert len(kids) == 10
    assert all(k in pop for k in kids)


def test_offspring_are_seed_deterministic():
    program = parse_program(TWO)
    params = SearchParams()

    def make(seed):
        rng = random.Random(seed)
        pop = [random_test(program, [0, 1], rng, params) for _ in range(50)]
        return generate_offspring(pop, list(range(50)), [1.0] * 50, rng, params, program, [0, 1])

    assert make(5) == make(5)
    assert len(make(5)) == 50


def test_reassignment_repairs_arity():
    program = parse_program(TWO)
    params = SearchParams(reassign_rate=1.0)
    rng = random.Random(3)
    for _ in range(50):
        child = mutate(TestCase(0, (5,)), program, [0, 1], rng, params)
        assert len(child.args) == program.functions[child.entry].arity


def test_mutation_stays_in_domain():
    program = parse_program("fn f(a: int, b: bool){ return a; }")
    params = SearchParams(mutation_rate=1.0, mutation_sigma=500)
    rng = random.Random(0)
    t = TestCase(0, (100, True))
    for _ in range(100):
        t = mutate(t, program, [0], rng, params)
        assert -100 <= t.args[0] <= 100 and isinstance(t.args[1], bool)


def test_select_single_target_keeps_unique_minimizer():
    tests = [TestCase(0, (i,)) for i in range(60)]
    fitness = [{0: 1.0 + i / 100} for i in range(60)]
    fitness[37] = {0: 0.5}
    survivors, ranks, _ = select_population(tests, fitness, {0}, 50)
    assert tests[37] in survivors
    assert ranks[survivors.index(tests[37])] == 0


def test_select_identical_tests_keeps_size():
    tests = [TestCase(0, (1,))] * 80
    survivors, _, _ = select_population(tests, [{0: 0.3, 1: 0.2}] * 80, {0, 1}, 50)
    assert len(survivors) == 50


def test_select_two_minimizers_survive():
    tests = [TestCase(0, (i,)) for i in range(100)]
    fitness = [{0: 0.9, 1: 0.9} for _ in range(100)]
    fitness[10] = {0: 0.1, 1: 0.95}
    fitness[90] = {0: 0.95, 1: 0.1}
    survivors, _, _ = select_population(tests, fitness, {0, 1}, 50)
    assert tests[10] in survivors and tests[90] in survivors


def test_rank0_tie_breaks_on_size_then_index():
    F = np.array([[0.2], [0.2], [0.2]])
    rows, ranks, _ = preference_sort(F, [3, 1, 1], 1)
    assert rows == [1] and ranks == [0]


def test_non_dominated_fronts_and_crowding():
    F = np.array([[0, 1], [1, 0], [1, 1], [2, 2], [0.5, 0.5]])
    assert non_dominated_fronts(F) == [[0, 1, 4], [2], [3]]
    cd = crowding_distance(F[[0, 1, 4]])
    assert np.isinf(cd[0]) and np.isinf(cd[1]) and np.isfinite(cd[2])


def test_all_zero_classification_is_skipped(abs_program):
    result = run_search(abs_program, [0], 1000, 1)
    assert result.status == SKIPPED
    assert result.suite == []


def test_abs_search_covers_everything_with_many_tests():
    program = parse_program(ABS)
    result = run_search(program, [1], 5000, 11)
    assert result.status == COMPLETED
    assert result.stats["evaluations"] == 5000
    space = collect_targets(program)
    covered = set()
    per_target = {t: 0 for t in range(3)}
    for test in result.suite:
        ids = space.ids_of(execute(program, test.entry, test.args).trace.covered_targets)
        covered |= ids
        for t in ids:
            per_target[t] += 1
    assert covered == {0, 1, 2}
    assert all(n > 1 for n in per_target.values())


def test_search_is_deterministic():
    program = parse_program(TWO)
    a = run_search(program, [1, 1], 3000, 5)
    b = run_search(program, [1, 1], 3000, 5)
    assert a.suite == b.suite
    assert a.to_json(program) == b.to_json(program)


def test_archive_soundness_and_subset_chain():
    program = parse_program(TWO)
    result = run_search(program, [0, 1], 4000, 2)
    space = collect_targets(program)
    u_b = set(filter_targets(space, [0, 1]))
    assert set(result.archive.targets()) <= u_b
    for t in result.archive.targets():
        for test in result.archive.tests(t):
            trace = execute(program, test.entry, test.args).trace
            assert t in space.ids_of(trace.covered_targets)
    # entries are limited to predicted functions
    assert {t.entry for t in result.suite} == {1}


def test_budget_is_spent_exactly_for_odd_budgets():
    program = parse_program(TWO)
    for budget in (1, 49, 77, 1234):
        assert run_search(program, [1, 0], budget, 0).stats["evaluations"] == budget


def test_evaluate_entry_fitness_for_interprocedural_call():
    program = parse_program("fn g(a: int){ if (a > 1) { return 1; } return 0; }\nfn f(a: int){ return g(a); }")
    space = collect_targets(program)
    _, fit = evaluate_test(space, TestCase(1, (5,)))
    assert fit[0] == 0.0 and fit[1] == 0.0
