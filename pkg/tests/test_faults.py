import difflib
import json
import random

import pytest

from conftest import ABS, ABS_OUT
from sbstdp.faults import (
    CorpusInvalid,
    CorpusParams,
    FaultedPair,
    FaultSpec,
    InsufficientFunctions,
    NoCompatibleSite,
    check_detectable,
    gen_corpus,
    inject,
    load_corpus,
    manifest,
    stratum_sizes,
    write_corpus,
)
from sbstdp.minilang import execute, parse_program, print_program
from sbstdp.minilang.ast import walk_program
from sbstdp.progen import generate_program

THREE = """
fn a(x: int) { return x + 1; }
fn b(x: int) { let y = 2; return x * y; }
fn c(x: int) { output 7; return x - 3; }
"""


def sweep_differs(pair, lo=-100, hi=100) -> bool:
    """Exhaustive oracle for one-int-parameter programs."""
    for fn in pair.fixed.functions:
        for x in range(lo, hi + 1):
            if execute(pair.buggy, fn.id, [x]).observable() != execute(pair.fixed, fn.id, [x]).observable():
                return True
    return False


def ror_abs(source):
    fixed = parse_program(source)
    pair = inject(fixed, FaultSpec("ROR", 1), 0)
    return pair


def test_abs_ror():
    pair = ror_abs(ABS)
    assert pair.ground_truth == (1,)
    assert "x < 0" in print_program(pair.fixed)
    assert "x <= 0" in print_program(pair.buggy)
    assert pair.mutation_sites[0].detail == "<-><="


def test_three_functions_two_sites():
    pair = inject(parse_program(THREE), FaultSpec("constant_perturbation", 2), 5)
    assert sum(pair.ground_truth) == 2
    assert len({s.function for s in pair.mutation_sites}) == 2


def test_errors():
    with pytest.raises(NoCompatibleSite):
        inject(parse_program(THREE), FaultSpec("ROR", 1), 0)
    with pytest.raises(InsufficientFunctions):
        inject(parse_program(ABS), FaultSpec("ROR", 2), 0)
    with pytest.raises(ValueError):
        FaultSpec("ROR", 0)


def test_identical_pair_is_never_detectable():
    p = parse_program(ABS)
    pair = FaultedPair(p, p, (0,), [])
    for samples in (1, 100, 5000):
        assert not check_detectable(pair, samples, 3)


def test_abs_boundary_mutant_is_equivalent():
    # -0 == 0, so `x <= 0` and `x < 0` return the same value everywhere
    pair = ror_abs(ABS)
    assert not sweep_differs(pair)
    assert not check_detectable(pair, 10_000, 0)


def test_abs_boundary_mutant_with_observable_branch():
    pair = ror_abs(ABS_OUT)
    assert sweep_differs(pair)
    assert check_detectable(pair, 10_000, 0)


def test_mutation_in_unreachable_branch():
    src = "fn f(x: int) { if (false) { return x + 1; } return x; }"
    pair = inject(parse_program(src), FaultSpec("AOR", 1), 0)
    assert not sweep_differs(pair)
    assert not check_detectable(pair, 10_000, 0)


def test_empty_corpus():
    assert gen_corpus(CorpusParams(n_programs=0), 1) == []


def test_single_site_corpus():
    pairs = gen_corpus(CorpusParams(n_programs=8, samples=2000), 4)
    assert len(pairs) == 8
    assert all(sum(p.ground_truth) == 1 for p in pairs)
    assert all(check_detectable(p, 2000, 99) for p in pairs)


def test_mixed_corpus_stratification():
    params = CorpusParams(n_programs=9, site_counts={1: 1, 2: 1, 3: 1}, samples=2000)
    pairs = gen_corpus(params, 8)
    man = manifest(pairs, params, 8)
    recount = {}
    for entry in man["pairs"]:
        recount[str(entry["site_count"])] = recount.get(str(entry["site_count"]), 0) + 1
    assert man["stratification"] == dict(sorted(recount.items()))
    assert [p.site_count for p in pairs] == [e["site_count"] for e in man["pairs"]]


def test_stratified_corpus_has_exact_strata():
    params = CorpusParams(n_programs=6, site_counts={1: 1, 3: 1}, samples=2000, stratify=True)
    assert stratum_sizes(params) == {1: 3, 3: 3}
    pairs = gen_corpus(params, 2)
    assert [p.site_count for p in pairs] == [1, 1, 1, 3, 3, 3]
    assert stratum_sizes(CorpusParams(n_programs=7, site_counts={1: 2, 2: 1})) == {1: 5, 2: 2}


def test_seed_determinism():
    params = CorpusParams(n_programs=4, samples=1000)
    a, b = gen_corpus(params, 21), gen_corpus(params, 21)
    assert manifest(a, params, 21) == manifest(b, params, 21)
    assert [print_program(p.buggy) for p in a] == [print_program(p.buggy) for p in b]


@pytest.mark.parametrize("operator", ["ROR", "AOR", "constant_perturbation", "condition_negation",
                                      "assignment_deletion"])
@pytest.mark.parametrize("seed", range(8))
def test_single_delta_and_label_soundness(operator, seed):
    rng = random.Random(seed)
    fixed = parse_program(print_program(generate_program(rng, 4, 2)))
    try:
        pair = inject(fixed, FaultSpec(operator, 2), rng)
    except (NoCompatibleSite, InsufficientFunctions):
        pytest.skip("operator not applicable to this program")
    spans = {n.id: n.span for n in walk_program(fixed) if hasattr(n, "span") and hasattr(n, "id")}
    allowed = set()
    for s in pair.mutation_sites:
        sp = spans[s.node]
        allowed.update(range(sp.line, sp.end_line + 1))
    a = print_program(pair.fixed).splitlines()
    b = print_program(pair.buggy).splitlines()
    for tag, i1, i2, _, _ in difflib.SequenceMatcher(None, a, b).get_opcodes():
        if tag != "equal":
            assert set(range(i1 + 1, i2 + 1)) <= allowed
    recomputed = tuple(1 if any(s.function == i for s in pair.mutation_sites) else 0
                       for i in range(len(fixed.functions)))
    assert recomputed == pair.ground_truth
    assert [f.name for f in pair.fixed.functions] == [f.name for f in pair.buggy.functions]


def test_corpus_roundtrip_and_validation(tmp_path):
    params = CorpusParams(n_programs=3, samples=1000)
    pairs = gen_corpus(params, 6)
    write_corpus(tmp_path, pairs, params, 6)
    loaded, man = load_corpus(tmp_path)
    assert [print_program(p.buggy) for p in loaded] == [print_program(p.buggy) for p in pairs]
    assert [p.ground_truth for p in loaded] == [p.ground_truth for p in pairs]
    truth = tmp_path / "p1" / "truth.json"
    data = json.loads(truth.read_text())
    data["ground_truth"] = [1 - x for x in data["ground_truth"]]
    truth.write_text(json.dumps(data))
    with pytest.raises(CorpusInvalid):
        load_corpus(tmp_path)


def test_missing_manifest(tmp_path):
    with pytest.raises(CorpusInvalid):
        load_corpus(tmp_path)
