import random

import pytest

from sbstdp.cdg import Cdg, CdgEdge, CdgNode, CyclicGraph, build_cdg, collect_targets, independent_paths
from sbstdp.minilang import parse_program
from sbstdp.minilang.ast import predicates
from trees import enumerate_paths, random_nesting_program, syntax_path_counts


def nested_edges(fn, g):
    a, b, d = [p.id for p in predicates(fn)]
    return {
        "b1": g.branch_edge(a, True), "b2": g.branch_edge(a, False),
        "b3": g.branch_edge(b, True), "b4": g.branch_edge(b, False),
        "b5": g.branch_edge(d, True), "b6": g.branch_edge(d, False),
    }


def test_straight_line_function():
    p = parse_program("fn f(a: int){ let b = a + 1; output b; return b; }")
    g = build_cdg(p.functions[0])
    assert g.predicate_nodes() == []
    space = collect_targets(p)
    assert [t.kind for t in space.targets] == ["entry"]


def test_nested_structure(nested):
    fn = nested.functions[0]
    g = build_cdg(fn)
    assert len(g.predicate_nodes()) == 3
    e = nested_edges(fn, g)
    # b3 and b4 hang off the head of b1, b5 and b6 off the head of b3
    assert e["b3"].src == e["b4"].src == e["b1"].dst
    assert e["b5"].src == e["b6"].src == e["b3"].dst
    space = collect_targets(nested)
    t = {x.key: x for x in space.targets}
    a, b, _ = [p.id for p in predicates(fn)]
    b1 = t[("branch", a, True)].id
    assert t[("branch", b, True)].parent == b1
    assert t[("branch", b, False)].parent == b1


def test_nested_path_counts(nested):
    fn = nested.functions[0]
    g = build_cdg(fn)
    counts = independent_paths(g)
    named = {k: counts[e.index] for k, e in nested_edges(fn, g).items()}
    assert named == {"b1": 3, "b3": 2, "b4": 1, "b2": 1, "b5": 1, "b6": 1}


def test_if_inside_while_hangs_off_the_loop_true_edge():
    p = parse_program("""
        fn f(n: int) {
            let i = 0;
            while (i < n) {
                if (i == 2) { output i; }
                i = i + 1;
            }
            return i;
        }
    """)
    space = collect_targets(p)
    loop, inner = predicates(p.functions[0])
    by_key = {t.key: t for t in space.targets}
    loop_true = by_key[("branch", loop.id, True)].id
    assert by_key[("branch", inner.id, True)].parent == loop_true
    assert by_key[("branch", inner.id, False)].parent == loop_true
    g = space.cdgs[0]
    assert g.branch_edge(inner.id, True).src == g.branch_edge(loop.id, True).dst


def test_single_edge_graph_counts_one():
    g = Cdg(0, [CdgNode(0, "entry"), CdgNode(1, "region")], [CdgEdge(0, 0, 1, None)], {0: frozenset()})
    assert independent_paths(g) == {0: 1}


def test_cycle_is_rejected():
    nodes = [CdgNode(0, "entry"), CdgNode(1, "predicate", 5), CdgNode(2, "region")]
    edges = [CdgEdge(0, 0, 1, None), CdgEdge(1, 1, 2, True), CdgEdge(2, 2, 1, None)]
    with pytest.raises(CyclicGraph):
        independent_paths(Cdg(0, nodes, edges, {}))


def test_target_counting():
    p = parse_program("""
        fn f(a: int){ if (a > 0) { return 1; } return 0; }
        fn g(a: int){ while (a > 0) { a = a - 1; } return a; }
    """)
    assert len(collect_targets(p).targets) == 6
    assert [t.kind for t in collect_targets(parse_program("fn f(){ return 0; }\nfn g(){ return 1; }")).targets] \
        == ["entry", "entry"]


def test_nested_has_seven_targets(nested):
    space = collect_targets(nested)
    assert len(space.targets) == 7
    assert [t.id for t in space.targets] == list(range(7))


def test_target_ids_are_dense_program_wide():
    program = random_nesting_program(random.Random(3))
    space = collect_targets(program)
    assert [t.id for t in space.targets] == list(range(len(space.targets)))
    assert len(space.key_to_id) == len(space.targets)


@pytest.mark.parametrize("seed", range(40))
def test_path_counts_match_brute_force(seed):
    program = random_nesting_program(random.Random(seed), max_depth=5)
    fn = program.functions[0]
    g = build_cdg(fn)
    counts = independent_paths(g)
    for e in g.edges:
        assert counts[e.index] == len(set(enumerate_paths(g, e)))
    syntax = syntax_path_counts(fn)
    for (stmt, outcome), n in syntax.items():
        assert counts[g.branch_edge(stmt, outcome).index] == n


@pytest.mark.parametrize("seed", range(20))
def test_conservation_and_phi_partition(seed):
    program = random_nesting_program(random.Random(1000 + seed))
    space = collect_targets(program)
    g = space.cdgs[0]
    counts = space.path_counts[0]
    for n in g.nodes:
        out = g.outgoing(n.index)
        incoming = [e for e in g.edges if e.dst == n.index]
        if out:
            for e in incoming:
                assert counts[e.index] == sum(counts[x.index] for x in out)
    seen = []
    for e in g.edges:
        seen.extend(g.phi[e.index])
    entries = [t.id for t in space.targets if t.kind == "entry"]
    assert sorted(seen + entries) == [t.id for t in space.targets]
    # every branch target except top level has exactly one parent, which is a branch outcome
    for t in space.targets:
        if t.kind == "branch" and t.parent is not None:
            assert space.targets[t.parent].kind == "branch"


def test_top_level_targets_have_no_parent(nested):
    space = collect_targets(nested)
    roots = {t.id for t in space.targets if t.parent is None}
    a = predicates(nested.functions[0])[0].id
    assert roots == {0, space.key_to_id[("branch", a, True)], space.key_to_id[("branch", a, False)]}


def test_dot_dump(nested):
    dot = build_cdg(nested.functions[0]).to_dot("nested")
    assert dot.startswith("digraph nested {")
    assert dot.count("->") == 7
