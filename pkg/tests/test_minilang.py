import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ABS, nested_source
from trees import random_nesting_program
from sbstdp.minilang import (
    ArityMismatch,
    EmptyProgram,
    Limits,
    ParseError,
    TypeMismatch,
    UnknownCallee,
    derive_covered,
    execute,
    list_functions,
    parse_program,
    print_program,
)
from sbstdp.minilang.ast import Function, Param, predicates, walk_program
from sbstdp.progen import generate_program


def test_abs_parses_to_one_function_with_one_predicate(abs_program):
    assert len(abs_program.functions) == 1
    assert len(predicates(abs_program.functions[0])) == 1


def test_unknown_callee():
    with pytest.raises(UnknownCallee):
        parse_program("fn f(){ return g(); }")


def test_nested_has_three_predicates_and_six_branch_targets(nested):
    preds = predicates(nested.functions[0])
    assert len(preds) == 3
    assert 2 * len(preds) == 6


@pytest.mark.parametrize("src", ["", "   // nothing here\n"])
def test_empty_program(src):
    with pytest.raises(EmptyProgram):
        parse_program(src)


@pytest.mark.parametrize("src, line", [
    ("fn f( { return 1; }", 1),
    ("fn f() {\n  return 1\n}", 3),
    ("fn f() { return x; }", 1),
    ("fn f(a: int, a: int) { return a; }", 1),
    ("fn f() { return 1; }\nfn f() { return 2; }", 2),
    ("fn f(a: int) { return a; }\nfn g() { return f(); }", 2),
])
def test_syntax_and_static_errors_carry_position(src, line):
    with pytest.raises(ParseError) as err:
        parse_program(src)
    assert err.value.line == line


def test_abs_execution(abs_program):
    out = execute(abs_program, 0, [-3])
    assert (out.status, out.value) == ("returned", 3)
    [event] = out.trace.predicate_events
    assert event.outcome is True
    assert (event.lhs, event.rhs) == (-3, 0)


def test_div_zero_trap():
    p = parse_program("fn d(a:int,b:int){ return a/b; }")
    out = execute(p, 0, [1, 0])
    assert out.trap == "div_zero"


def test_step_limit_trap():
    p = parse_program("fn loop(){ while(true){} return 0; }")
    assert execute(p, 0, [], Limits(max_steps=100)).trap == "step_limit"


def test_recursion_limit_trap():
    p = parse_program("fn r(n: int){ return r(n + 1); }")
    assert execute(p, 0, [0], Limits(max_call_depth=10)).trap == "recursion_limit"


def test_traps_keep_outputs_and_trace():
    p = parse_program("fn f(a: int){ output a; if (a > 0) { output 1 / 0; } return 0; }")
    out = execute(p, 0, [5])
    assert out.trap == "div_zero"
    assert out.outputs == (5,)
    assert out.trace.predicate_events[0].outcome is True


def test_bad_arguments():
    p = parse_program("fn f(a: int, b: bool){ return a; }")
    with pytest.raises(ArityMismatch):
        execute(p, 0, [1])
    with pytest.raises(TypeMismatch):
        execute(p, 0, [1, 2])
    with pytest.raises(TypeMismatch):
        execute(p, 0, [True, False])


def test_int64_wrapping_and_truncating_division():
    p = parse_program("""
        fn big(){ return 9223372036854775807 + 1; }
        fn q(a: int, b: int){ output a / b; output a % b; return 0; }
    """)
    assert execute(p, 0, []).value == -(2 ** 63)
    assert execute(p, 1, [-7, 2]).outputs == (-3, -1)
    assert execute(p, 1, [7, -2]).outputs == (-3, 1)


def test_short_circuit_records_only_evaluated_leaves():
    p = parse_program("fn f(a: int, b: int){ if (a > 0 and b > 0) { return 1; } return 0; }")
    ev = execute(p, 0, [-1, 5]).trace.predicate_events[0]
    assert ev.outcome is False
    assert len(ev.leaves) == 1
    ev = execute(p, 0, [1, 5]).trace.predicate_events[0]
    assert ev.outcome is True and len(ev.leaves) == 2


def test_list_functions():
    assert list_functions(parse_program(ABS)) == [(0, "abs", 1, ("int",))]
    two = parse_program(nested_source() + "\nfn other(b: bool) { return 0; }\n")
    assert [f[0] for f in list_functions(two)] == [0, 1]


def test_node_ids_are_preorder_and_unique(nested):
    ids = [n.id for n in walk_program(nested) if not isinstance(n, (Function, Param))]
    assert len(ids) == len(set(ids))
    assert ids == sorted(ids)


def test_loop_events_count_each_condition_evaluation():
    p = parse_program("fn f(n: int){ let i = 0; while (i < n) { i = i + 1; } return i; }")
    out = execute(p, 0, [3])
    assert out.value == 3
    assert [e.outcome for e in out.trace.predicate_events] == [True, True, True, False]


def test_interprocedural_coverage_is_in_the_trace():
    p = parse_program("fn g(a: int){ if (a > 1) { return 1; } return 0; }\nfn f(a: int){ return g(a); }")
    out = execute(p, 1, [5])
    assert out.trace.entered_functions == {0, 1}
    assert ("branch", p.functions[0].body[0].id, True) in out.trace.covered_targets


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6), args=st.lists(st.integers(-100, 100), min_size=4, max_size=4),
       flag=st.booleans())
def test_determinism_and_trace_soundness(seed, args, flag):
    program = generate_program(random.Random(seed), 3, 2)
    for fn in program.functions:
        call = [flag if t == "bool" else args[i] for i, t in enumerate(fn.param_types)]
        a = execute(program, fn.id, call)
        b = execute(program, fn.id, call)
        assert a.canonical() == b.canonical()
        json.loads(a.canonical())
        assert a.trace.covered_targets == derive_covered(a.trace.entered_functions, a.trace.predicate_events)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 4), depth=st.integers(1, 4))
def test_parse_print_roundtrip(seed, n, depth):
    program = generate_program(random.Random(seed), n, depth)
    text = print_program(program)
    again = parse_program(text)
    assert again.functions == program.functions
    assert print_program(again) == text


def test_roundtrip_of_tricky_expressions():
    src = """
    fn f(a: int, b: bool) {
        let x = -(3) - -a - (a - 1) * (2 + a) % 3;
        if (not (a < 1 and b) or not b) {
            output a == (a != 2);
        } else if (a >= -5) {
            x = x / (a - a + 1);
        }
        return x;
    }
    """
    p = parse_program(src)
    assert parse_program(print_program(p)).functions == p.functions


def test_build_program_numbers_like_the_parser():
    for seed in range(10):
        built = random_nesting_program(random.Random(seed), max_depth=4)
        parsed = parse_program(print_program(built))
        assert [(type(n).__name__, n.id) for n in walk_program(built)] == \
            [(type(n).__name__, n.id) for n in walk_program(parsed)]
        assert print_program(built) == print_program(parsed)
