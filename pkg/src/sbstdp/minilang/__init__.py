"""A small imperative language whose functions act as the methods under test."""
from sbstdp.minilang.ast import Function, Program
from sbstdp.minilang.interp import (
    DEFAULT_LIMITS,
    ArityMismatch,
    ExecOutcome,
    ExecTrace,
    InvalidArguments,
    Limits,
    PredicateEvent,
    TypeMismatch,
    branch_key,
    derive_covered,
    entry_key,
    execute,
)
from sbstdp.minilang.parser import (
    EmptyProgram,
    ParseError,
    UnknownCallee,
    build_program,
    list_functions,
    parse_program,
)
from sbstdp.minilang.printer import print_program

__all__ = [
    "DEFAULT_LIMITS", "ArityMismatch", "EmptyProgram", "ExecOutcome", "ExecTrace", "Function",
    "InvalidArguments", "Limits", "ParseError", "PredicateEvent", "Program", "TypeMismatch",
    "UnknownCallee", "branch_key", "build_program", "derive_covered", "entry_key", "execute", "list_functions",
    "parse_program", "print_program",
]
