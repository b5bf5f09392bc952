"""Syntax tree for the mini language.

Nodes are frozen dataclasses. Every node carries a node id (assigned in
pre-order over the whole program) and a source span. Spans are excluded from
equality so that structurally identical trees compare equal regardless of
formatting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

RELATIONAL_OPS = ("<", "<=", ">", ">=", "==", "!=")
ARITHMETIC_OPS = ("+", "-", "*", "/", "%")
LOGICAL_OPS = ("and", "or")
PARAM_TYPES = ("int", "bool")


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int
    end_column: int


NO_SPAN = Span(0, 0, 0, 0)


def _span() -> Span:
    return field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Var:
    name: str
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "not"
    operand: "Expr"
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    id: int = -1
    span: Span = _span()


Expr = Union[IntLit, BoolLit, Var, Unary, Binary, Call]


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: Optional[tuple["Stmt", ...]] = None
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Return:
    value: Expr
    id: int = -1
    span: Span = _span()


@dataclass(frozen=True)
class Output:
    value: Expr
    id: int = -1
    span: Span = _span()


Stmt = Union[Let, Assign, If, While, Return, Output]
Predicate = Union[If, While]


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[Param, ...]
    body: tuple[Stmt, ...]
    id: int = -1
    node_id: int = -1
    span: Span = _span()

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(p.type for p in self.params)


@dataclass(frozen=True)
class Program:
    functions: tuple[Function, ...]
    source_name: str = "<memory>"
    # interpreter cache, populated lazily
    _compiled: object = field(default=None, compare=False, repr=False)

    def function(self, name: str) -> Function:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def by_id(self, fid: int) -> Function:
        return self.functions[fid]


def children(node) -> tuple:
    """Direct child nodes of a statement, expression or function, in source order."""
    if isinstance(node, (IntLit, BoolLit, Var)):
        return ()
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, Binary):
        return (node.lhs, node.rhs)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, (Let, Assign, Return, Output)):
        return (node.value,)
    if isinstance(node, If):
        return (node.cond, *node.then, *(node.orelse or ()))
    if isinstance(node, While):
        return (node.cond, *node.body)
    if isinstance(node, Function):
        return node.body
    raise TypeError(f"not a syntax node: {node!r}")


def walk(node):
    """Pre-order traversal."""
    yield node
    for child in children(node):
        yield from walk(child)


def walk_program(program: Program):
    for fn in program.functions:
        yield from walk(fn)


def predicates(fn: Function) -> list[Predicate]:
    return [n for n in walk(fn) if isinstance(n, (If, While))]


def is_relational(expr) -> bool:
    return isinstance(expr, Binary) and expr.op in RELATIONAL_OPS
