"""Recursive-descent parser for ``.mlp`` sources. Grammar: docs/grammar.md."""
from __future__ import annotations

import re
from typing import NamedTuple, Optional

from sbstdp.minilang import ast

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

KEYWORDS = {
    "fn", "let", "if", "else", "while", "return", "output",
    "true", "false", "and", "or", "not", "int", "bool",
}

# matched line by line; anything that is not blank and not a token hits ``bad``
_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//.*)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|[-+*/%<>=(){},;:])
  | (?P<bad>[^ \t\r])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """Malformed source. Carries the 1-based line and column of the offending token."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class EmptyProgram(ParseError):
    pass


class UnknownCallee(ParseError):
    pass


class Token(NamedTuple):
    kind: str  # "int", "name", "kw", "op", "eof"
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    append = tokens.append
    lines = source.split("\n")
    for line, text in enumerate(lines, 1):
        for m in _TOKEN_RE.finditer(text):
            kind = m.lastgroup
            if kind == "comment":
                break
            col = m.start() + 1
            if kind == "bad":
                raise ParseError(line, col, f"unexpected character {m.group()!r}")
            word = m.group()
            if kind == "name" and word in KEYWORDS:
                kind = "kw"
            append(Token(kind, word, line, col))
    tokens.append(Token("eof", "", len(lines), len(lines[-1]) + 1))
    return tokens


# binding power of each binary operator; all are left-associative
_PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _prev_end(self) -> tuple[int, int]:
        t = self.tokens[self.pos - 1]
        return t.line, t.column + len(t.text)

    def _span_from(self, start: Token) -> ast.Span:
        end_line, end_col = self._prev_end()
        return ast.Span(start.line, start.column, end_line, end_col)

    def at(self, *texts: str) -> bool:
        # keyword and operator texts never collide with names, literals or eof
        return self.tokens[self.pos].text in texts

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of input"
            raise ParseError(self.tok.line, self.tok.column, f"expected {text!r}, got {got!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def expect_name(self) -> Token:
        if self.tok.kind != "name":
            got = self.tok.text or "end of input"
            raise ParseError(self.tok.line, self.tok.column, f"expected identifier, got {got!r}")
        tok = self.tok
        self.pos += 1
        return tok

    # grammar
    def program(self) -> list[ast.Function]:
        functions = []
        while self.tok.kind != "eof":
            functions.append(self.function())
        return functions

    def function(self) -> ast.Function:
        start = self.expect("fn")
        name = self.expect_name().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.expect_name()
                self.expect(":")
                if not self.at(*ast.PARAM_TYPES):
                    raise ParseError(self.tok.line, self.tok.column, "expected 'int' or 'bool'")
                params.append(ast.Param(pname.text, self.tok.text))
                self.pos += 1
                if not self.at(","):
                    break
                self.pos += 1
        self.expect(")")
        body = self.block()
        return ast.Function(name, tuple(params), body, span=self._span_from(start))

    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ParseError(self.tok.line, self.tok.column, "unterminated block")
            stmts.append(self.statement())
        self.expect("}")
        return tuple(stmts)

    def statement(self):
        start = self.tok
        word = start.text if start.kind == "kw" else None
        if word == "let":
            self.pos += 1
            name = self.expect_name().text
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return ast.Let(name, value, span=self._span_from(start))
        if word == "if":
            return self.if_stmt()
        if word == "while":
            self.pos += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            body = self.block()
            return ast.While(cond, body, span=self._span_from(start))
        if word == "return":
            self.pos += 1
            value = self.expr()
            self.expect(";")
            return ast.Return(value, span=self._span_from(start))
        if word == "output":
            self.pos += 1
            value = self.expr()
            self.expect(";")
            return ast.Output(value, span=self._span_from(start))
        if self.tok.kind == "name" and self.tokens[self.pos + 1].text == "=":
            name = self.expect_name().text
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return ast.Assign(name, value, span=self._span_from(start))
        got = self.tok.text or "end of input"
        raise ParseError(start.line, start.column, f"expected statement, got {got!r}")

    def if_stmt(self) -> ast.If:
        start = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse = None
        if self.at("else"):
            self.pos += 1
            orelse = (self.if_stmt(),) if self.at("if") else self.block()
        return ast.If(cond, then, orelse, span=self._span_from(start))

    def expr(self, min_prec: int = 1):
        """Precedence climbing over ``_PRECEDENCE``."""
        start = self.tok
        lhs = self.unary()
        tokens = self.tokens
        while True:
            tok = tokens[self.pos]
            prec = _PRECEDENCE.get(tok.text) if tok.kind != "name" else None
            if prec is None or prec < min_prec:
                return lhs
            self.pos += 1
            rhs = self.expr(prec + 1)
            lhs = ast.Binary(tok.text, lhs, rhs, span=self._span_from(start))

    def unary(self):
        start = self.tok
        if self.at("-", "not"):
            op = self.tok.text
            self.pos += 1
            if op == "-" and self.tok.kind == "int":
                value = -int(self.tok.text)
                self.pos += 1
                if value < INT_MIN:
                    raise ParseError(start.line, start.column, "integer literal out of range")
                return ast.IntLit(value, span=self._span_from(start))
            operand = self.unary()
            return ast.Unary(op, operand, span=self._span_from(start))
        return self.primary()

    def primary(self):
        start = self.tok
        if start.kind == "int":
            self.pos += 1
            value = int(start.text)
            if value > INT_MAX:
                raise ParseError(start.line, start.column, "integer literal out of range")
            return ast.IntLit(value, span=self._span_from(start))
        if self.at("true", "false"):
            self.pos += 1
            return ast.BoolLit(start.text == "true", span=self._span_from(start))
        if self.at("("):
            self.pos += 1
            inner = self.expr()
            self.expect(")")
            return inner
        if start.kind == "name":
            self.pos += 1
            if self.at("("):
                self.pos += 1
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.pos += 1
                self.expect(")")
                return ast.Call(start.text, tuple(args), span=self._span_from(start))
            return ast.Var(start.text, span=self._span_from(start))
        got = start.text or "end of input"
        raise ParseError(start.line, start.column, f"expected expression, got {got!r}")


class _Numberer:
    """Assigns node ids in pre-order.

    Works in place: the nodes were just built by the parser and nothing else
    holds them yet, so setting the frozen ``id`` field is safe.
    """

    def __init__(self):
        self.next_id = 0

    def take(self, n) -> None:
        object.__setattr__(n, "id", self.next_id)
        self.next_id += 1

    def function(self, fn: ast.Function, index: int) -> ast.Function:
        object.__setattr__(fn, "node_id", self.next_id)
        object.__setattr__(fn, "id", index)
        self.next_id += 1
        self.block(fn.body)
        return fn

    def block(self, stmts: Optional[tuple]) -> None:
        for s in stmts or ():
            self.node(s)

    def node(self, n) -> None:
        self.take(n)
        if isinstance(n, (ast.IntLit, ast.BoolLit, ast.Var)):
            return
        if isinstance(n, ast.Unary):
            self.node(n.operand)
        elif isinstance(n, ast.Binary):
            self.node(n.lhs)
            self.node(n.rhs)
        elif isinstance(n, ast.Call):
            for a in n.args:
                self.node(a)
        elif isinstance(n, (ast.Let, ast.Assign, ast.Return, ast.Output)):
            self.node(n.value)
        elif isinstance(n, ast.If):
            self.node(n.cond)
            self.block(n.then)
            self.block(n.orelse)
        elif isinstance(n, ast.While):
            self.node(n.cond)
            self.block(n.body)
        else:
            raise TypeError(n)


def _check(functions: list[ast.Function]) -> None:
    """Static checks: unique names, declared variables, known callees with matching arity."""
    arity = {}
    for fn in functions:
        if fn.name in arity:
            raise ParseError(fn.span.line, fn.span.column, f"duplicate function {fn.name!r}")
        arity[fn.name] = fn.arity

    def check_expr(e, scope):
        if isinstance(e, ast.Var):
            if e.name not in scope:
                raise ParseError(e.span.line, e.span.column, f"undeclared variable {e.name!r}")
        elif isinstance(e, ast.Call):
            if e.name not in arity:
                raise UnknownCallee(e.span.line, e.span.column, f"unknown function {e.name!r}")
            if len(e.args) != arity[e.name]:
                raise ParseError(
                    e.span.line, e.span.column,
                    f"{e.name!r} expects {arity[e.name]} arguments, got {len(e.args)}",
                )
        for c in ast.children(e):
            check_expr(c, scope)

    def check_block(stmts, scope):
        scope = set(scope)
        for s in stmts:
            if isinstance(s, ast.Let):
                check_expr(s.value, scope)
                scope.add(s.name)
            elif isinstance(s, ast.Assign):
                if s.name not in scope:
                    raise ParseError(s.span.line, s.span.column, f"assignment to undeclared variable {s.name!r}")
                check_expr(s.value, scope)
            elif isinstance(s, ast.If):
                check_expr(s.cond, scope)
                check_block(s.then, scope)
                if s.orelse is not None:
                    check_block(s.orelse, scope)
            elif isinstance(s, ast.While):
                check_expr(s.cond, scope)
                check_block(s.body, scope)
            else:
                check_expr(s.value, scope)

    for fn in functions:
        names = [p.name for p in fn.params]
        if len(set(names)) != len(names):
            raise ParseError(fn.span.line, fn.span.column, f"duplicate parameter in {fn.name!r}")
        check_block(fn.body, names)


def parse_program(source: str, source_name: str = "<memory>") -> ast.Program:
    """Parse ``source`` into a Program with dense function ids and pre-order node ids."""
    if not source.strip():
        raise EmptyProgram(1, 1, "empty source")
    return build_program(_Parser(source).program(), source_name)


def build_program(functions, source_name: str = "<built>") -> ast.Program:
    """Check and number freshly constructed functions, as parsing would.

    Ids are written into the given nodes, so they must not be shared with
    another program.
    """
    functions = list(functions)
    if not functions:
        raise EmptyProgram(1, 1, "no function declared")
    _check(functions)
    numberer = _Numberer()
    numbered = tuple(numberer.function(fn, i) for i, fn in enumerate(functions))
    return ast.Program(numbered, source_name)


def list_functions(program: ast.Program) -> list[tuple[int, str, int, tuple[str, ...]]]:
    return [(fn.id, fn.name, fn.arity, fn.param_types) for fn in program.functions]
