"""Random generator of well-formed programs used as fault-injection subjects.

Every generated function declares an accumulator, updates it with at least one
assignment, contains a chain of nested ``if`` statements of the requested depth
and returns an arithmetic expression, so each mutation operator has a site in
every function. Calls only go to functions declared earlier, so generated
programs never recurse.
"""
from __future__ import annotations

import random

from sbstdp.minilang import ast, parse_program, print_program

_REL = ast.RELATIONAL_OPS
_ARITH = ("+", "-", "*")


class _FunctionGen:
    def __init__(self, rng: random.Random, index: int, callees: list[ast.Function], depth: int):
        self.rng = rng
        self.index = index
        self.callees = callees
        self.depth = depth
        n_int = rng.randint(1, 3)
        self.params = [ast.Param(f"x{i}", "int") for i in range(n_int)]
        if rng.random() < 0.25:
            self.params.append(ast.Param("flag", "bool"))
        self.ints = [p.name for p in self.params if p.type == "int"]
        self.locals = 0
        self.loops = 0

    def const(self, lo=-10, hi=10) -> ast.IntLit:
        return ast.IntLit(self.rng.randint(lo, hi))

    def atom(self, scope) -> ast.Expr:
        if self.rng.random() < 0.7:
            return ast.Var(self.rng.choice(scope))
        return self.const()

    def arith(self, scope, budget: int = 2) -> ast.Expr:
        rng = self.rng
        if budget <= 0 or rng.random() < 0.3:
            return self.atom(scope)
        if self.callees and rng.random() < 0.15:
            callee = rng.choice(self.callees)
            args = []
            for p in callee.params:
                args.append(ast.BoolLit(rng.random() < 0.5) if p.type == "bool" else self.atom(scope))
            return ast.Call(callee.name, tuple(args))
        if rng.random() < 0.1:
            op = rng.choice(("/", "%"))
            return ast.Binary(op, self.arith(scope, budget - 1), ast.IntLit(rng.choice((2, 3, 4, 5, 7))))
        op = rng.choice(_ARITH)
        rhs = self.const(-5, 5) if op == "*" else self.arith(scope, budget - 1)
        return ast.Binary(op, self.arith(scope, budget - 1), rhs)

    def comparison(self, scope) -> ast.Expr:
        lhs = ast.Var(self.rng.choice(scope))
        rhs = self.const(-20, 20) if self.rng.random() < 0.6 else self.arith(scope, 1)
        return ast.Binary(self.rng.choice(_REL), lhs, rhs)

    def condition(self, scope) -> ast.Expr:
        rng = self.rng
        r = rng.random()
        if "flag" in [p.name for p in self.params] and r < 0.15:
            if rng.random() < 0.5:
                return ast.Var("flag")
            return ast.Binary(rng.choice(("and", "or")), ast.Var("flag"), self.comparison(scope))
        if r < 0.3:
            return ast.Binary(rng.choice(("and", "or")), self.comparison(scope), self.comparison(scope))
        return self.comparison(scope)

    def update(self, scope) -> ast.Stmt:
        return ast.Assign("acc", ast.Binary(self.rng.choice(("+", "-")), ast.Var("acc"), self.arith(scope, 1)))

    def simple(self, scope) -> list:
        rng = self.rng
        r = rng.random()
        if r < 0.45:
            return [self.update(scope)]
        if r < 0.65:
            return [ast.Output(self.arith(scope, 1))]
        name = f"v{self.locals}"
        self.locals += 1
        stmt = ast.Let(name, self.arith(scope, 2))
        scope.append(name)
        return [stmt]

    def block(self, scope, depth_left: int, force_depth: int = 0, size: int = 2) -> tuple:
        rng = self.rng
        scope = list(scope)
        stmts = []
        forced_at = rng.randrange(size + 1) if force_depth > 0 else -1
        for i in range(size + 1):
            if i == forced_at:
                stmts.append(self.if_stmt(scope, force_depth - 1, force_depth - 1))
                continue
            if i == size:
                break
            r = rng.random()
            if depth_left > 0 and r < 0.2:
                stmts.append(self.if_stmt(scope, depth_left - 1, 0))
            elif depth_left > 0 and r < 0.27 and self.loops < 1:
                stmts.extend(self.loop(scope))
            else:
                stmts.extend(self.simple(scope))
        if rng.random() < 0.15:
            stmts.append(ast.Return(self.arith(scope, 1)))
        return tuple(stmts)

    def if_stmt(self, scope, depth_left: int, force_depth: int) -> ast.If:
        rng = self.rng
        cond = self.condition(scope)
        then = self.block(scope, depth_left, force_depth, size=rng.randint(1, 2))
        orelse = None
        if rng.random() < 0.5:
            orelse = self.block(scope, depth_left, 0, size=rng.randint(1, 2))
        return ast.If(cond, then, orelse)

    def loop(self, scope) -> list:
        self.loops += 1
        counter = f"i{self.loops}"
        bound = ast.IntLit(self.rng.randint(2, 4))
        body = [self.update(scope), ast.Assign(counter, ast.Binary("+", ast.Var(counter), ast.IntLit(1)))]
        return [
            ast.Let(counter, ast.IntLit(0)),
            ast.While(ast.Binary("<", ast.Var(counter), bound), tuple(body)),
        ]

    def function(self) -> ast.Function:
        scope = list(self.ints)
        head = [ast.Let("acc", self.arith(scope, 1))]
        scope.append("acc")
        body = list(self.block(scope, self.depth, force_depth=self.depth, size=self.rng.randint(2, 3)))
        if not any(isinstance(s, ast.Assign) for s in ast.walk(ast.Function("_", (), tuple(body)))):
            body.insert(0, self.update(scope))
        body.append(ast.Return(ast.Binary("+", ast.Var("acc"), self.arith(scope, 1))))
        return ast.Function(f"f{self.index}", tuple(self.params), tuple(head + body))


def generate_program(rng: random.Random, n_functions: int, depth: int, name: str = "<generated>") -> ast.Program:
    """A random program of ``n_functions`` functions, each with an if-nesting chain of ``depth``."""
    if n_functions < 1 or depth < 1:
        raise ValueError("need at least one function and nesting depth >= 1")
    functions: list[ast.Function] = []
    for i in range(n_functions):
        functions.append(_FunctionGen(rng, i, list(functions), depth).function())
    # round-trip through the printer so node ids and spans match the canonical text
    return parse_program(print_program(ast.Program(tuple(functions))), name)
