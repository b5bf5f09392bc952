"""Random nesting trees and brute-force path oracles shared by the CDG tests."""
import random

from sbstdp.minilang import ast, build_program


def random_nesting_program(rng: random.Random, max_depth: int = 6, max_width: int = 3) -> ast.Program:
    """One function whose body is a random tree of if / if-else / while statements."""

    def block(depth):
        stmts = [ast.Assign("acc", ast.Binary("+", ast.Var("acc"), ast.IntLit(1)))]
        if depth >= max_depth:
            return tuple(stmts)
        for _ in range(rng.randint(0, max_width)):
            r = rng.random()
            cond = ast.Binary(rng.choice(["<", ">", "=="]), ast.Var("x"), ast.IntLit(rng.randint(-5, 5)))
            if r < 0.4:
                stmts.append(ast.If(cond, block(depth + 1)))
            elif r < 0.8:
                stmts.append(ast.If(cond, block(depth + 1), block(depth + 1)))
            else:
                stmts.append(ast.While(ast.Binary("<", ast.Var("acc"), ast.IntLit(0)), block(depth + 1)))
        return tuple(stmts)

    body = (ast.Let("acc", ast.IntLit(0)),) + block(0) + (ast.Return(ast.Var("acc")),)
    fn = ast.Function("tree", (ast.Param("x", "int"),), body)
    return build_program([fn])


def syntax_path_counts(fn: ast.Function) -> dict:
    """Independent paths per (predicate id, outcome), computed from the syntax tree alone."""
    out = {}

    def region(stmts) -> int:
        preds = [s for s in stmts or () if isinstance(s, (ast.If, ast.While))]
        if not preds:
            return 1
        return sum(visit(p) for p in preds)

    def visit(p) -> int:
        then = p.then if isinstance(p, ast.If) else p.body
        orelse = p.orelse if isinstance(p, ast.If) else ()
        out[(p.id, True)] = region(then)
        out[(p.id, False)] = region(orelse)
        return out[(p.id, True)] + out[(p.id, False)]

    for s in fn.body:
        if isinstance(s, (ast.If, ast.While)):
            visit(s)
    return out


def enumerate_paths(cdg, edge) -> list:
    """Every maximal edge sequence starting at ``edge``, listed explicitly."""
    out = cdg.outgoing(edge.dst)
    if not out:
        return [(edge.index,)]
    return [(edge.index,) + rest for e in out for rest in enumerate_paths(cdg, e)]
