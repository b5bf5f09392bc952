"""Canonical pretty-printer. ``parse_program(print_program(p))`` is structurally equal to ``p``."""
from __future__ import annotations

from sbstdp.minilang import ast

_PREC = {
    "or": 1, "and": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7
_ATOM_PREC = 8


def _prec(e) -> int:
    if isinstance(e, ast.Binary):
        return _PREC[e.op]
    if isinstance(e, ast.Unary):
        return _UNARY_PREC
    if isinstance(e, ast.IntLit) and e.value < 0:
        return _UNARY_PREC
    return _ATOM_PREC


def print_expr(e) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.Call):
        return f"{e.name}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, ast.Unary):
        inner = print_expr(e.operand)
        # "- -3" must not fold into a literal, and "--" is not a token
        if _prec(e.operand) < _ATOM_PREC or isinstance(e.operand, ast.IntLit):
            inner = f"({inner})"
        return f"not {inner}" if e.op == "not" else f"-{inner}"
    if isinstance(e, ast.Binary):
        p = _PREC[e.op]
        lhs = print_expr(e.lhs)
        rhs = print_expr(e.rhs)
        if _prec(e.lhs) < p:
            lhs = f"({lhs})"
        if _prec(e.rhs) <= p:
            rhs = f"({rhs})"
        return f"{lhs} {e.op} {rhs}"
    raise TypeError(e)


def _block(stmts, indent: int, out: list[str]) -> None:
    for s in stmts:
        _stmt(s, indent, out)


def _stmt(s, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    if isinstance(s, ast.Let):
        out.append(f"{pad}let {s.name} = {print_expr(s.value)};")
    elif isinstance(s, ast.Assign):
        out.append(f"{pad}{s.name} = {print_expr(s.value)};")
    elif isinstance(s, ast.Return):
        out.append(f"{pad}return {print_expr(s.value)};")
    elif isinstance(s, ast.Output):
        out.append(f"{pad}output {print_expr(s.value)};")
    elif isinstance(s, ast.If):
        out.append(f"{pad}if ({print_expr(s.cond)}) {{")
        _block(s.then, indent + 1, out)
        if s.orelse is not None:
            out.append(f"{pad}}} else {{")
            _block(s.orelse, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, ast.While):
        out.append(f"{pad}while ({print_expr(s.cond)}) {{")
        _block(s.body, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(s)


def print_function(fn: ast.Function) -> str:
    params = ", ".join(f"{p.name}: {p.type}" for p in fn.params)
    out = [f"fn {fn.name}({params}) {{"]
    _block(fn.body, 1, out)
    out.append("}")
    return "\n".join(out)


def print_program(program: ast.Program) -> str:
    return "\n\n".join(print_function(fn) for fn in program.functions) + "\n"
