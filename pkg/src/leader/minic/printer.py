"""Canonical source printer for MiniC.

One statement per line, two-space indent, minimal parentheses.  Printing
is a pure function of the AST, so two structurally equal units render to
byte-identical text, and parse(print(u)) is structurally equal to u.
"""

from __future__ import annotations

from leader.minic import ast

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PREC = 7


def expr_text(e: ast.Expr) -> str:
    return _expr(e, 0)


def _expr(e: ast.Expr, parent_prec: int) -> str:
    if isinstance(e, ast.IntLit):
        text = str(e.value)
        return f"({text})" if e.value < 0 and parent_prec >= _UNARY_PREC else text
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.Index):
        return f"{e.name}[{_expr(e.index, 0)}]"
    if isinstance(e, ast.Call):
        return e.name + "(" + ", ".join(_expr(a, 0) for a in e.args) + ")"
    if isinstance(e, ast.Unary):
        return e.op + _expr(e.operand, _UNARY_PREC)
    if isinstance(e, ast.Binary):
        prec = _PREC[e.op]
        left = _expr(e.left, prec)
        # parenthesize same-precedence right operands: ops are left-assoc
        right = _expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"unknown expr {e!r}")


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.linemap: dict[int, int] = {}

    def emit(self, indent: int, text: str, stmt: ast.Stmt | None = None):
        self.lines.append("  " * indent + text)
        if stmt is not None and stmt.stmt_id not in self.linemap:
            self.linemap[stmt.stmt_id] = len(self.lines)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _decl_text(d: ast.VarDecl) -> str:
    if d.type.kind == "array":
        return f"int {d.name}[{d.type.length}];"
    star = "*" if d.type.kind == "ptr" else ""
    if d.init is not None:
        return f"int {star}{d.name} = {expr_text(d.init)};"
    return f"int {star}{d.name};"


def _write_stmt(w: _Writer, s: ast.Stmt, indent: int):
    if isinstance(s, ast.VarDecl):
        w.emit(indent, _decl_text(s), s)
    elif isinstance(s, ast.Assign):
        w.emit(indent, f"{expr_text(s.target)} = {expr_text(s.value)};", s)
    elif isinstance(s, ast.ExprStmt):
        w.emit(indent, f"{expr_text(s.expr)};", s)
    elif isinstance(s, ast.Return):
        if s.value is None:
            w.emit(indent, "return;", s)
        else:
            w.emit(indent, f"return {expr_text(s.value)};", s)
    elif isinstance(s, ast.If):
        _write_if(w, s, indent)
    elif isinstance(s, ast.While):
        w.emit(indent, f"while ({expr_text(s.cond)}) {{", s)
        _write_block_body(w, s.body, indent + 1)
        w.emit(indent, "}")
    elif isinstance(s, ast.For):
        head = (
            f"for ({expr_text(s.init.target)} = {expr_text(s.init.value)}; "
            f"{expr_text(s.cond)}; "
            f"{expr_text(s.step.target)} = {expr_text(s.step.value)}) {{"
        )
        w.emit(indent, head, s)
        _write_block_body(w, s.body, indent + 1)
        w.emit(indent, "}")
    elif isinstance(s, ast.Switch):
        w.emit(indent, f"switch ({expr_text(s.expr)}) {{", s)
        for child in s.body.stmts:
            if isinstance(child, ast.Case):
                label = "default:" if child.value is None else f"case {child.value}:"
                w.emit(indent, label, child)
            else:
                _write_stmt(w, child, indent + 1)
        w.emit(indent, "}")
    elif isinstance(s, ast.Case):
        # stray case outside a switch body list; keep line-per-statement form
        label = "default:" if s.value is None else f"case {s.value}:"
        w.emit(indent, label, s)
    elif isinstance(s, ast.Goto):
        w.emit(indent, f"goto {s.label};", s)
    elif isinstance(s, ast.Label):
        w.emit(indent, f"{s.name}:", s)
    elif isinstance(s, ast.Break):
        w.emit(indent, "break;", s)
    elif isinstance(s, ast.Continue):
        w.emit(indent, "continue;", s)
    elif isinstance(s, ast.Null):
        w.emit(indent, ";", s)
    elif isinstance(s, ast.Block):
        w.emit(indent, "{", s)
        _write_block_body(w, s, indent + 1)
        w.emit(indent, "}")
    else:
        raise TypeError(f"unknown stmt {s!r}")


def _write_if(w: _Writer, s: ast.If, indent: int):
    w.emit(indent, f"if ({expr_text(s.cond)}) {{", s)
    _write_block_body(w, s.then, indent + 1)
    els = s.els
    while els is not None:
        if len(els.stmts) == 1 and isinstance(els.stmts[0], ast.If):
            inner = els.stmts[0]
            w.emit(indent, f"}} else if ({expr_text(inner.cond)}) {{", inner)
            _write_block_body(w, inner.then, indent + 1)
            els = inner.els
        else:
            w.emit(indent, "} else {")
            _write_block_body(w, els, indent + 1)
            els = None
            w.emit(indent, "}")
            return
    w.emit(indent, "}")


def _write_block_body(w: _Writer, block: ast.Block, indent: int):
    for child in block.stmts:
        _write_stmt(w, child, indent)


def _write_function(w: _Writer, fn: ast.Function):
    params = ", ".join(
        f"int *{name}" if typ.kind == "ptr" else f"int {name}"
        for name, typ in fn.params
    )
    ret = "void" if fn.ret.kind == "void" else "int"
    w.emit(0, f"{ret} {fn.name}({params}) {{")
    _write_block_body(w, fn.body, 1)
    w.emit(0, "}")


def print_function(fn: ast.Function) -> str:
    w = _Writer()
    _write_function(w, fn)
    return w.text()


def print_function_with_linemap(fn: ast.Function) -> tuple[str, dict[int, int]]:
    """Render a function and return (text, stmt_id -> 1-based header line)."""
    w = _Writer()
    _write_function(w, fn)
    return w.text(), w.linemap


def print_unit(unit: ast.SourceUnit) -> str:
    w = _Writer()
    for g in unit.globals:
        w.emit(0, _decl_text(g), g)
    first = not unit.globals
    for fn in unit.functions:
        if not first:
            w.emit(0, "")
        first = False
        _write_function(w, fn)
    return w.text()


def print_unit_with_linemap(unit: ast.SourceUnit) -> tuple[str, dict[int, int]]:
    w = _Writer()
    for g in unit.globals:
        w.emit(0, _decl_text(g), g)
    first = not unit.globals
    for fn in unit.functions:
        if not first:
            w.emit(0, "")
        first = False
        _write_function(w, fn)
    return w.text(), w.linemap
