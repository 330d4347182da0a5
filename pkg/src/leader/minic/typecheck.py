"""Static checks that gate execution, lowering, and candidate acceptance.

Scope rules are deliberately strict so later analyses can treat names as
function-unique: locals may not duplicate params, globals, functions, or
built-ins, and labels live at function-body top level only.
"""

from __future__ import annotations

from dataclasses import dataclass

from leader.minic import ast
from leader.minic.parser import Diagnostic


class TypeCheckError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class UnitSymbols:
    globals: dict[str, ast.Type]
    functions: dict[str, tuple[ast.Type, list[ast.Type]]]
    locals: dict[str, dict[str, ast.Type]]  # function -> var -> type (params included)


def unit_symbols(unit: ast.SourceUnit) -> UnitSymbols:
    globals_ = {g.name: g.type for g in unit.globals}
    functions = {
        fn.name: (fn.ret, [t for _, t in fn.params]) for fn in unit.functions
    }
    locals_: dict[str, dict[str, ast.Type]] = {}
    for fn in unit.functions:
        table = {name: typ for name, typ in fn.params}
        for s in ast.function_stmts(fn):
            if isinstance(s, ast.VarDecl):
                table[s.name] = s.type
        locals_[fn.name] = table
    return UnitSymbols(globals_, functions, locals_)


class _Checker:
    def __init__(self, unit: ast.SourceUnit):
        self.unit = unit
        self.diags: list[Diagnostic] = []
        self.globals = {}
        self.functions = {}

    def error(self, message: str, line: int):
        self.diags.append(Diagnostic("error", message, line, 1))

    def run(self) -> list[Diagnostic]:
        seen: set[str] = set(ast.BUILTINS)
        for g in self.unit.globals:
            if g.name in seen or g.name in self.globals:
                self.error(f"duplicate global name {g.name!r}", g.span[0])
            if g.type.kind == "array" and (g.type.length or 0) < 1:
                self.error(f"array {g.name!r} must have positive length", g.span[0])
            self.globals[g.name] = g.type
            seen.add(g.name)
        for fn in self.unit.functions:
            if fn.name in seen or fn.name in self.functions:
                self.error(f"duplicate name {fn.name!r}", fn.span[0])
            self.functions[fn.name] = (fn.ret, [t for _, t in fn.params])
            seen.add(fn.name)
        if "main" not in self.functions:
            self.error("missing function 'main'", 1)
        else:
            ret, params = self.functions["main"]
            if ret.kind != "int" or params:
                self.error("'main' must return int and take no parameters", 1)
        for fn in self.unit.functions:
            self.check_function(fn)
        return self.diags

    # --- per function ---

    def check_function(self, fn: ast.Function):
        self.fn = fn
        self.var_types: dict[str, ast.Type] = {}
        self.labels: set[str] = set()
        self.gotos: list[ast.Goto] = []
        declared: set[str] = set()
        for pname, ptyp in fn.params:
            if pname in declared or pname in self.globals or pname in ast.BUILTINS:
                self.error(f"parameter {pname!r} collides with another name", fn.span[0])
            declared.add(pname)
            self.var_types[pname] = ptyp
        for s in ast.function_stmts(fn):
            if isinstance(s, ast.VarDecl):
                if (
                    s.name in declared
                    or s.name in self.globals
                    or s.name in self.functions
                    or s.name in ast.BUILTINS
                ):
                    self.error(f"duplicate or shadowing name {s.name!r}", s.span[0])
                declared.add(s.name)
                if s.type.kind == "array" and (s.type.length or 0) < 1:
                    self.error(f"array {s.name!r} must have positive length", s.span[0])
                self.var_types[s.name] = s.type
            if isinstance(s, ast.Label):
                if s.name in self.labels:
                    self.error(f"duplicate label {s.name!r}", s.span[0])
                self.labels.add(s.name)
                if s not in fn.body.stmts:
                    self.error(
                        f"label {s.name!r} must be at function-body top level",
                        s.span[0],
                    )
        self.scope: list[set[str]] = [set(p for p, _ in fn.params) | set(self.globals)]
        self.check_block(fn.body, loop_depth=0, switch_depth=0)
        for g in self.gotos:
            if g.label not in self.labels:
                self.error(f"goto target {g.label!r} is not a label", g.span[0])

    def visible(self, name: str) -> bool:
        return any(name in frame for frame in self.scope)

    def check_block(self, block: ast.Block, loop_depth: int, switch_depth: int):
        self.scope.append(set())
        for s in block.stmts:
            self.check_stmt(s, loop_depth, switch_depth)
        self.scope.pop()

    def check_stmt(self, s: ast.Stmt, loop_depth: int, switch_depth: int):
        line = s.span[0]
        if isinstance(s, ast.VarDecl):
            if s.init is not None:
                t = self.expr_type(s.init, line)
                if s.type.kind == "int" and not self.is_int(t):
                    self.error(f"initializer for {s.name!r} must be int", line)
                if s.type.kind == "ptr" and not self.is_ptr_value(s.init, t):
                    self.error(f"initializer for {s.name!r} must be a pointer", line)
            self.scope[-1].add(s.name)
        elif isinstance(s, ast.Assign):
            self.check_assign(s.target, s.value, line)
        elif isinstance(s, ast.ExprStmt):
            self.expr_type(s.expr, line, allow_void=True)
        elif isinstance(s, ast.If):
            self.require_int(s.cond, line, "if condition")
            self.check_block(s.then, loop_depth, switch_depth)
            if s.els is not None:
                self.check_block(s.els, loop_depth, switch_depth)
        elif isinstance(s, ast.While):
            self.require_int(s.cond, line, "while condition")
            self.check_block(s.body, loop_depth + 1, switch_depth)
        elif isinstance(s, ast.For):
            self.check_assign(s.init.target, s.init.value, line)
            self.require_int(s.cond, line, "for condition")
            self.check_assign(s.step.target, s.step.value, line)
            self.check_block(s.body, loop_depth + 1, switch_depth)
        elif isinstance(s, ast.Switch):
            self.require_int(s.expr, line, "switch expression")
            values: set[int | None] = set()
            for child in s.body.stmts:
                if isinstance(child, ast.Case):
                    if child.value in values:
                        what = "default" if child.value is None else f"case {child.value}"
                        self.error(f"duplicate {what} label", child.span[0])
                    values.add(child.value)
            self.scope.append(set())
            for child in s.body.stmts:
                if not isinstance(child, ast.Case):
                    self.check_stmt(child, loop_depth, switch_depth + 1)
            self.scope.pop()
        elif isinstance(s, ast.Case):
            self.error("case label outside switch", line)
        elif isinstance(s, ast.Goto):
            self.gotos.append(s)
        elif isinstance(s, ast.Label):
            pass
        elif isinstance(s, ast.Return):
            if self.fn.ret.kind == "void":
                if s.value is not None:
                    self.error("void function cannot return a value", line)
            else:
                if s.value is None:
                    self.error("non-void function must return a value", line)
                else:
                    self.require_int(s.value, line, "return value")
        elif isinstance(s, ast.Break):
            if loop_depth == 0 and switch_depth == 0:
                self.error("break outside loop or switch", line)
        elif isinstance(s, ast.Continue):
            if loop_depth == 0:
                self.error("continue outside loop", line)
        elif isinstance(s, ast.Null):
            pass
        elif isinstance(s, ast.Block):
            self.check_block(s, loop_depth, switch_depth)
        else:
            raise TypeError(f"unknown stmt {s!r}")

    def check_assign(self, target: ast.Expr, value: ast.Expr, line: int):
        vt = self.expr_type(value, line)
        if isinstance(target, ast.Var):
            t = self.lookup(target.name, line)
            if t is None:
                return
            if t.kind == "array":
                self.error(f"cannot assign to array {target.name!r}", line)
            elif t.kind == "ptr":
                if not self.is_ptr_value(value, vt):
                    self.error(f"pointer {target.name!r} needs a pointer value", line)
            elif not self.is_int(vt):
                self.error(f"variable {target.name!r} needs an int value", line)
        elif isinstance(target, ast.Index):
            self.expr_type(target, line)
            if not self.is_int(vt):
                self.error("array element needs an int value", line)
        elif isinstance(target, ast.Unary) and target.op == "*":
            t = self.expr_type(target.operand, line)
            if t is not None and t.kind != "ptr":
                self.error("can only dereference a pointer", line)
            if not self.is_int(vt):
                self.error("stored value must be int", line)
        else:
            self.error("assignment target is not assignable", line)

    # --- expressions ---

    def lookup(self, name: str, line: int) -> ast.Type | None:
        t = self.var_types.get(name)
        if t is None:
            t = self.globals.get(name)
        if t is None:
            self.error(f"undeclared variable {name!r}", line)
            return None
        if name in self.var_types and not self.visible(name):
            self.error(f"variable {name!r} used before its declaration", line)
        return t

    def is_int(self, t: ast.Type | None) -> bool:
        return t is None or t.kind == "int"

    def is_ptr_value(self, e: ast.Expr, t: ast.Type | None) -> bool:
        if isinstance(e, ast.IntLit) and e.value == 0:
            return True
        return t is None or t.kind == "ptr"

    def require_int(self, e: ast.Expr, line: int, what: str):
        t = self.expr_type(e, line)
        if not self.is_int(t):
            self.error(f"{what} must be int", line)

    def expr_type(
        self, e: ast.Expr, line: int, allow_void: bool = False
    ) -> ast.Type | None:
        if isinstance(e, ast.IntLit):
            return ast.INT
        if isinstance(e, ast.Var):
            t = self.lookup(e.name, line)
            if t is not None and t.kind == "array":
                self.error(f"array {e.name!r} used without an index", line)
                return None
            return t
        if isinstance(e, ast.Index):
            t = self.lookup(e.name, line)
            if t is not None and t.kind != "array":
                self.error(f"{e.name!r} is not an array", line)
            self.require_int(e.index, line, "array index")
            return ast.INT
        if isinstance(e, ast.Unary):
            if e.op == "*":
                t = self.expr_type(e.operand, line)
                if t is not None and t.kind != "ptr":
                    self.error("can only dereference a pointer", line)
                return ast.INT
            if e.op == "&":
                if not isinstance(e.operand, ast.Var):
                    self.error("can only take the address of a variable", line)
                    return ast.PTR
                t = self.lookup(e.operand.name, line)
                if t is not None and t.kind != "int":
                    self.error(
                        f"can only take the address of a scalar int, not {e.operand.name!r}",
                        line,
                    )
                return ast.PTR
            self.require_int(e.operand, line, f"operand of unary {e.op!r}")
            return ast.INT
        if isinstance(e, ast.Binary):
            if e.op in ("==", "!="):
                lt = self.expr_type(e.left, line)
                rt = self.expr_type(e.right, line)
                l_ptr = (lt is not None and lt.kind == "ptr") or _is_null_lit(e.left)
                r_ptr = (rt is not None and rt.kind == "ptr") or _is_null_lit(e.right)
                if l_ptr != r_ptr and not (self.is_int(lt) and self.is_int(rt)):
                    self.error("cannot compare pointer with non-pointer", line)
                return ast.INT
            self.require_int(e.left, line, f"operand of {e.op!r}")
            self.require_int(e.right, line, f"operand of {e.op!r}")
            return ast.INT
        if isinstance(e, ast.Call):
            sig = ast.BUILTINS.get(e.name) or self.functions.get(e.name)
            if sig is None:
                self.error(f"call to undeclared function {e.name!r}", line)
                return None
            ret, param_types = sig
            if len(e.args) != len(param_types):
                self.error(
                    f"{e.name!r} expects {len(param_types)} argument(s), got {len(e.args)}",
                    line,
                )
            for arg, pt in zip(e.args, param_types):
                at = self.expr_type(arg, line)
                if pt.kind == "ptr":
                    if not self.is_ptr_value(arg, at):
                        self.error(f"argument to {e.name!r} must be a pointer", line)
                elif not self.is_int(at):
                    self.error(f"argument to {e.name!r} must be int", line)
            if ret.kind == "void" and not allow_void:
                self.error(f"void result of {e.name!r} used as a value", line)
            return ret
        raise TypeError(f"unknown expr {e!r}")


def _is_null_lit(e: ast.Expr) -> bool:
    return isinstance(e, ast.IntLit) and e.value == 0


def typecheck(unit: ast.SourceUnit) -> list[Diagnostic]:
    """Return all diagnostics for the unit; empty means well-typed."""
    return _Checker(unit).run()


def check_unit(unit: ast.SourceUnit) -> None:
    """Raise TypeCheckError unless the unit is well-typed."""
    diags = typecheck(unit)
    if diags:
        raise TypeCheckError(diags)
