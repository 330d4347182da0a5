"""AST-walking reference evaluator.

An independent implementation of MiniC semantics used as the oracle for
the IR interpreter: it never touches the lowering or the IR, walks the
source tree directly, and records the same statement-entry events
(visits) that instrument coverage and the step budget in the IR engine.
"""

from __future__ import annotations

import sys

from leader.minic import ast
from leader.runtime.testcase import (
    CALL_DEPTH_LIMIT,
    DEFAULT_STEP_BUDGET,
    NORMAL,
    STEP_LIMIT,
    TRAP,
    ExecResult,
)


class _RefPoison:
    __slots__ = ()


R_POISON = _RefPoison()


class _Stop(Exception):
    def __init__(self, termination: str, trap: str | None = None):
        self.termination = termination
        self.trap = trap


class _BreakSignal(Exception):
    pass


class _ContinueSignal(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class _GotoSignal(Exception):
    def __init__(self, label: str):
        self.label = label


class _Env:
    __slots__ = ("eid", "vars", "arrays")

    def __init__(self, eid: int):
        self.eid = eid
        self.vars: dict = {}
        self.arrays: dict = {}


def _div_toward_zero(a: int, b: int) -> int:
    q = a // b
    if q < 0 and q * b != a:
        q += 1
    return q


class _Evaluator:
    def __init__(self, unit: ast.SourceUnit, argv, stdin: bytes, budget: int):
        self.unit = unit
        self.argv = [a.encode("utf-8") for a in argv]
        self.stdin = stdin
        self.stdin_pos = 0
        self.out = bytearray()
        self.budget = budget
        self.steps = 0
        self.visited: list[int] = []
        self.envs: dict[int, _Env] = {}
        self.next_eid = 0
        self.depth = 0
        self.gvars: dict = {}
        self.garrays: dict = {}
        self.fns = {fn.name: fn for fn in unit.functions}
        for g in unit.globals:
            if g.type.kind == "array":
                self.garrays[g.name] = [0] * (g.type.length or 0)
            else:
                self.gvars[g.name] = g.init.value if isinstance(g.init, ast.IntLit) else 0

    # --- plumbing ---

    def trap(self, kind: str):
        raise _Stop(TRAP, kind)

    def visit(self, stmt: ast.Stmt):
        if self.steps >= self.budget:
            raise _Stop(STEP_LIMIT)
        self.steps += 1
        self.visited.append(stmt.stmt_id)

    def run(self) -> ExecResult:
        try:
            code = self.call("main", [])
        except _Stop as stop:
            return ExecResult(
                bytes(self.out), None, stop.termination, stop.trap, self.steps
            )
        return ExecResult(bytes(self.out), code, NORMAL, None, self.steps)

    def call(self, name: str, args: list):
        if self.depth >= CALL_DEPTH_LIMIT:
            raise _Stop(STEP_LIMIT)
        fn = self.fns[name]
        env = _Env(self.next_eid)
        self.next_eid += 1
        self.envs[env.eid] = env
        for s in ast.function_stmts(fn):
            if isinstance(s, ast.VarDecl):
                if s.type.kind == "array":
                    env.arrays[s.name] = [R_POISON] * (s.type.length or 0)
                else:
                    env.vars[s.name] = R_POISON
        for (pname, _), value in zip(fn.params, args):
            env.vars[pname] = value
        self.depth += 1
        try:
            value = self.exec_body(fn, env)
        finally:
            self.depth -= 1
            del self.envs[env.eid]
        return value

    def exec_body(self, fn: ast.Function, env: _Env):
        stmts = fn.body.stmts
        label_index = {
            s.name: i for i, s in enumerate(stmts) if isinstance(s, ast.Label)
        }
        i = 0
        while i < len(stmts):
            try:
                self.exec_stmt(stmts[i], env)
            except _GotoSignal as g:
                i = label_index[g.label]
                continue
            except _ReturnSignal as r:
                return r.value
            i += 1
        # fell off the end of the body
        if fn.ret.kind != "void":
            self.trap("UninitRead")
        return None

    def exec_block(self, block: ast.Block, env: _Env):
        for s in block.stmts:
            self.exec_stmt(s, env)

    # --- statements ---

    def exec_stmt(self, s: ast.Stmt, env: _Env):
        if isinstance(s, ast.Block):
            self.exec_block(s, env)
            return
        if isinstance(s, ast.While):
            self.exec_while(s, env)
            return
        if isinstance(s, ast.For):
            self.exec_for(s, env)
            return
        if isinstance(s, ast.Switch):
            self.exec_switch(s, env)
            return
        self.visit(s)
        if isinstance(s, ast.VarDecl):
            if s.init is not None:
                self.assign_var(env, s.name, self.eval(s.init, env))
        elif isinstance(s, ast.Assign):
            self.exec_assign(s.target, s.value, env)
        elif isinstance(s, ast.ExprStmt):
            self.eval(s.expr, env, allow_void=True)
        elif isinstance(s, ast.If):
            c = self.eval(s.cond, env)
            if c is R_POISON:
                self.trap("UninitRead")
            if c != 0:
                self.exec_block(s.then, env)
            elif s.els is not None:
                self.exec_block(s.els, env)
        elif isinstance(s, ast.Goto):
            raise _GotoSignal(s.label)
        elif isinstance(s, (ast.Label, ast.Null, ast.Case)):
            pass
        elif isinstance(s, ast.Return):
            value = None
            if s.value is not None:
                value = self.eval(s.value, env)
                if value is R_POISON:
                    self.trap("UninitRead")
            raise _ReturnSignal(value)
        elif isinstance(s, ast.Break):
            raise _BreakSignal()
        elif isinstance(s, ast.Continue):
            raise _ContinueSignal()
        else:
            raise TypeError(f"unknown stmt {s!r}")

    def exec_while(self, s: ast.While, env: _Env):
        while True:
            self.visit(s)
            c = self.eval(s.cond, env)
            if c is R_POISON:
                self.trap("UninitRead")
            if c == 0:
                return
            try:
                self.exec_block(s.body, env)
            except _BreakSignal:
                return
            except _ContinueSignal:
                pass

    def exec_for(self, s: ast.For, env: _Env):
        self.visit(s)  # entry event: the init clause
        self.exec_assign(s.init.target, s.init.value, env)
        while True:
            self.visit(s)  # one event per condition evaluation
            c = self.eval(s.cond, env)
            if c is R_POISON:
                self.trap("UninitRead")
            if c == 0:
                return
            try:
                self.exec_block(s.body, env)
            except _BreakSignal:
                return
            except _ContinueSignal:
                pass
            self.exec_assign(s.step.target, s.step.value, env)

    def exec_switch(self, s: ast.Switch, env: _Env):
        self.visit(s)
        scrutinee = self.eval(s.expr, env)
        items = s.body.stmts
        start = None
        for idx, item in enumerate(items):
            if isinstance(item, ast.Case) and item.value is not None:
                self.visit(item)  # the dispatch test for this label
                if scrutinee is R_POISON:
                    self.trap("UninitRead")
                if scrutinee == item.value:
                    start = idx + 1  # continue after the matched label
                    break
        if start is None:
            for idx, item in enumerate(items):
                if isinstance(item, ast.Case) and item.value is None:
                    start = idx  # land on the default label itself
                    break
        if start is None:
            return
        i = start
        try:
            while i < len(items):
                self.exec_stmt(items[i], env)
                i += 1
        except _BreakSignal:
            return

    def exec_assign(self, target: ast.Expr, value: ast.Expr, env: _Env):
        if isinstance(target, ast.Var):
            self.assign_var(env, target.name, self.eval(value, env))
        elif isinstance(target, ast.Index):
            idx = self.eval(target.index, env)
            v = self.eval(value, env)
            arr = self.array_of(env, target.name)
            if idx is R_POISON:
                self.trap("UninitRead")
            if not (0 <= idx < len(arr)):
                self.trap("OutOfBounds")
            arr[idx] = v
        elif isinstance(target, ast.Unary) and target.op == "*":
            p = self.eval(target.operand, env)
            v = self.eval(value, env)
            self.store_through(p, v)
        else:
            raise TypeError(f"bad assignment target {target!r}")

    # --- storage ---

    def assign_var(self, env: _Env, name: str, value):
        if name in env.vars:
            env.vars[name] = value
        else:
            self.gvars[name] = value

    def read_var(self, env: _Env, name: str):
        if name in env.vars:
            return env.vars[name]
        return self.gvars[name]

    def array_of(self, env: _Env, name: str) -> list:
        if name in env.arrays:
            return env.arrays[name]
        return self.garrays[name]

    def addr_of(self, env: _Env, name: str):
        if name in env.vars:
            return ("l", env.eid, name)
        return ("g", name)

    def load_through(self, p):
        if p is R_POISON:
            self.trap("UninitRead")
        if not isinstance(p, tuple):  # null literal 0 stays an int
            self.trap("NullDeref")
        if p[0] == "g":
            return self.gvars[p[1]]
        return self.envs[p[1]].vars[p[2]]

    def store_through(self, p, value):
        if p is R_POISON:
            self.trap("UninitRead")
        if not isinstance(p, tuple):
            self.trap("NullDeref")
        if p[0] == "g":
            self.gvars[p[1]] = value
        else:
            self.envs[p[1]].vars[p[2]] = value

    # --- expressions ---

    def eval(self, e: ast.Expr, env: _Env, allow_void: bool = False):
        if isinstance(e, ast.IntLit):
            return e.value
        if isinstance(e, ast.Var):
            return self.read_var(env, e.name)
        if isinstance(e, ast.Index):
            idx = self.eval(e.index, env)
            arr = self.array_of(env, e.name)
            if idx is R_POISON:
                self.trap("UninitRead")
            if not (0 <= idx < len(arr)):
                self.trap("OutOfBounds")
            return arr[idx]
        if isinstance(e, ast.Unary):
            if e.op == "*":
                return self.load_through(self.eval(e.operand, env))
            if e.op == "&":
                assert isinstance(e.operand, ast.Var)
                return self.addr_of(env, e.operand.name)
            v = self.eval(e.operand, env)
            if v is R_POISON:
                return R_POISON
            return -v if e.op == "-" else int(v == 0)
        if isinstance(e, ast.Binary):
            return self.eval_binary(e, env)
        if isinstance(e, ast.Call):
            return self.eval_call(e, env)
        raise TypeError(f"unknown expr {e!r}")

    def eval_binary(self, e: ast.Binary, env: _Env):
        if e.op in ("&&", "||"):
            left = self.eval(e.left, env)
            if left is R_POISON:
                self.trap("UninitRead")  # short-circuit branches on the value
            if e.op == "&&" and left == 0:
                return 0
            if e.op == "||" and left != 0:
                return 1
            right = self.eval(e.right, env)
            if right is R_POISON:
                return R_POISON
            return int(right != 0)
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if e.op in ("/", "%"):
            if b is R_POISON:
                return R_POISON
            if b == 0:
                self.trap("DivByZero")
            if a is R_POISON:
                return R_POISON
            d = _div_toward_zero(a, b)
            return d if e.op == "/" else a - d * b
        if a is R_POISON or b is R_POISON:
            return R_POISON
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "==":
            return int(a == b)
        if e.op == "!=":
            return int(a != b)
        if e.op == "<":
            return int(a < b)
        if e.op == "<=":
            return int(a <= b)
        if e.op == ">":
            return int(a > b)
        if e.op == ">=":
            return int(a >= b)
        raise TypeError(f"unknown op {e.op!r}")

    def eval_call(self, e: ast.Call, env: _Env):
        args = [self.eval(a, env) for a in e.args]
        name = e.name
        if name == "print":
            v = args[0]
            if v is R_POISON:
                self.trap("UninitRead")
            self.out.extend(str(v).encode("ascii"))
            self.out.append(10)
            return 0
        if name == "putc":
            v = args[0]
            if v is R_POISON:
                self.trap("UninitRead")
            self.out.append(v % 256)
            return 0
        if name == "argc":
            return len(self.argv)
        if name == "argat":
            i, j = args
            if i is R_POISON or j is R_POISON:
                self.trap("UninitRead")
            if 0 <= i < len(self.argv) and 0 <= j < len(self.argv[i]):
                return self.argv[i][j]
            return -1
        if name == "getchar":
            if self.stdin_pos < len(self.stdin):
                b = self.stdin[self.stdin_pos]
                self.stdin_pos += 1
                return b
            return -1
        return self.call(name, args)


def reference_execute(
    unit: ast.SourceUnit,
    argv,
    stdin: bytes = b"",
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[ExecResult, list[int]]:
    """Run a unit on the AST directly; returns (result, visit trace)."""
    # deep call chains cost ~6 Python frames per MiniC frame here
    limit = sys.getrecursionlimit()
    if limit < 20000:
        sys.setrecursionlimit(20000)
    try:
        ev = _Evaluator(unit, argv, stdin, step_budget)
        result = ev.run()
    finally:
        sys.setrecursionlimit(limit)
    return result, ev.visited
