"""Lowering from the MiniC AST to a flat register-machine IR.

Every instruction records the StmtId that produced it; instructions
flagged ``head`` mark statement-entry events, which is what coverage and
the step budget count.  The reference evaluator in leader.runtime counts
the same events, so the two engines agree on visited statements and on
where a step limit lands.

Lowering is deterministic: structurally equal units produce byte-equal
serialized modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from leader.minic import ast
from leader.minic.typecheck import check_unit, unit_symbols


@dataclass
class Instr:
    op: str
    dst: int | None = None
    args: tuple = ()
    stmt: int | None = None
    head: bool = False


@dataclass
class IrFunction:
    name: str
    params: list[str]
    ret_void: bool
    vars: dict[str, tuple[str, int]]  # name -> (kind, array length or 0)
    instrs: list[Instr] = field(default_factory=list)
    nregs: int = 0


@dataclass
class IrModule:
    name: str
    globals: list[tuple[str, str, int, int]]  # name, kind, length, init value
    functions: dict[str, IrFunction]

    def serialize(self) -> bytes:
        lines = [f"unit {self.name}"]
        for name, kind, length, init in self.globals:
            lines.append(f"global {name} {kind} {length} {init}")
        for fn in self.functions.values():
            lines.append(
                f"func {fn.name} ret={'void' if fn.ret_void else 'int'}"
                f" params={','.join(fn.params)} regs={fn.nregs}"
            )
            for name in sorted(fn.vars):
                kind, length = fn.vars[name]
                lines.append(f"  var {name} {kind} {length}")
            for i, ins in enumerate(fn.instrs):
                argtext = ",".join(str(a) for a in ins.args)
                head = " !" if ins.head else ""
                dst = f" r{ins.dst}" if ins.dst is not None else ""
                lines.append(
                    f"  {i}: {ins.op}{dst} {argtext} @{ins.stmt}{head}"
                )
        return ("\n".join(lines) + "\n").encode("utf-8")


class _Target:
    """Forward-reference jump target, bound to an index once known."""

    __slots__ = ("index",)

    def __init__(self):
        self.index: int | None = None


class _FnLowerer:
    def __init__(self, fn: ast.Function, var_types: dict[str, ast.Type], unit_syms):
        self.fn = fn
        self.var_types = var_types
        self.syms = unit_syms
        self.instrs: list[Instr] = []
        self.nregs = 0
        self.cur_stmt: int | None = None
        self.pending_head = False
        self.loops: list[tuple[_Target, _Target | None]] = []  # (break, continue)
        self.labels: dict[str, _Target] = {}

    # --- emission helpers ---

    def reg(self) -> int:
        self.nregs += 1
        return self.nregs - 1

    def emit(self, op: str, dst: int | None = None, *args) -> Instr:
        ins = Instr(op, dst, tuple(args), self.cur_stmt, self.pending_head)
        self.pending_head = False
        self.instrs.append(ins)
        return ins

    def here(self) -> int:
        return len(self.instrs)

    def bind(self, target: _Target):
        target.index = self.here()

    def mark_entry(self, stmt: ast.Stmt):
        self.cur_stmt = stmt.stmt_id
        self.pending_head = True

    def nop(self):
        """Landing instruction: a jump to the next index."""
        t = _Target()
        self.emit("Jump", None, t)
        self.bind(t)

    # --- expressions ---

    def lower_expr(self, e: ast.Expr) -> int:
        if isinstance(e, ast.IntLit):
            r = self.reg()
            self.emit("LoadConst", r, e.value)
            return r
        if isinstance(e, ast.Var):
            r = self.reg()
            self.emit("LoadVar", r, e.name)
            return r
        if isinstance(e, ast.Index):
            idx = self.lower_expr(e.index)
            r = self.reg()
            self.emit("LoadIndex", r, e.name, idx)
            return r
        if isinstance(e, ast.Call):
            arg_regs = [self.lower_expr(a) for a in e.args]
            if e.name == "print":
                self.emit("Print", None, arg_regs[0], "int")
                return self.reg_const(0)
            if e.name == "putc":
                self.emit("Print", None, arg_regs[0], "char")
                return self.reg_const(0)
            if e.name == "argc":
                r = self.reg()
                self.emit("ArgvRead", r, "argc")
                return r
            if e.name == "argat":
                r = self.reg()
                self.emit("ArgvRead", r, "argat", arg_regs[0], arg_regs[1])
                return r
            if e.name == "getchar":
                r = self.reg()
                self.emit("ArgvRead", r, "stdin")
                return r
            ret_void = self.syms.functions[e.name][0].kind == "void"
            r = None if ret_void else self.reg()
            self.emit("Call", r, e.name, tuple(arg_regs))
            return r if r is not None else self.reg_const(0)
        if isinstance(e, ast.Unary):
            if e.op == "*":
                p = self.lower_expr(e.operand)
                r = self.reg()
                self.emit("LoadDeref", r, p)
                return r
            if e.op == "&":
                assert isinstance(e.operand, ast.Var)
                r = self.reg()
                self.emit("LoadVar", r, e.operand.name, "addr")
                return r
            if e.op == "-":
                a = self.lower_expr(e.operand)
                z = self.reg_const(0)
                r = self.reg()
                self.emit("Arith", r, "-", z, a)
                return r
            if e.op == "!":
                a = self.lower_expr(e.operand)
                z = self.reg_const(0)
                r = self.reg()
                self.emit("Compare", r, "==", a, z)
                return r
            raise TypeError(f"unknown unary {e.op!r}")
        if isinstance(e, ast.Binary):
            if e.op in ("&&", "||"):
                return self.lower_shortcircuit(e)
            a = self.lower_expr(e.left)
            b = self.lower_expr(e.right)
            r = self.reg()
            kind = "Compare" if e.op in ("==", "!=", "<", "<=", ">", ">=") else "Arith"
            self.emit(kind, r, e.op, a, b)
            return r
        raise TypeError(f"unknown expr {e!r}")

    def reg_const(self, value: int) -> int:
        r = self.reg()
        self.emit("LoadConst", r, value)
        return r

    def lower_shortcircuit(self, e: ast.Binary) -> int:
        result = self.reg()
        a = self.lower_expr(e.left)
        eval_rhs = _Target()
        shortcut = _Target()
        done = _Target()
        if e.op == "&&":
            self.emit("Branch", None, a, eval_rhs, shortcut)
        else:
            self.emit("Branch", None, a, shortcut, eval_rhs)
        self.bind(eval_rhs)
        b = self.lower_expr(e.right)
        z = self.reg_const(0)
        self.emit("Compare", result, "!=", b, z)
        self.emit("Jump", None, done)
        self.bind(shortcut)
        self.emit("LoadConst", result, 0 if e.op == "&&" else 1)
        self.bind(done)
        return result

    # --- statements ---

    def lower_assign(self, target: ast.Expr, value: ast.Expr):
        if isinstance(target, ast.Var):
            v = self.lower_expr(value)
            self.emit("StoreVar", None, target.name, v)
        elif isinstance(target, ast.Index):
            idx = self.lower_expr(target.index)
            v = self.lower_expr(value)
            self.emit("StoreIndex", None, target.name, idx, v)
        elif isinstance(target, ast.Unary) and target.op == "*":
            p = self.lower_expr(target.operand)
            v = self.lower_expr(value)
            self.emit("StoreDeref", None, p, v)
        else:
            raise TypeError(f"bad assignment target {target!r}")

    def lower_stmt(self, s: ast.Stmt):
        if isinstance(s, ast.Block):
            for child in s.stmts:
                self.lower_stmt(child)
            return
        self.mark_entry(s)
        if isinstance(s, ast.VarDecl):
            if s.init is not None:
                v = self.lower_expr(s.init)
                self.emit("StoreVar", None, s.name, v)
            else:
                self.nop()
        elif isinstance(s, ast.Assign):
            self.lower_assign(s.target, s.value)
        elif isinstance(s, ast.ExprStmt):
            self.lower_expr(s.expr)
        elif isinstance(s, ast.Return):
            if s.value is not None:
                v = self.lower_expr(s.value)
                self.emit("Return", None, v)
            else:
                self.emit("Return", None)
        elif isinstance(s, ast.If):
            c = self.lower_expr(s.cond)
            t_then = _Target()
            t_else = _Target()
            t_end = _Target()
            self.emit("Branch", None, c, t_then, t_else if s.els else t_end)
            self.bind(t_then)
            self.lower_stmt(s.then)
            if s.els is not None:
                self.cur_stmt = s.stmt_id
                self.emit("Jump", None, t_end)
                self.bind(t_else)
                self.lower_stmt(s.els)
            self.bind(t_end)
        elif isinstance(s, ast.While):
            t_cond = _Target()
            t_body = _Target()
            t_end = _Target()
            self.bind(t_cond)
            c = self.lower_expr(s.cond)
            self.emit("Branch", None, c, t_body, t_end)
            self.bind(t_body)
            self.loops.append((t_end, t_cond))
            self.lower_stmt(s.body)
            self.loops.pop()
            # the head on the condition's first instruction re-fires per
            # iteration, so the back-jump itself is not an entry event
            self.cur_stmt = s.stmt_id
            self.emit("Jump", None, t_cond)
            self.bind(t_end)
        elif isinstance(s, ast.For):
            self.lower_assign(s.init.target, s.init.value)
            t_cond = _Target()
            t_body = _Target()
            t_step = _Target()
            t_end = _Target()
            self.bind(t_cond)
            self.cur_stmt = s.stmt_id
            self.pending_head = True
            c = self.lower_expr(s.cond)
            self.emit("Branch", None, c, t_body, t_end)
            self.bind(t_body)
            self.loops.append((t_end, t_step))
            self.lower_stmt(s.body)
            self.loops.pop()
            self.bind(t_step)
            self.cur_stmt = s.stmt_id
            self.lower_assign(s.step.target, s.step.value)
            self.emit("Jump", None, t_cond)
            self.bind(t_end)
        elif isinstance(s, ast.Switch):
            self.lower_switch(s)
        elif isinstance(s, ast.Goto):
            target = self.labels.setdefault(s.label, _Target())
            self.emit("Jump", None, target)
        elif isinstance(s, ast.Label):
            target = self.labels.setdefault(s.name, _Target())
            self.bind(target)
            self.nop()
        elif isinstance(s, ast.Break):
            self.emit("Jump", None, self.loops[-1][0])
        elif isinstance(s, ast.Continue):
            for t_break, t_cont in reversed(self.loops):
                if t_cont is not None:
                    self.emit("Jump", None, t_cont)
                    break
        elif isinstance(s, ast.Null):
            self.nop()
        elif isinstance(s, ast.Case):
            # stray case (outside switch lowering); behaves as a landing
            self.nop()
        else:
            raise TypeError(f"unknown stmt {s!r}")

    def lower_switch(self, s: ast.Switch):
        scrutinee = self.lower_expr(s.expr)
        items = s.body.stmts
        landings: dict[int, _Target] = {}
        after_landing: dict[int, _Target] = {}
        for item in items:
            if isinstance(item, ast.Case):
                landings[item.stmt_id] = _Target()
                after_landing[item.stmt_id] = _Target()
        t_end = _Target()
        default_case = next(
            (i for i in items if isinstance(i, ast.Case) and i.value is None), None
        )
        # dispatch: test guarded labels in body order, attributed to each Case
        for item in items:
            if isinstance(item, ast.Case) and item.value is not None:
                self.cur_stmt = item.stmt_id
                self.pending_head = True
                k = self.reg_const(item.value)
                c = self.reg()
                self.emit("Compare", c, "==", scrutinee, k)
                no_match = _Target()
                self.emit("Branch", None, c, after_landing[item.stmt_id], no_match)
                self.bind(no_match)
        self.cur_stmt = s.stmt_id
        if default_case is not None:
            self.emit("Jump", None, landings[default_case.stmt_id])
        else:
            self.emit("Jump", None, t_end)
        # body: landings mark fallthrough entry into each labelled position
        self.loops.append((t_end, None))
        for item in items:
            if isinstance(item, ast.Case):
                self.bind(landings[item.stmt_id])
                self.mark_entry(item)
                self.nop()
                self.bind(after_landing[item.stmt_id])
            else:
                self.lower_stmt(item)
        self.loops.pop()
        self.bind(t_end)

    def finish(self) -> IrFunction:
        # implicit return at the end of the body
        self.cur_stmt = None
        self.pending_head = False
        if self.fn.ret.kind == "void":
            self.emit("Return", None)
        else:
            self.emit("Return", None, "implicit")
        instrs = []
        for ins in self.instrs:
            for a in ins.args:
                if isinstance(a, _Target):
                    assert a.index is not None, "unbound jump target"
            args = tuple(
                a.index if isinstance(a, _Target) else a for a in ins.args
            )
            instrs.append(Instr(ins.op, ins.dst, args, ins.stmt, ins.head))
        vars_: dict[str, tuple[str, int]] = {}
        for name, typ in self.fn.params:
            vars_[name] = (typ.kind, 0)
        for st in ast.function_stmts(self.fn):
            if isinstance(st, ast.VarDecl):
                vars_[st.name] = (st.type.kind, st.type.length or 0)
        return IrFunction(
            self.fn.name,
            [name for name, _ in self.fn.params],
            self.fn.ret.kind == "void",
            vars_,
            instrs,
            self.nregs,
        )


def lower(unit: ast.SourceUnit) -> IrModule:
    """Lower a well-typed unit; raises TypeCheckError on ill-typed input."""
    check_unit(unit)
    syms = unit_symbols(unit)
    globals_ = [
        (g.name, g.type.kind, g.type.length or 0,
         g.init.value if isinstance(g.init, ast.IntLit) else 0)
        for g in unit.globals
    ]
    functions: dict[str, IrFunction] = {}
    for fn in unit.functions:
        low = _FnLowerer(fn, syms.locals[fn.name], syms)
        low.lower_stmt(fn.body)
        functions[fn.name] = low.finish()
    return IrModule(unit.name, globals_, functions)
