"""Intraprocedural control-flow graphs at statement granularity.

Compound statements contribute one node per evaluation point (loop
condition, for-init, for-step, switch scrutinee, case test) so dataflow
can distinguish paths through them.  Edges carry optional null-pointer
assumptions derived from `p == 0` / `p != 0` conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from leader.minic import ast

ENTRY = 0
EXIT = 1
FALLOFF = 2  # reached by completing the body without a return


@dataclass
class Node:
    idx: int
    role: str  # entry/exit/falloff/stmt/cond/init/step/case
    stmt: ast.Stmt | None = None


Assume = tuple[tuple[str, str], ...]  # ((var, "null"|"nonnull"), ...)


@dataclass
class Cfg:
    fn: ast.Function
    nodes: list[Node] = field(default_factory=list)
    succ: dict[int, list[tuple[int, Assume]]] = field(default_factory=dict)

    def preds(self) -> dict[int, list[tuple[int, Assume]]]:
        rev: dict[int, list[tuple[int, Assume]]] = {n.idx: [] for n in self.nodes}
        for src, outs in self.succ.items():
            for dst, assume in outs:
                rev[dst].append((src, assume))
        return rev


# a dangling edge waiting for its destination
_Pending = tuple[int, Assume]


class _Builder:
    def __init__(self, fn: ast.Function, ptr_vars: set[str]):
        self.fn = fn
        self.ptr_vars = ptr_vars
        self.cfg = Cfg(fn)
        for idx, role in ((ENTRY, "entry"), (EXIT, "exit"), (FALLOFF, "falloff")):
            self.cfg.nodes.append(Node(idx, role))
            self.cfg.succ[idx] = []
        self.connect([(FALLOFF, ())], EXIT)
        self.labels: dict[str, int] = {}
        self.gotos: list[tuple[int, str]] = []
        # only valid inside a loop or switch body; typecheck guarantees that
        self.pending_breaks: list[_Pending] | None = None
        self.continue_target: int | None = None
        self.break_out: list[_Pending] = []

    def node(self, role: str, stmt: ast.Stmt) -> int:
        idx = len(self.cfg.nodes)
        self.cfg.nodes.append(Node(idx, role, stmt))
        self.cfg.succ[idx] = []
        return idx

    def connect(self, pendings: list[_Pending], dst: int):
        for src, assume in pendings:
            self.cfg.succ[src].append((dst, assume))

    def build(self) -> Cfg:
        pendings = self.seq(self.fn.body.stmts, [(ENTRY, ())])
        self.connect(pendings, FALLOFF)
        for src, label in self.gotos:
            self.cfg.succ[src].append((self.labels[label], ()))
        return self.cfg

    def seq(self, stmts: list[ast.Stmt], incoming: list[_Pending]) -> list[_Pending]:
        for s in stmts:
            incoming = self.stmt(s, incoming)
        return incoming

    def cond_edges(self, cond: ast.Expr) -> tuple[Assume, Assume]:
        """(assumption on true edge, assumption on false edge)."""
        if isinstance(cond, ast.Binary) and cond.op in ("==", "!="):
            var = None
            if isinstance(cond.left, ast.Var) and _is_zero(cond.right):
                var = cond.left.name
            elif isinstance(cond.right, ast.Var) and _is_zero(cond.left):
                var = cond.right.name
            if var is not None and var in self.ptr_vars:
                if cond.op == "==":
                    return ((var, "null"),), ((var, "nonnull"),)
                return ((var, "nonnull"),), ((var, "null"),)
        return (), ()

    def stmt(self, s: ast.Stmt, incoming: list[_Pending]) -> list[_Pending]:
        if isinstance(s, ast.Block):
            return self.seq(s.stmts, incoming)
        if isinstance(s, ast.If):
            cond = self.node("cond", s)
            self.connect(incoming, cond)
            t_asm, f_asm = self.cond_edges(s.cond)
            out = self.seq(s.then.stmts, [(cond, t_asm)])
            if s.els is not None:
                out += self.seq(s.els.stmts, [(cond, f_asm)])
            else:
                out += [(cond, f_asm)]
            return out
        if isinstance(s, ast.While):
            cond = self.node("cond", s)
            self.connect(incoming, cond)
            t_asm, f_asm = self.cond_edges(s.cond)
            body_out = self.loop_body(s.body.stmts, [(cond, t_asm)], cont_to=cond)
            self.connect(body_out, cond)
            return [(cond, f_asm)] + self.break_out
        if isinstance(s, ast.For):
            init = self.node("init", s)
            cond = self.node("cond", s)
            step = self.node("step", s)
            self.connect(incoming, init)
            self.connect([(init, ())], cond)
            t_asm, f_asm = self.cond_edges(s.cond)
            body_out = self.loop_body(s.body.stmts, [(cond, t_asm)], cont_to=step)
            self.connect(body_out, step)
            self.connect([(step, ())], cond)
            return [(cond, f_asm)] + self.break_out
        if isinstance(s, ast.Switch):
            return self.switch(s, incoming)
        cur = self.node("stmt", s)
        self.connect(incoming, cur)
        if isinstance(s, ast.Return):
            self.cfg.succ[cur].append((EXIT, ()))
            return []
        if isinstance(s, ast.Goto):
            self.gotos.append((cur, s.label))
            return []
        if isinstance(s, ast.Label):
            self.labels[s.name] = cur
            return [(cur, ())]
        if isinstance(s, ast.Break):
            self.pending_breaks.append((cur, ()))
            return []
        if isinstance(s, ast.Continue):
            self.cfg.succ[cur].append((self.continue_target, ()))
            return []
        return [(cur, ())]

    def loop_body(
        self, stmts: list[ast.Stmt], incoming: list[_Pending], cont_to: int
    ) -> list[_Pending]:
        saved_breaks = self.pending_breaks
        saved_cont = self.continue_target
        self.pending_breaks = []
        self.continue_target = cont_to
        out = self.seq(stmts, incoming)
        self.break_out = self.pending_breaks
        self.pending_breaks = saved_breaks
        self.continue_target = saved_cont
        return out

    def switch(self, s: ast.Switch, incoming: list[_Pending]) -> list[_Pending]:
        scrut = self.node("cond", s)
        self.connect(incoming, scrut)
        saved_breaks = self.pending_breaks
        self.pending_breaks = []
        # lay the body out sequentially (fallthrough), remembering the
        # node built for each Case label
        case_nodes: dict[int, int] = {}  # position in body -> node idx
        run: list[_Pending] = []
        entered = False
        for pos, item in enumerate(s.body.stmts):
            if isinstance(item, ast.Case):
                cur = self.node("case", item)
                case_nodes[pos] = cur
                self.connect(run, cur)  # fallthrough crosses the label
                run = [(cur, ())]
                entered = True
            elif entered:
                run = self.stmt(item, run)
            # statements before the first label are unreachable: skip
        after = run  # completion of the last arm
        # dispatch: scrutinee tests the guarded labels in body order, then
        # falls back to default or past the switch
        guarded = [p for p, it in case_nodes.items() if _case_value(s, p) is not None]
        default = [p for p, it in case_nodes.items() if _case_value(s, p) is None]
        chain: list[_Pending] = [(scrut, ())]
        for p in guarded:
            self.connect(chain, case_nodes[p])
            chain = [(case_nodes[p], ())]
        if default:
            self.connect(chain, case_nodes[default[0]])
            chain = []
        out = after + chain + self.pending_breaks
        self.pending_breaks = saved_breaks
        return out


def _case_value(s: ast.Switch, pos: int):
    item = s.body.stmts[pos]
    assert isinstance(item, ast.Case)
    return item.value


def _is_zero(e: ast.Expr) -> bool:
    return isinstance(e, ast.IntLit) and e.value == 0


def ptr_locals(fn: ast.Function) -> set[str]:
    names = {p for p, t in fn.params if t.kind == "ptr"}
    for s in ast.function_stmts(fn):
        if isinstance(s, ast.VarDecl) and s.type.kind == "ptr":
            names.add(s.name)
    return names


def build_cfg(fn: ast.Function) -> Cfg:
    return _Builder(fn, ptr_locals(fn)).build()


# --- per-node read/write sets ---


def expr_reads(e: ast.Expr | None, out: list[str]):
    """Variables whose value the expression observes, in eval order."""
    if e is None or isinstance(e, ast.IntLit):
        return
    if isinstance(e, ast.Var):
        out.append(e.name)
    elif isinstance(e, ast.Index):
        expr_reads(e.index, out)
    elif isinstance(e, ast.Unary):
        if e.op != "&":  # address-of does not read the operand
            expr_reads(e.operand, out)
    elif isinstance(e, ast.Binary):
        expr_reads(e.left, out)
        expr_reads(e.right, out)
    elif isinstance(e, ast.Call):
        for a in e.args:
            expr_reads(a, out)


def _clause_reads(clause: ast.AssignClause, out: list[str]):
    t = clause.target
    if isinstance(t, ast.Index):
        expr_reads(t.index, out)
    elif isinstance(t, ast.Unary):
        expr_reads(t.operand, out)
    expr_reads(clause.value, out)


def node_reads(node: Node) -> list[str]:
    s = node.stmt
    out: list[str] = []
    if s is None or node.role in ("case",):
        return out
    if node.role == "cond":
        cond = s.expr if isinstance(s, ast.Switch) else s.cond
        expr_reads(cond, out)
    elif node.role == "init":
        _clause_reads(s.init, out)
    elif node.role == "step":
        _clause_reads(s.step, out)
    elif isinstance(s, ast.VarDecl):
        expr_reads(s.init, out)
    elif isinstance(s, ast.Assign):
        _clause_reads(ast.AssignClause(s.target, s.value), out)
    elif isinstance(s, ast.ExprStmt):
        expr_reads(s.expr, out)
    elif isinstance(s, ast.Return):
        expr_reads(s.value, out)
    return out


def node_writes(node: Node) -> set[str]:
    s = node.stmt
    if s is None:
        return set()
    if node.role == "init":
        clause = s.init
    elif node.role == "step":
        clause = s.step
    elif node.role == "stmt" and isinstance(s, ast.Assign):
        clause = ast.AssignClause(s.target, s.value)
    elif node.role == "stmt" and isinstance(s, ast.VarDecl) and s.init is not None:
        return {s.name}
    else:
        return set()
    if isinstance(clause.target, ast.Var):
        return {clause.target.name}
    return set()
