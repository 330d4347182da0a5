"""Static hazard checkers over per-function control-flow graphs.

Four checkers, all intraprocedural:

  UninitRead     high    a local may be read before any assignment
  NullDeref      high    a pointer that may be null is dereferenced
  ConstIndexOOB  high    a constant array index is out of bounds
  MissingReturn  medium  a non-void function can fall off its end

Findings anchor to a statement via its shallow structural hash so they
stay comparable across edits made elsewhere in the function.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from leader.minic import ast
from leader.advisors.cfg import (
    ENTRY,
    FALLOFF,
    Cfg,
    Node,
    build_cfg,
    expr_reads,
    node_reads,
    node_writes,
    ptr_locals,
)

HIGH = "high"
MEDIUM = "medium"

SEVERITY = {
    "UninitRead": HIGH,
    "NullDeref": HIGH,
    "ConstIndexOOB": HIGH,
    "MissingReturn": MEDIUM,
}


@dataclass(frozen=True)
class Finding:
    checker: str
    function: str
    severity: str
    subject: str | None  # variable the hazard is about, if any
    stmt_id: int | None  # anchor statement in the analyzed unit
    anchor: str  # shallow hash of the anchor ("" = whole function)
    line: int
    message: str

    def key(self) -> tuple:
        """Identity for matching findings across program versions."""
        return (self.checker, self.function, self.subject, self.anchor)

    def describe(self) -> str:
        return f"[{self.severity}] {self.function}: {self.message} (line {self.line})"

    def to_json(self) -> dict:
        return {
            "checker": self.checker,
            "function": self.function,
            "severity": self.severity,
            "subject": self.subject,
            "stmt_id": self.stmt_id,
            "line": self.line,
            "message": self.message,
        }


def _finding(checker: str, fn: ast.Function, stmt: ast.Stmt | None,
             subject: str | None, message: str) -> Finding:
    return Finding(
        checker=checker,
        function=fn.name,
        severity=SEVERITY[checker],
        subject=subject,
        stmt_id=stmt.stmt_id if stmt is not None else None,
        anchor=ast.shallow_hash(stmt) if stmt is not None else "",
        line=stmt.span[0] if stmt is not None else fn.span[0],
        message=message,
    )


def _addr_taken(fn: ast.Function) -> set[str]:
    """Variables whose address escapes; excluded from uninit tracking."""
    taken: set[str] = set()

    def walk(e: ast.Expr | None):
        if e is None:
            return
        if isinstance(e, ast.Unary):
            if e.op == "&" and isinstance(e.operand, ast.Var):
                taken.add(e.operand.name)
            else:
                walk(e.operand)
        elif isinstance(e, ast.Binary):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, ast.Index):
            walk(e.index)
        elif isinstance(e, ast.Call):
            for a in e.args:
                walk(a)

    for s in ast.function_stmts(fn):
        for e in _stmt_exprs(s):
            walk(e)
    return taken


def _stmt_exprs(s: ast.Stmt):
    if isinstance(s, ast.VarDecl):
        return [s.init]
    if isinstance(s, ast.Assign):
        return [s.target, s.value]
    if isinstance(s, ast.If):
        return [s.cond]
    if isinstance(s, ast.While):
        return [s.cond]
    if isinstance(s, ast.For):
        return [s.init.target, s.init.value, s.cond, s.step.target, s.step.value]
    if isinstance(s, ast.Switch):
        return [s.expr]
    if isinstance(s, ast.Return):
        return [s.value]
    if isinstance(s, ast.ExprStmt):
        return [s.expr]
    return []


# --- UninitRead: forward may-uninitialized analysis ---


def _check_uninit(fn: ast.Function, cfg: Cfg, out: list[Finding]):
    locals_: set[str] = set()
    params = {p for p, _ in fn.params}
    for s in ast.function_stmts(fn):
        if isinstance(s, ast.VarDecl) and s.type.kind != "array":
            locals_.add(s.name)
    tracked = locals_ - params - _addr_taken(fn)
    if not tracked:
        return

    start = frozenset(tracked)
    state: dict[int, frozenset] = {ENTRY: start}
    preds = cfg.preds()
    order = [n.idx for n in cfg.nodes]
    changed = True
    while changed:
        changed = False
        for idx in order:
            if idx == ENTRY:
                continue
            incoming = [state[p] for p, _ in preds[idx] if p in state]
            if not incoming:
                continue
            inset = frozenset().union(*incoming)
            node = cfg.nodes[idx]
            outset = inset - node_writes(node)
            if state.get(idx) != outset:
                state[idx] = outset
                changed = True

    seen: set[tuple[int, str]] = set()
    for node in cfg.nodes:
        if node.stmt is None:
            continue
        incoming = [state[p] for p, _ in preds[node.idx] if p in state]
        if not incoming:
            continue
        inset = frozenset().union(*incoming)
        for name in node_reads(node):
            if name in inset and (node.stmt.stmt_id, name) not in seen:
                seen.add((node.stmt.stmt_id, name))
                out.append(_finding(
                    "UninitRead", fn, node.stmt, name,
                    f"variable '{name}' may be read before it is assigned",
                ))


# --- NullDeref: pointer-state analysis with branch refinement ---

_BOT = "unset"


def _join_ptr(a: str, b: str) -> str:
    if a == _BOT:
        return b
    if b == _BOT:
        return a
    return a if a == b else "maybe"


def _ptr_transfer(node: Node, env: dict[str, str], ptrs: set[str]) -> dict[str, str]:
    s = node.stmt
    clause = None
    if node.role == "init":
        clause = s.init
    elif node.role == "step":
        clause = s.step
    elif node.role == "stmt" and isinstance(s, ast.Assign):
        clause = ast.AssignClause(s.target, s.value)
    elif node.role == "stmt" and isinstance(s, ast.VarDecl) and s.init is not None:
        clause = ast.AssignClause(ast.Var(s.name), s.init)
    if clause is None or not isinstance(clause.target, ast.Var):
        return env
    name = clause.target.name
    if name not in ptrs:
        return env
    v = clause.value
    env = dict(env)
    if isinstance(v, ast.IntLit) and v.value == 0:
        env[name] = "null"
    elif isinstance(v, ast.Unary) and v.op == "&":
        env[name] = "nonnull"
    elif isinstance(v, ast.Var) and v.name in ptrs:
        env[name] = env.get(v.name, "maybe")
    else:
        env[name] = "maybe"
    return env


def _derefs(s: ast.Stmt | None, role: str) -> list[str]:
    """Pointer variables dereferenced when this node executes."""
    found: list[str] = []

    def walk(e: ast.Expr | None):
        if e is None:
            return
        if isinstance(e, ast.Unary):
            if e.op == "*" and isinstance(e.operand, ast.Var):
                found.append(e.operand.name)
            elif e.op != "&":
                walk(e.operand)
        elif isinstance(e, ast.Binary):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, ast.Index):
            walk(e.index)
        elif isinstance(e, ast.Call):
            for a in e.args:
                walk(a)

    if s is None:
        return found
    if role == "cond":
        walk(s.expr if isinstance(s, ast.Switch) else s.cond)
    elif role == "init":
        walk(s.init.target)
        walk(s.init.value)
    elif role == "step":
        walk(s.step.target)
        walk(s.step.value)
    elif role == "stmt":
        for e in _stmt_exprs(s):
            walk(e)
    return found


def _check_nullderef(fn: ast.Function, cfg: Cfg, out: list[Finding]):
    ptrs = ptr_locals(fn)
    if not ptrs:
        return
    param_ptrs = {p for p, t in fn.params if t.kind == "ptr"}
    start = {p: ("maybe" if p in param_ptrs else _BOT) for p in ptrs}
    state: dict[int, dict[str, str]] = {ENTRY: start}
    preds = cfg.preds()
    changed = True
    while changed:
        changed = False
        for node in cfg.nodes:
            if node.idx == ENTRY:
                continue
            envs = []
            for p, assume in preds[node.idx]:
                if p not in state:
                    continue
                env = dict(state[p])
                for var, what in assume:
                    env[var] = "null" if what == "null" else "nonnull"
                envs.append(env)
            if not envs:
                continue
            merged: dict[str, str] = {}
            for p in ptrs:
                v = _BOT
                for env in envs:
                    v = _join_ptr(v, env.get(p, _BOT))
                merged[p] = v
            outenv = _ptr_transfer(node, merged, ptrs)
            if state.get(node.idx) != outenv:
                state[node.idx] = outenv
                changed = True

    seen: set[tuple[int, str]] = set()
    for node in cfg.nodes:
        if node.stmt is None:
            continue
        envs = []
        for p, assume in preds[node.idx]:
            if p not in state:
                continue
            env = dict(state[p])
            for var, what in assume:
                env[var] = "null" if what == "null" else "nonnull"
            envs.append(env)
        if not envs:
            continue
        for name in _derefs(node.stmt, node.role):
            if name not in ptrs:
                continue
            v = _BOT
            for env in envs:
                v = _join_ptr(v, env.get(name, _BOT))
            if v in ("null", "maybe") and (node.stmt.stmt_id, name) not in seen:
                seen.add((node.stmt.stmt_id, name))
                what = "null" if v == "null" else "possibly null"
                out.append(_finding(
                    "NullDeref", fn, node.stmt, name,
                    f"pointer '{name}' is {what} when dereferenced",
                ))


# --- ConstIndexOOB: literal index versus declared length ---


def _check_const_index(fn: ast.Function, lengths: dict[str, int], out: list[Finding]):
    def walk(e: ast.Expr | None, stmt: ast.Stmt):
        if e is None:
            return
        if isinstance(e, ast.Index):
            if isinstance(e.index, ast.IntLit) and e.name in lengths:
                n = lengths[e.name]
                if not (0 <= e.index.value < n):
                    out.append(_finding(
                        "ConstIndexOOB", fn, stmt, e.name,
                        f"index {e.index.value} is outside '{e.name}[{n}]'",
                    ))
            walk(e.index, stmt)
        elif isinstance(e, ast.Unary):
            walk(e.operand, stmt)
        elif isinstance(e, ast.Binary):
            walk(e.left, stmt)
            walk(e.right, stmt)
        elif isinstance(e, ast.Call):
            for a in e.args:
                walk(a, stmt)

    for s in ast.function_stmts(fn):
        for e in _stmt_exprs(s):
            walk(e, s)


# --- MissingReturn: the fall-off point is reachable ---


def _check_missing_return(fn: ast.Function, cfg: Cfg, out: list[Finding]):
    if fn.ret.kind == "void":
        return
    reached = {ENTRY}
    stack = [ENTRY]
    while stack:
        for dst, _ in cfg.succ[stack.pop()]:
            if dst not in reached:
                reached.add(dst)
                stack.append(dst)
    if FALLOFF in reached:
        out.append(_finding(
            "MissingReturn", fn, None, None,
            "control can reach the end of the function without a return",
        ))


def analyze_function(fn: ast.Function, lengths: dict[str, int]) -> list[Finding]:
    cfg = build_cfg(fn)
    out: list[Finding] = []
    _check_uninit(fn, cfg, out)
    _check_nullderef(fn, cfg, out)
    _check_const_index(fn, lengths, out)
    _check_missing_return(fn, cfg, out)
    return out


def analyze_unit(unit: ast.SourceUnit) -> list[Finding]:
    """All findings for a unit, in a stable order."""
    out: list[Finding] = []
    global_lengths = {
        g.name: g.type.length or 0 for g in unit.globals if g.type.kind == "array"
    }
    for fn in unit.functions:
        lengths = dict(global_lengths)
        for s in ast.function_stmts(fn):
            if isinstance(s, ast.VarDecl) and s.type.kind == "array":
                lengths[s.name] = s.type.length or 0
        out.extend(analyze_function(fn, lengths))
    out.sort(key=lambda f: (f.function, f.line, f.checker, f.subject or ""))
    return out


# --- comparing findings across program versions ---


@dataclass(frozen=True)
class SecurityDiff:
    eliminated: tuple[Finding, ...]  # original findings whose anchor was deleted
    new: tuple[Finding, ...]  # debloated findings with no original match

    @property
    def new_high(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.new if f.severity == HIGH)

    def to_json(self) -> dict:
        return {
            "eliminated": [f.to_json() for f in self.eliminated],
            "new": [f.to_json() for f in self.new],
        }


def diff_findings(
    original: list[Finding],
    debloated: list[Finding],
    deleted_ids: set[int],
) -> SecurityDiff:
    """Split debloated-side findings into matched and new.

    A finding whose anchor statement was deleted counts as eliminated.
    The rest of the original findings absorb debloated findings with the
    same key; whatever is left over is new.
    """
    eliminated = tuple(
        f for f in original if f.stmt_id is not None and f.stmt_id in deleted_ids
    )
    gone = {id(f) for f in eliminated}
    budget = Counter(f.key() for f in original if id(f) not in gone)
    new = []
    for f in debloated:
        if budget[f.key()] > 0:
            budget[f.key()] -= 1
        else:
            new.append(f)
    return SecurityDiff(eliminated=eliminated, new=tuple(new))
