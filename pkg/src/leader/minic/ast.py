"""AST node types for MiniC.

Statement identity: every statement carries a small integer ``stmt_id``
unique within its SourceUnit.  Ids are assigned in parse order, survive
deletions unchanged, and are re-anchored by structural matching when a
function body is replaced (see leader.minic.edit).  Block nodes are pure
wrappers: they carry ids like any statement but are excluded from size
accounting, coverage, and advisor candidate sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Type:
    kind: str  # "int" | "ptr" | "array" | "void"
    length: int | None = None

    def __str__(self) -> str:
        if self.kind == "array":
            return f"int[{self.length}]"
        if self.kind == "ptr":
            return "int *"
        return self.kind


INT = Type("int")
PTR = Type("ptr")
VOID = Type("void")


# --- expressions -----------------------------------------------------------


class Expr:
    pass


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class Var(Expr):
    name: str


@dataclass
class Unary(Expr):
    op: str  # "-" | "!" | "*" | "&"
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Index(Expr):
    name: str
    index: Expr


@dataclass
class Call(Expr):
    name: str
    args: list[Expr]


# --- statements ------------------------------------------------------------


@dataclass
class Stmt:
    stmt_id: int = field(default=0, kw_only=True)
    span: tuple[int, int] = field(default=(0, 0), kw_only=True)


@dataclass
class VarDecl(Stmt):
    name: str
    type: Type
    init: Expr | None = None


@dataclass
class Assign(Stmt):
    target: Expr  # Var, Index, or Unary("*", ...)
    value: Expr


@dataclass
class Block(Stmt):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass
class If(Stmt):
    cond: Expr
    then: Block
    els: Block | None = None


@dataclass
class While(Stmt):
    cond: Expr
    body: Block


@dataclass
class AssignClause:
    """Init/step clause of a for loop; part of the For, not a statement."""

    target: Expr
    value: Expr


@dataclass
class For(Stmt):
    init: AssignClause
    cond: Expr
    step: AssignClause
    body: Block


@dataclass
class Switch(Stmt):
    expr: Expr
    body: Block  # children may include Case labels; fallthrough semantics


@dataclass
class Case(Stmt):
    value: int | None  # None for "default:"


@dataclass
class Goto(Stmt):
    label: str


@dataclass
class Label(Stmt):
    name: str


@dataclass
class Return(Stmt):
    value: Expr | None = None


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Break(Stmt):
    pass


@dataclass
class Continue(Stmt):
    pass


@dataclass
class Null(Stmt):
    pass


@dataclass
class Function:
    name: str
    ret: Type
    params: list[tuple[str, Type]]
    body: Block
    span: tuple[int, int] = (0, 0)


@dataclass
class SourceUnit:
    name: str
    globals: list[VarDecl]
    functions: list[Function]
    next_stmt_id: int = 1

    def function(self, name: str) -> Function:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)


BUILTINS = {
    "print": (VOID, [INT]),
    "putc": (VOID, [INT]),
    "argc": (INT, []),
    "argat": (INT, [INT, INT]),
    "getchar": (INT, []),
}


# --- traversal helpers -----------------------------------------------------


def child_stmts(stmt: Stmt) -> list[Stmt]:
    """Direct child statements (Blocks included as children)."""
    if isinstance(stmt, Block):
        return list(stmt.stmts)
    if isinstance(stmt, If):
        return [stmt.then] + ([stmt.els] if stmt.els is not None else [])
    if isinstance(stmt, (While, For, Switch)):
        return [stmt.body]
    return []


def iter_stmts(root: Stmt):
    """Pre-order traversal of a statement subtree, root included."""
    yield root
    for child in child_stmts(root):
        yield from iter_stmts(child)


def function_stmts(fn: Function, include_blocks: bool = False) -> list[Stmt]:
    out = []
    for s in iter_stmts(fn.body):
        if s is fn.body:
            continue
        if isinstance(s, Block) and not include_blocks:
            continue
        out.append(s)
    return out


def unit_stmts(unit: SourceUnit, include_blocks: bool = False) -> list[Stmt]:
    """All countable statements: global decls plus function bodies."""
    out: list[Stmt] = list(unit.globals)
    for fn in unit.functions:
        out.extend(function_stmts(fn, include_blocks))
    return out


def unit_size(unit: SourceUnit) -> int:
    """Statement count; Block wrappers do not count."""
    return len(unit_stmts(unit))


def parent_map(fn: Function) -> dict[int, Stmt]:
    """stmt_id -> parent statement (Blocks appear as parents)."""
    parents: dict[int, Stmt] = {}

    def walk(stmt: Stmt):
        for child in child_stmts(stmt):
            parents[child.stmt_id] = stmt
            walk(child)

    walk(fn.body)
    return parents


def enclosing_stmt(parents: dict[int, Stmt], stmt: Stmt) -> Stmt | None:
    """Nearest enclosing non-Block statement, or None at top level."""
    cur = parents.get(stmt.stmt_id)
    while cur is not None and isinstance(cur, Block):
        cur = parents.get(cur.stmt_id)
    return cur


def expr_sexp(e: Expr | None) -> str:
    if e is None:
        return "()"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"(u{e.op} {expr_sexp(e.operand)})"
    if isinstance(e, Binary):
        return f"({e.op} {expr_sexp(e.left)} {expr_sexp(e.right)})"
    if isinstance(e, Index):
        return f"(ix {e.name} {expr_sexp(e.index)})"
    if isinstance(e, Call):
        return "(call " + e.name + "".join(" " + expr_sexp(a) for a in e.args) + ")"
    raise TypeError(f"unknown expr {e!r}")


def structural_hash(stmt: Stmt) -> str:
    """Canonical text of a statement subtree, ignoring ids and spans.

    Two statements have equal hashes iff they are structurally equal, which
    is what function replacement uses to re-anchor surviving ids.
    """
    if isinstance(stmt, VarDecl):
        return f"(decl {stmt.name} {stmt.type} {expr_sexp(stmt.init)})"
    if isinstance(stmt, Assign):
        return f"(= {expr_sexp(stmt.target)} {expr_sexp(stmt.value)})"
    if isinstance(stmt, Block):
        return "(block" + "".join(" " + structural_hash(s) for s in stmt.stmts) + ")"
    if isinstance(stmt, If):
        els = structural_hash(stmt.els) if stmt.els is not None else "()"
        return f"(if {expr_sexp(stmt.cond)} {structural_hash(stmt.then)} {els})"
    if isinstance(stmt, While):
        return f"(while {expr_sexp(stmt.cond)} {structural_hash(stmt.body)})"
    if isinstance(stmt, For):
        return (
            f"(for (= {expr_sexp(stmt.init.target)} {expr_sexp(stmt.init.value)})"
            f" {expr_sexp(stmt.cond)}"
            f" (= {expr_sexp(stmt.step.target)} {expr_sexp(stmt.step.value)})"
            f" {structural_hash(stmt.body)})"
        )
    if isinstance(stmt, Switch):
        return f"(switch {expr_sexp(stmt.expr)} {structural_hash(stmt.body)})"
    if isinstance(stmt, Case):
        return f"(case {stmt.value if stmt.value is not None else 'default'})"
    if isinstance(stmt, Goto):
        return f"(goto {stmt.label})"
    if isinstance(stmt, Label):
        return f"(label {stmt.name})"
    if isinstance(stmt, Return):
        return f"(return {expr_sexp(stmt.value)})"
    if isinstance(stmt, ExprStmt):
        return f"(expr {expr_sexp(stmt.expr)})"
    if isinstance(stmt, Break):
        return "(break)"
    if isinstance(stmt, Continue):
        return "(continue)"
    if isinstance(stmt, Null):
        return "(null)"
    raise TypeError(f"unknown stmt {stmt!r}")


def shallow_hash(stmt: Stmt) -> str:
    """Like structural_hash but ignoring child blocks.

    Used to anchor analysis findings: the anchor must survive edits made
    elsewhere inside the same compound statement.
    """
    if isinstance(stmt, If):
        return f"(if {expr_sexp(stmt.cond)})"
    if isinstance(stmt, While):
        return f"(while {expr_sexp(stmt.cond)})"
    if isinstance(stmt, For):
        return (
            f"(for (= {expr_sexp(stmt.init.target)} {expr_sexp(stmt.init.value)})"
            f" {expr_sexp(stmt.cond)}"
            f" (= {expr_sexp(stmt.step.target)} {expr_sexp(stmt.step.value)}))"
        )
    if isinstance(stmt, Switch):
        return f"(switch {expr_sexp(stmt.expr)})"
    if isinstance(stmt, Block):
        return "(block)"
    return structural_hash(stmt)


def stmts_equal(a: Stmt, b: Stmt) -> bool:
    return structural_hash(a) == structural_hash(b)


def units_equal(a: SourceUnit, b: SourceUnit) -> bool:
    if len(a.globals) != len(b.globals) or len(a.functions) != len(b.functions):
        return False
    for ga, gb in zip(a.globals, b.globals):
        if structural_hash(ga) != structural_hash(gb):
            return False
    for fa, fb in zip(a.functions, b.functions):
        if fa.name != fb.name or fa.ret != fb.ret or fa.params != fb.params:
            return False
        if structural_hash(fa.body) != structural_hash(fb.body):
            return False
    return True
