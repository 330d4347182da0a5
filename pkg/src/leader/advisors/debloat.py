"""Deletion advisor: what the observed tests never touched, plus dead weight.

Suggestions are statement ids.  Deleting a compound statement deletes its
whole subtree, so children of an unexecuted compound are not suggested
separately: a statement is a coverage candidate only when its nearest
enclosing statement did run.
"""

from __future__ import annotations

from dataclasses import dataclass

from leader.minic import ast

UNCOVERED = "uncovered"
UNUSED_VAR = "unused-var"
NULL_STMT = "null-stmt"
NO_EFFECT_COND = "no-effect-cond"
UNUSED_LABEL = "unused-label"


@dataclass(frozen=True)
class Suggestion:
    stmt_id: int
    reason: str
    function: str


def coverage_domain(unit: ast.SourceUnit) -> set[int]:
    """Statement ids that can appear in an execution trace."""
    ids: set[int] = set()
    for fn in unit.functions:
        for s in ast.function_stmts(fn):
            ids.add(s.stmt_id)
    return ids


def uncovered_candidates(unit: ast.SourceUnit, covered: set[int]) -> list[Suggestion]:
    out: list[Suggestion] = []
    for fn in unit.functions:
        parents = ast.parent_map(fn)
        for s in ast.function_stmts(fn):
            if s.stmt_id in covered:
                continue
            outer = ast.enclosing_stmt(parents, s)
            if outer is None or outer.stmt_id in covered:
                out.append(Suggestion(s.stmt_id, UNCOVERED, fn.name))
    return out


def _expr_has_call(e: ast.Expr | None) -> bool:
    if e is None:
        return False
    if isinstance(e, ast.Call):
        return True
    if isinstance(e, ast.Unary):
        return _expr_has_call(e.operand)
    if isinstance(e, ast.Binary):
        return _expr_has_call(e.left) or _expr_has_call(e.right)
    if isinstance(e, ast.Index):
        return _expr_has_call(e.index)
    return False


def _block_is_inert(b: ast.Block | None) -> bool:
    return b is None or all(isinstance(s, ast.Null) for s in b.stmts)


def _name_refs(fn: ast.Function, name: str) -> int:
    """Occurrences of the name in any expression of the function."""
    count = 0

    def walk(e: ast.Expr | None):
        nonlocal count
        if e is None:
            return
        if isinstance(e, (ast.Var, ast.Index)) and e.name == name:
            count += 1
        if isinstance(e, ast.Unary):
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
        if isinstance(s, ast.VarDecl):
            if s.name != name:
                walk(s.init)
        elif isinstance(s, ast.Assign):
            walk(s.target)
            walk(s.value)
        elif isinstance(s, ast.If):
            walk(s.cond)
        elif isinstance(s, ast.While):
            walk(s.cond)
        elif isinstance(s, ast.For):
            walk(s.init.target)
            walk(s.init.value)
            walk(s.cond)
            walk(s.step.target)
            walk(s.step.value)
        elif isinstance(s, ast.Switch):
            walk(s.expr)
        elif isinstance(s, ast.Return):
            walk(s.value)
        elif isinstance(s, ast.ExprStmt):
            walk(s.expr)
    return count


def static_candidates(unit: ast.SourceUnit) -> list[Suggestion]:
    """Dead weight visible without running anything."""
    out: list[Suggestion] = []
    for fn in unit.functions:
        gotos = {
            s.label for s in ast.function_stmts(fn) if isinstance(s, ast.Goto)
        }
        for s in ast.function_stmts(fn):
            if isinstance(s, ast.VarDecl):
                if _name_refs(fn, s.name) == 0 and not _expr_has_call(s.init):
                    out.append(Suggestion(s.stmt_id, UNUSED_VAR, fn.name))
            elif isinstance(s, ast.Null):
                out.append(Suggestion(s.stmt_id, NULL_STMT, fn.name))
            elif isinstance(s, ast.If):
                if (
                    not _expr_has_call(s.cond)
                    and _block_is_inert(s.then)
                    and _block_is_inert(s.els)
                ):
                    out.append(Suggestion(s.stmt_id, NO_EFFECT_COND, fn.name))
            elif isinstance(s, ast.While):
                if not _expr_has_call(s.cond) and _block_is_inert(s.body):
                    # an inert body cannot break out; only suggest loops
                    # that cannot spin forever
                    if isinstance(s.cond, ast.IntLit) and s.cond.value == 0:
                        out.append(Suggestion(s.stmt_id, NO_EFFECT_COND, fn.name))
            elif isinstance(s, ast.Label):
                if s.name not in gotos:
                    out.append(Suggestion(s.stmt_id, UNUSED_LABEL, fn.name))
    return out


def suggest(unit: ast.SourceUnit, covered: set[int]) -> list[Suggestion]:
    """Merged, deduplicated suggestions in statement-id order."""
    merged: dict[int, Suggestion] = {}
    for s in static_candidates(unit):
        merged[s.stmt_id] = s
    for s in uncovered_candidates(unit, covered):
        merged[s.stmt_id] = s  # coverage evidence wins over pattern evidence
    return [merged[i] for i in sorted(merged)]
