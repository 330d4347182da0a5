"""Tree edits that preserve statement identity.

delete_statements removes whole subtrees and leaves every surviving id
untouched.  replace_function swaps in a new body and re-anchors ids by
exact structural matching, so statements that survived an edit keep the
ids the rest of the pipeline (coverage, findings, diffs) refers to.
"""

from __future__ import annotations

import copy

from leader.minic import ast
from leader.minic.ast import structural_hash


def delete_statements(unit: ast.SourceUnit, ids: set[int]) -> ast.SourceUnit:
    """Return a copy of the unit without the statements in ids.

    Deleting a compound statement removes its whole subtree; deleting a
    Case removes the label only (its arm statements are siblings).
    """
    out = copy.deepcopy(unit)
    out.globals = [g for g in out.globals if g.stmt_id not in ids]

    def prune(block: ast.Block):
        kept = []
        for s in block.stmts:
            if s.stmt_id in ids:
                continue
            for child in ast.child_stmts(s):
                if isinstance(child, ast.Block):
                    prune(child)
            kept.append(s)
        block.stmts = kept

    for fn in out.functions:
        prune(fn.body)
    return out


def subtree_ids(stmt: ast.Stmt) -> set[int]:
    return {s.stmt_id for s in ast.iter_stmts(stmt)}


def replace_function(
    unit: ast.SourceUnit, name: str, new_fn: ast.Function
) -> ast.SourceUnit:
    """Return a copy of the unit with function `name` replaced.

    Statements of new_fn that structurally match statements of the old
    body inherit the old StmtId (first unmatched match wins, in
    pre-order); everything else receives a fresh id.  Ids are never
    reused, so deleted statements stay distinguishable in diffs.
    """
    out = copy.deepcopy(unit)
    old = out.function(name)
    replacement = copy.deepcopy(new_fn)
    replacement.name = name

    pool: dict[str, list[int]] = {}
    for s in ast.iter_stmts(old.body):
        pool.setdefault(structural_hash(s), []).append(s.stmt_id)

    next_id = out.next_stmt_id

    def assign(s: ast.Stmt):
        nonlocal next_id
        bucket = pool.get(structural_hash(s))
        if bucket:
            s.stmt_id = bucket.pop(0)
        else:
            s.stmt_id = next_id
            next_id += 1
        for child in ast.child_stmts(s):
            assign(child)

    assign(replacement.body)
    out.next_stmt_id = next_id
    for i, fn in enumerate(out.functions):
        if fn.name == name:
            out.functions[i] = replacement
            break
    else:
        raise KeyError(name)
    return out
