"""Decision maker: turn advisor output into a revised function.

Two interchangeable strategies exist.  The rule-based one deletes every
suggested statement, then walks back anything that a re-run of the
static checkers blames on the deletions, preferring a declaration
rewrite over restoring statements when the hazard is an uninitialized
read whose deleted writers all stored literals.  The chat-based one
renders the advice as trailing comments on the function source and asks
a model for the revised function; parsing and sanity checks live here,
the conversation loop lives in the pipeline.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from importlib import resources
from string import Template

from leader.advisors.cfg import expr_reads
from leader.advisors.debloat import Suggestion
from leader.advisors.security import Finding, analyze_unit, diff_findings
from leader.minic import ast, typecheck
from leader.minic.edit import delete_statements
from leader.minic.parser import ParseError, parse_function_text
from leader.minic.printer import print_function_with_linemap

DEBLOAT_TAG = "[DEBLOAT]"
SECURITY_TAG = "[SECURITY]"
_ANNOT_RE = re.compile(r" // \[(?:DEBLOAT|SECURITY)\] .*$")


def _template(name: str) -> Template:
    text = (resources.files("leader") / "templates" / name).read_text("utf-8")
    return Template(text)


# --- annotated source ---


def render_annotations(
    fn: ast.Function,
    suggestions: list[Suggestion],
    findings: list[Finding],
) -> str:
    """Function source with advice as trailing comments."""
    text, linemap = print_function_with_linemap(fn)
    notes: dict[int, list[str]] = {}
    for s in sorted(suggestions, key=lambda s: s.stmt_id):
        line = linemap.get(s.stmt_id)
        if line is not None:
            notes.setdefault(line, []).append(f"{DEBLOAT_TAG} {s.reason}")
    for f in findings:
        if f.stmt_id is None:
            continue
        line = linemap.get(f.stmt_id)
        if line is not None:
            notes.setdefault(line, []).append(f"{SECURITY_TAG} {f.message}")
    lines = text.split("\n")
    for line_no, items in notes.items():
        lines[line_no - 1] += " // " + "; ".join(items)
    return "\n".join(lines)


def strip_annotations(text: str) -> str:
    """Exact inverse of render_annotations for unannotated source."""
    return "\n".join(_ANNOT_RE.sub("", line) for line in text.split("\n"))


# --- prompts and replies ---


def build_prompt(fn_name: str, annotated_source: str, advice: str = "") -> str:
    return _template("decide.txt").substitute(
        function_name=fn_name,
        annotated_source=annotated_source,
        advice=advice,
    )


def build_retry_prompt(feedback: str) -> str:
    return _template("decide_retry.txt").substitute(feedback=feedback)


class ReplyError(Exception):
    pass


class NoCodeBlock(ReplyError):
    pass


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def parse_reply(text: str, expected_name: str) -> ast.Function:
    """Extract and parse the last fenced code block of a chat reply."""
    blocks = _FENCE_RE.findall(text)
    if not blocks:
        raise NoCodeBlock("reply contains no fenced code block")
    body = strip_annotations(blocks[-1]).strip()
    try:
        fn = parse_function_text(body)
    except ParseError as exc:
        raise ReplyError(f"reply does not parse: {exc}") from exc
    if fn.name != expected_name:
        raise ReplyError(
            f"reply defines '{fn.name}' instead of '{expected_name}'"
        )
    return fn


# --- rule-based strategy ---


@dataclass(frozen=True)
class RuleDecision:
    function: str
    deleted: frozenset[int]
    retained: frozenset[int]  # suggested ids kept after walk-back
    rewrites: tuple[tuple[str, int], ...]  # declaration inits added
    fell_back: bool
    notes: tuple[str, ...]


def _subtree_names(stmt: ast.Stmt) -> set[str]:
    names: set[str] = set()

    def expr(e: ast.Expr | None):
        if e is None:
            return
        if isinstance(e, (ast.Var, ast.Index)):
            names.add(e.name)
        if isinstance(e, ast.Index):
            expr(e.index)
        elif isinstance(e, ast.Unary):
            expr(e.operand)
        elif isinstance(e, ast.Binary):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, ast.Call):
            for a in e.args:
                expr(a)

    for s in ast.iter_stmts(stmt):
        if isinstance(s, ast.VarDecl):
            expr(s.init)
        elif isinstance(s, ast.Assign):
            expr(s.target)
            expr(s.value)
        elif isinstance(s, ast.If):
            expr(s.cond)
        elif isinstance(s, ast.While):
            expr(s.cond)
        elif isinstance(s, ast.For):
            for e in (s.init.target, s.init.value, s.cond, s.step.target, s.step.value):
                expr(e)
        elif isinstance(s, ast.Switch):
            expr(s.expr)
        elif isinstance(s, ast.Return):
            expr(s.value)
        elif isinstance(s, ast.ExprStmt):
            expr(s.expr)
    return names


_CONTROL = (ast.Return, ast.Break, ast.Continue, ast.Goto)


def _attribute_culprits(
    fn: ast.Function, deleted: set[int], subject: str | None
) -> set[int]:
    """Deleted statements plausibly responsible for a finding on subject."""
    if subject is None:
        return set()
    stmt_map = {s.stmt_id: s for s in ast.function_stmts(fn)}
    parents = ast.parent_map(fn)
    culprits: set[int] = set()
    for sid in deleted:
        s = stmt_map.get(sid)
        if s is None:
            continue
        if subject in _subtree_names(s):
            culprits.add(sid)
        elif isinstance(s, _CONTROL):
            outer = ast.enclosing_stmt(parents, s)
            while outer is not None:
                if isinstance(outer, ast.If):
                    reads: list[str] = []
                    expr_reads(outer.cond, reads)
                    if subject in reads:
                        culprits.add(sid)
                        break
                outer = ast.enclosing_stmt(parents, outer)
    return culprits


def _literal_writes(fn: ast.Function, culprits: set[int], subject: str) -> list[int] | None:
    """Literal values the culprits assigned to subject.

    Returns None when a culprit writes subject a non-literal value, in
    which case a declaration rewrite would be unsound.
    """
    stmt_map = {s.stmt_id: s for s in ast.function_stmts(fn)}
    lits: list[int] = []
    for sid in sorted(culprits):
        root = stmt_map.get(sid)
        if root is None:
            continue
        for s in ast.iter_stmts(root):
            target = None
            if isinstance(s, ast.Assign):
                target, value = s.target, s.value
            elif isinstance(s, ast.VarDecl) and s.init is not None:
                target, value = ast.Var(s.name), s.init
            if (
                target is not None
                and isinstance(target, ast.Var)
                and target.name == subject
            ):
                if isinstance(value, ast.IntLit):
                    lits.append(value.value)
                else:
                    return None
    return lits


def _restore_referenced_decls(
    unit: ast.SourceUnit, fn_name: str, deleted: set[int]
) -> set[int]:
    """Un-delete declarations whose names the surviving code still uses."""
    fn = unit.function(fn_name)
    stmt_map = {s.stmt_id: s for s in ast.function_stmts(fn)}
    deleted = set(deleted)
    while True:
        cand = delete_statements(unit, deleted).function(fn_name)
        live = _subtree_names(cand.body)
        needed = {
            sid
            for sid in deleted
            if isinstance(stmt_map.get(sid), ast.VarDecl)
            and stmt_map[sid].name in live
        }
        if not needed:
            return deleted
        deleted -= needed


def _apply_rewrites(fn: ast.Function, rewrites: dict[str, int]):
    for s in ast.function_stmts(fn):
        if isinstance(s, ast.VarDecl) and s.name in rewrites:
            s.init = ast.IntLit(rewrites[s.name])


def decide_rule_based(
    unit: ast.SourceUnit,
    fn_name: str,
    suggestions: list[Suggestion],
    original_findings: list[Finding] | None = None,
) -> tuple[ast.Function, RuleDecision]:
    """Delete what the advisors suggested, then walk back what breaks."""
    if original_findings is None:
        original_findings = analyze_unit(unit)
    fn = unit.function(fn_name)
    suggested = {s.stmt_id for s in suggestions}
    cur = set(suggested)
    rewrites: dict[str, int] = {}
    notes: list[str] = []
    seen_states: set[tuple] = set()

    for _ in range(len(suggested) + 2):
        cur = _restore_referenced_decls(unit, fn_name, cur)
        state = (frozenset(cur), tuple(sorted(rewrites.items())))
        if state in seen_states:
            break
        seen_states.add(state)

        cand_unit = delete_statements(unit, cur)
        if rewrites:
            # make sure the declarations carrying inits survived
            decl_ids = {
                s.stmt_id
                for s in ast.function_stmts(fn)
                if isinstance(s, ast.VarDecl) and s.name in rewrites
            }
            if decl_ids & cur:
                cur -= decl_ids
                cand_unit = delete_statements(unit, cur)
            _apply_rewrites(cand_unit.function(fn_name), rewrites)
        if typecheck(cand_unit):
            notes.append("deletion broke the type checker; keeping the original")
            break

        candidate_findings = analyze_unit(cand_unit)
        diff = diff_findings(original_findings, candidate_findings, cur)
        new_high = [f for f in diff.new_high if f.function == fn_name]
        if not new_high:
            return cand_unit.function(fn_name), RuleDecision(
                function=fn_name,
                deleted=frozenset(cur),
                retained=frozenset(suggested - cur),
                rewrites=tuple(sorted(rewrites.items())),
                fell_back=False,
                notes=tuple(notes),
            )

        blocked = False
        for finding in new_high:
            culprits = _attribute_culprits(fn, cur, finding.subject)
            if not culprits:
                notes.append(
                    f"cannot attribute new {finding.checker} on "
                    f"'{finding.subject}'; keeping the original"
                )
                blocked = True
                break
            if finding.checker == "UninitRead":
                lits = _literal_writes(fn, culprits, finding.subject)
                if lits:
                    value = lits[0] if len(set(lits)) == 1 else 0
                    rewrites[finding.subject] = value
                    notes.append(
                        f"initialized '{finding.subject}' to {value} to stand in "
                        f"for deleted assignments"
                    )
                    continue
            cur -= culprits
            notes.append(
                f"retained {len(culprits)} statement(s) implicated in a new "
                f"{finding.checker} on '{finding.subject}'"
            )
        if blocked:
            break

    return copy.deepcopy(fn), RuleDecision(
        function=fn_name,
        deleted=frozenset(),
        retained=frozenset(suggested),
        rewrites=(),
        fell_back=True,
        notes=tuple(notes),
    )
