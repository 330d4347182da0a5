"""The debloating pipeline: advise, decide, validate, retry.

One run takes the original program, its manual, and the observable test
slice.  After optional test augmentation it computes coverage once, asks
the advisors for deletion suggestions and hazard findings, and then
walks the functions in source order.  Each function gets up to three
decide/validate attempts; a candidate is accepted only if the whole
program still typechecks and reproduces every observable test bit for
bit, otherwise the function falls back to its original body.  Accepted
candidates stay in place while later functions are decided, so
validation always covers the combined result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from leader.advisors.debloat import Suggestion, suggest, uncovered_candidates
from leader.advisors.security import SecurityDiff, analyze_unit, diff_findings
from leader.augment import AugmentReport, ProgramDoc, augment_suite
from leader.decision import (
    ReplyError,
    RuleDecision,
    _restore_referenced_decls,
    build_prompt,
    build_retry_prompt,
    decide_rule_based,
    parse_reply,
    render_annotations,
)
from leader.llm import ChatBackend, ChatRequest
from leader.minic import ast, lower, typecheck
from leader.minic.edit import delete_statements, replace_function
from leader.runtime.interp import execute
from leader.runtime.testcase import (
    DEFAULT_STEP_BUDGET,
    NORMAL,
    CoverageReport,
    ExecResult,
    TestCase,
)

MAX_ATTEMPTS = 3

RULES = "rules"
LLM = "llm"

ACCEPTED = "accepted"
FELL_BACK = "fell-back"


class SuiteError(Exception):
    pass


def _run_suite(
    ir, tests: list[TestCase], step_budget: int, jobs: int = 1
) -> tuple[dict[str, ExecResult], CoverageReport]:
    from leader.runtime.interp import execute_with_coverage

    def one(t: TestCase):
        return execute_with_coverage(ir, list(t.argv), t.stdin, step_budget)

    results: dict[str, ExecResult] = {}
    per_test: dict[str, set[int]] = {}
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(one, tests))
    else:
        outs = [one(t) for t in tests]
    for t, (res, visited) in zip(tests, outs):
        results[t.id] = res
        per_test[t.id] = set(visited)
    union: set[int] = set()
    for s in per_test.values():
        union |= s
    return results, CoverageReport(per_test=per_test, union=union)


def verify_suite(
    unit: ast.SourceUnit, tests: list[TestCase], step_budget: int = DEFAULT_STEP_BUDGET
) -> list[TestCase]:
    """Stamp missing expectations; reject tests the original fails."""
    ir = lower(unit)
    out: list[TestCase] = []
    for t in tests:
        res = execute(ir, list(t.argv), t.stdin, step_budget)
        if res.termination != NORMAL:
            raise SuiteError(
                f"test {t.id!r} does not terminate normally on the original "
                f"({res.termination}{': ' + res.trap if res.trap else ''})"
            )
        if t.expected_stdout is not None and t.expected_stdout != res.stdout:
            raise SuiteError(f"test {t.id!r} expected stdout differs on the original")
        if t.expected_exit is not None and t.expected_exit != res.exit_code:
            raise SuiteError(f"test {t.id!r} expected exit code differs on the original")
        out.append(t.with_expected(res.stdout, res.exit_code))
    return out


@dataclass(frozen=True)
class FunctionOutcome:
    name: str
    action: str  # accepted | fell-back
    attempts: int
    deleted: tuple[int, ...]
    retained: tuple[int, ...]
    rewrites: tuple[tuple[str, int], ...]
    notes: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "action": self.action,
            "attempts": self.attempts,
            "deleted": list(self.deleted),
            "retained": list(self.retained),
            "rewrites": [list(r) for r in self.rewrites],
            "notes": list(self.notes),
        }


@dataclass
class DebloatRun:
    program: str
    policy: str
    unit: ast.SourceUnit  # the debloated program
    observed: list[TestCase]  # suite used for validation (augmented)
    outcomes: list[FunctionOutcome]
    deleted_ids: set[int]
    security: SecurityDiff
    augment_report: AugmentReport | None = None
    suggestion_count: int = 0

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "policy": self.policy,
            "suggestions": self.suggestion_count,
            "augment": self.augment_report.to_json() if self.augment_report else None,
            "functions": [o.to_json() for o in self.outcomes],
            "deleted": sorted(self.deleted_ids),
            "security": self.security.to_json(),
        }


def _validate(
    base_unit: ast.SourceUnit,
    fn_name: str,
    candidate: ast.Function,
    tests: list[TestCase],
    baseline: dict[str, ExecResult],
    step_budget: int,
    jobs: int,
) -> tuple[ast.SourceUnit | None, list[str]]:
    """Returns (new unit, []) on success or (None, failing test ids)."""
    cand_unit = replace_function(base_unit, fn_name, candidate)
    diags = typecheck(cand_unit)
    if diags:
        return None, [f"typecheck: {d}" for d in diags[:3]]
    results, _ = _run_suite(lower(cand_unit), tests, step_budget, jobs)
    failing = [t.id for t in tests if results[t.id].key() != baseline[t.id].key()]
    if failing:
        return None, failing
    return cand_unit, []


def _feedback_text(failing: list[str]) -> str:
    if failing and failing[0].startswith("typecheck:"):
        return "the revised program does not compile:\n" + "\n".join(failing)
    shown = ", ".join(failing[:5])
    more = "" if len(failing) <= 5 else f" (and {len(failing) - 5} more)"
    return (
        f"the revised function changes observable behavior: "
        f"test(s) {shown}{more} now produce different output"
    )


def debloat_program(
    unit: ast.SourceUnit,
    tests: list[TestCase],
    doc: ProgramDoc | None = None,
    policy: str = RULES,
    augment: bool = False,
    backend: ChatBackend | None = None,
    seed: int = 0,
    step_budget: int = DEFAULT_STEP_BUDGET,
    k_per_feature: int = 5,
    max_attempts: int = MAX_ATTEMPTS,
    jobs: int = 1,
) -> DebloatRun:
    if policy not in (RULES, LLM):
        raise ValueError(f"unknown policy {policy!r}")
    if policy == LLM and backend is None:
        raise ValueError("llm policy needs a chat backend")

    tests = verify_suite(unit, tests, step_budget)
    augment_report = None
    if augment:
        if doc is None:
            raise ValueError("augmentation needs the program documentation")
        aug_backend = backend if policy == LLM else None
        tests, augment_report = augment_suite(
            unit, doc, tests,
            k_per_feature=k_per_feature, seed=seed,
            step_budget=step_budget, backend=aug_backend,
        )

    baseline, coverage = _run_suite(lower(unit), tests, step_budget, jobs)
    suggestions = suggest(unit, coverage.union)
    original_findings = analyze_unit(unit)
    by_fn: dict[str, list[Suggestion]] = {}
    for s in suggestions:
        by_fn.setdefault(s.function, []).append(s)

    cur_unit = unit
    outcomes: list[FunctionOutcome] = []
    for fn in unit.functions:
        sugs = by_fn.get(fn.name)
        if not sugs:
            continue
        if policy == RULES:
            outcome, cur_unit = _decide_validate_rules(
                cur_unit, fn.name, sugs, tests, baseline, coverage,
                step_budget, max_attempts, jobs,
            )
        else:
            outcome, cur_unit = _decide_validate_llm(
                cur_unit, fn.name, sugs, original_findings, tests, baseline,
                backend, step_budget, max_attempts, jobs,
            )
        outcomes.append(outcome)

    deleted_ids: set[int] = set()
    for fn in unit.functions:
        before = {s.stmt_id for s in ast.function_stmts(fn)}
        after = {s.stmt_id for s in ast.function_stmts(cur_unit.function(fn.name))}
        deleted_ids |= before - after

    final_findings = analyze_unit(cur_unit)
    security = diff_findings(original_findings, final_findings, deleted_ids)

    return DebloatRun(
        program=unit.name,
        policy=policy,
        unit=cur_unit,
        observed=tests,
        outcomes=outcomes,
        deleted_ids=deleted_ids,
        security=security,
        augment_report=augment_report,
        suggestion_count=len(suggestions),
    )


def _decide_validate_rules(
    cur_unit, fn_name, sugs, tests, baseline, coverage,
    step_budget, max_attempts, jobs,
) -> tuple[FunctionOutcome, ast.SourceUnit]:
    notes: list[str] = []
    current_findings = analyze_unit(cur_unit)
    remaining = list(sugs)
    for attempt in range(1, max_attempts + 1):
        candidate, decision = decide_rule_based(
            cur_unit, fn_name, remaining, current_findings
        )
        new_unit, failing = _validate(
            cur_unit, fn_name, candidate, tests, baseline, step_budget, jobs
        )
        notes.extend(decision.notes)
        if new_unit is not None:
            action = FELL_BACK if decision.fell_back else ACCEPTED
            return (
                FunctionOutcome(
                    name=fn_name,
                    action=action,
                    attempts=attempt,
                    deleted=tuple(sorted(decision.deleted)),
                    retained=tuple(sorted(decision.retained)),
                    rewrites=decision.rewrites,
                    notes=tuple(notes),
                ),
                new_unit if not decision.fell_back else cur_unit,
            )
        # drop suggestions the failing tests actually execute, try again
        touched: set[int] = set()
        for tid in failing:
            touched |= coverage.per_test.get(tid, set())
        next_remaining = [s for s in remaining if s.stmt_id not in touched]
        notes.append(
            f"attempt {attempt} failed {len(failing)} test(s); keeping "
            f"{len(remaining) - len(next_remaining)} executed suggestion(s)"
        )
        if len(next_remaining) == len(remaining):
            break
        remaining = next_remaining
    return (
        FunctionOutcome(
            name=fn_name,
            action=FELL_BACK,
            attempts=max_attempts,
            deleted=(),
            retained=tuple(sorted(s.stmt_id for s in sugs)),
            rewrites=(),
            notes=tuple(notes),
        ),
        cur_unit,
    )


def _decide_validate_llm(
    cur_unit, fn_name, sugs, original_findings, tests, baseline,
    backend, step_budget, max_attempts, jobs,
) -> tuple[FunctionOutcome, ast.SourceUnit]:
    fn = cur_unit.function(fn_name)
    fn_findings = [f for f in original_findings if f.function == fn_name]
    annotated = render_annotations(fn, sugs, fn_findings)
    history: list[tuple[str, str]] = [("user", build_prompt(fn_name, annotated))]
    notes: list[str] = []
    for attempt in range(1, max_attempts + 1):
        reply = backend.complete(ChatRequest(messages=tuple(history)))
        history.append(("assistant", reply))
        try:
            candidate = parse_reply(reply, fn_name)
        except ReplyError as exc:
            notes.append(f"attempt {attempt}: {exc}")
            history.append(("user", build_retry_prompt(str(exc))))
            continue
        new_unit, failing = _validate(
            cur_unit, fn_name, candidate, tests, baseline, step_budget, jobs
        )
        if new_unit is not None:
            before = {s.stmt_id for s in ast.function_stmts(fn)}
            after = {
                s.stmt_id
                for s in ast.function_stmts(new_unit.function(fn_name))
            }
            deleted = before - after
            return (
                FunctionOutcome(
                    name=fn_name,
                    action=ACCEPTED,
                    attempts=attempt,
                    deleted=tuple(sorted(deleted)),
                    retained=tuple(
                        sorted(s.stmt_id for s in sugs if s.stmt_id not in deleted)
                    ),
                    rewrites=(),
                    notes=tuple(notes),
                ),
                new_unit,
            )
        notes.append(f"attempt {attempt} failed: {len(failing)} mismatch(es)")
        history.append(("user", build_retry_prompt(_feedback_text(failing))))
    return (
        FunctionOutcome(
            name=fn_name,
            action=FELL_BACK,
            attempts=max_attempts,
            deleted=(),
            retained=tuple(sorted(s.stmt_id for s in sugs)),
            rewrites=(),
            notes=tuple(notes),
        ),
        cur_unit,
    )


# --- coverage-only baselines ---


def baseline_cov(
    unit: ast.SourceUnit,
    tests: list[TestCase],
    step_budget: int = DEFAULT_STEP_BUDGET,
    with_static: bool = False,
) -> tuple[ast.SourceUnit, set[int]]:
    """Delete everything the tests never execute, with no safety net.

    with_static additionally deletes the statically-dead patterns the
    advisor would flag (unused variables, empty conditionals, ...).
    """
    tests = verify_suite(unit, tests, step_budget)
    _, coverage = _run_suite(lower(unit), tests, step_budget)
    if with_static:
        candidates = suggest(unit, coverage.union)
    else:
        candidates = uncovered_candidates(unit, coverage.union)
    suggested: set[int] = {s.stmt_id for s in candidates}
    doomed: set[int] = set()
    for fn in unit.functions:
        ids = suggested & {s.stmt_id for s in ast.function_stmts(fn)}
        doomed |= _restore_referenced_decls(unit, fn.name, ids)
    debloated = delete_statements(unit, doomed)
    diags = typecheck(debloated)
    if diags:
        raise RuntimeError(f"coverage baseline broke the program: {diags[0]}")
    return debloated, doomed
