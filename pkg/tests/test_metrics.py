"""Size, memory, attack-surface, correctness, and score arithmetic."""

from __future__ import annotations

from helpers import deletable_ids
from leader.metrics import (
    MetricsReport,
    attack_surface,
    correctness_on,
    evaluate,
    finding_delta,
    harmonized_score,
    memory_bytes,
    program_size,
    reduction,
)
from leader.minic import ast, parse
from leader.minic.edit import delete_statements
from leader.runtime.testcase import TestCase

SRC = """
int helper(int x) {
    if (x > 3) {
        return x * 2;
    }
    return x;
}

int main() {
    int n = argc();
    print(helper(n));
    if (n > 9) {
        print(100);
        print(200);
    }
    return 0;
}
"""


def test_harmonized_score_balances_the_two_rates():
    assert abs(harmonized_score(0.96, 0.93) - 0.944762) < 1e-4
    assert harmonized_score(1.0, 1.0) == 1.0
    assert harmonized_score(0.5, 0.5) == 0.5
    assert harmonized_score(1.0, 0.0) == 0.0
    assert harmonized_score(0.0, 0.0) == 0.0


def test_harmonized_score_is_symmetric_and_below_the_mean():
    a, b = 0.8, 0.4
    assert harmonized_score(a, b) == harmonized_score(b, a)
    assert harmonized_score(a, b) < (a + b) / 2


def test_reduction_fraction():
    assert abs(reduction(21, 1) - 0.952381) < 1e-3
    assert reduction(10, 10) == 0.0
    assert reduction(10, 0) == 1.0
    assert reduction(0, 0) == 0.0


def test_program_size_counts_statements():
    unit = parse(SRC, "p")
    assert program_size(unit) == ast.unit_size(unit)
    assert program_size(unit) == 9


def test_all_three_sizes_shrink_after_deletion():
    unit = parse(SRC, "p")
    victim = max(deletable_ids(unit))
    smaller = delete_statements(unit, {victim})
    assert program_size(smaller) < program_size(unit)
    assert memory_bytes(smaller) < memory_bytes(unit)

    # dropping the whole guarded print block removes return-reaching windows
    ids = deletable_ids(unit)
    trimmed = delete_statements(unit, set(ids[-3:]))
    assert attack_surface(trimmed) <= attack_surface(unit)


def test_attack_surface_counts_windows_per_function():
    lone = parse("int main() { return 0; }", "p")
    assert attack_surface(lone) >= 1
    unit = parse(SRC, "p")
    assert attack_surface(unit) > attack_surface(lone)


def test_correctness_on_checks_stdout_and_exit():
    unit = parse(SRC, "p")
    good = TestCase("ok", ("p",), expected_stdout=b"1\n", expected_exit=0)
    wrong_out = TestCase("w1", ("p",), expected_stdout=b"2\n", expected_exit=0)
    wrong_exit = TestCase("w2", ("p",), expected_stdout=b"1\n", expected_exit=3)
    passed, total = correctness_on(unit, [good, wrong_out, wrong_exit])
    assert (passed, total) == (1, 3)


def test_finding_delta_reports_new_and_resolved():
    src = """
    int main() {
        int *p = 0;
        if (argc() > 1) {
            p = 0 - 1;
        }
        if (p == 0) {
            return 1;
        }
        return *p;
    }
    """
    unit = parse(src, "p")
    assert finding_delta(unit, unit) == {
        "new": 0,
        "new_high": 0,
        "resolved": 0,
        "resolved_high": 0,
    }
    guard = next(
        s
        for fn in unit.functions
        for s in ast.function_stmts(fn)
        if isinstance(s, ast.If) and not s.els
        and isinstance(s.cond, ast.Binary) and s.cond.op == "=="
    )
    unguarded = delete_statements(unit, {guard.stmt_id})
    delta = finding_delta(unit, unguarded)
    assert delta["new"] >= 1
    assert delta["new_high"] >= 1


def test_finding_delta_counts_resolved_highs():
    src = """
    int main() {
        int v;
        if (argc() > 1) {
            v = 1;
        }
        print(v);
        return 0;
    }
    """
    unit = parse(src, "p")
    fixed = parse(src.replace("int v;", "int v = 0;"), "p")
    delta = finding_delta(unit, fixed)
    assert delta["resolved"] == 1
    assert delta["resolved_high"] == 1
    assert delta["new"] == 0


def _untaken_guard(unit):
    return next(
        s
        for fn in unit.functions
        if fn.name == "main"
        for s in ast.function_stmts(fn)
        if isinstance(s, ast.If)
    )


def test_evaluate_produces_a_full_report():
    unit = parse(SRC, "p")
    tests = [TestCase("t1", ("p",)), TestCase("t2", ("p", "a", "b"))]
    # neither test reaches the n > 9 block, so dropping it preserves behavior
    smaller = delete_statements(unit, {_untaken_guard(unit).stmt_id})
    report = evaluate(unit, smaller, tests, n_mutants=50, seed=0)
    assert report.program == "p"
    assert report.tests_total == 2
    assert report.tests_passed == 2
    assert report.correctness == 1.0
    assert report.mutants_total == 50
    assert 0.0 <= report.robustness <= 1.0
    assert report.harmonized == harmonized_score(report.correctness, report.robustness)
    assert report.size_debloated < report.size_original
    assert report.size_reduction == reduction(
        report.size_original, report.size_debloated
    )


def test_report_round_trips_through_json():
    unit = parse(SRC, "p")
    tests = [TestCase("t1", ("p",))]
    report = evaluate(unit, unit, tests, n_mutants=10, seed=1)
    again = MetricsReport.from_json(report.to_json())
    assert again == report
    import json

    assert MetricsReport.from_json(json.loads(report.dumps())) == report
    assert report.dumps().endswith("\n")
