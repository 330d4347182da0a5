"""The statement-coverage contract both engines must honor.

Visits are recorded per statement entry: loop headers on every
iteration, switch case labels when their guard is evaluated or crossed
by fallthrough, and the landing label on a default match. The step
count equals the length of the visit trace, so budget exhaustion is a
coverage-visible event.
"""

from __future__ import annotations

from leader.minic import ast, lower, parse
from leader.runtime.interp import execute_with_coverage, run_tests
from leader.runtime.testcase import TestCase


def visits(text, argv=("p",), stdin=b"", budget=100000):
    unit = parse(text, "t")
    result, visited = execute_with_coverage(lower(unit), list(argv), stdin, budget)
    return unit, result, visited


def stmt_by_text(unit, needle):
    """The statement whose printed form contains the needle."""
    from leader.minic.printer import print_unit_with_linemap

    text, linemap = print_unit_with_linemap(unit)
    lines = text.split("\n")
    hits = [
        sid for sid, line_no in linemap.items() if needle in lines[line_no - 1]
    ]
    assert len(hits) == 1, f"{needle!r} matched {len(hits)} statements"
    return hits[0]


def test_steps_equal_visit_trace_length():
    _, res, visited = visits(
        "int main() { int i; int acc = 0; for (i = 0; i < 7; i = i + 1)"
        " { acc = acc + i; } return acc; }"
    )
    assert res.steps == len(visited)


def test_loop_header_is_visited_every_iteration():
    unit, _, visited = visits(
        "int main() { int i = 0; while (i < 3) { i = i + 1; } return i; }"
    )
    header = stmt_by_text(unit, "while (i < 3)")
    assert visited.count(header) == 4  # three entries plus the failing check


def test_sequential_statements_visited_in_order():
    unit, _, visited = visits(
        "int main() { int a = 1; int b = 2; return a + b; }"
    )
    ids = [stmt_by_text(unit, t) for t in ("int a = 1", "int b = 2", "return a + b")]
    assert visited == ids


def test_untaken_branch_is_not_visited():
    unit, _, visited = visits(
        "int main() { int x = 1; if (x) { print(1); } else { print(2); } return 0; }"
    )
    assert stmt_by_text(unit, "print(1)") in visited
    assert stmt_by_text(unit, "print(2)") not in visited


def test_switch_dispatch_visits_guards_in_body_order_until_match():
    text = """
    int main() {
        switch (5) {
        case 1:
            print(1);
            break;
        case 5:
            print(5);
            break;
        case 9:
            print(9);
        }
        return 0;
    }
    """
    unit, _, visited = visits(text)
    case1 = stmt_by_text(unit, "case 1")
    case5 = stmt_by_text(unit, "case 5")
    case9 = stmt_by_text(unit, "case 9")
    assert case1 in visited and case5 in visited
    assert case9 not in visited  # dispatch stopped at the match
    assert stmt_by_text(unit, "print(5)") in visited
    assert stmt_by_text(unit, "print(1)") not in visited


def test_switch_skips_default_guard_during_dispatch_but_lands_on_it():
    text = """
    int main() {
        switch (9) {
        case 1:
            print(1);
            break;
        default:
            print(0);
        case 2:
            print(2);
        }
        return 0;
    }
    """
    unit, _, visited = visits(text)
    default = stmt_by_text(unit, "default:")
    case2 = stmt_by_text(unit, "case 2")
    assert default in visited       # landed on it after no case matched
    assert case2 in visited         # crossed by fallthrough out of default
    # guard checks ran for case 1 and case 2 before landing on default
    assert visited.index(stmt_by_text(unit, "case 1")) < visited.index(default)


def test_fallthrough_visits_crossed_labels():
    text = """
    int main() {
        int r = 0;
        switch (1) {
        case 1:
            r = r + 1;
        case 2:
            r = r + 10;
        }
        return r;
    }
    """
    unit, res, visited = visits(text)
    assert res.exit_code == 11
    case2 = stmt_by_text(unit, "case 2")
    body1 = stmt_by_text(unit, "r = r + 1;")
    body2 = stmt_by_text(unit, "r = r + 10;")
    # dispatch stops at the case 1 match, so the only case 2 visit is
    # the fallthrough crossing, after the first arm has run
    assert visited.count(case2) == 1
    assert visited.index(body1) < visited.index(case2) < visited.index(body2)


def test_covered_label_with_uncovered_arm():
    # dispatch alone covers every guard before the match, so a label can
    # be covered while the statements of its arm never run
    text = """
    int main() {
        int r = 0;
        switch (2) {
        case 1:
            r = 100;
            break;
        case 2:
            r = 1;
        }
        return r;
    }
    """
    unit, _, visited = visits(text)
    assert stmt_by_text(unit, "case 1") in visited
    assert stmt_by_text(unit, "r = 100") not in visited


def test_for_loop_header_and_clauses_attributed_to_the_for():
    unit, _, visited = visits(
        "int main() { int i; int n = 0; for (i = 0; i < 2; i = i + 1)"
        " { n = n + 1; } return n; }"
    )
    loop = stmt_by_text(unit, "for (")
    # init + 3 condition checks + 2 steps all chalked up to the for
    assert visited.count(loop) >= 3


def test_step_budget_cuts_the_trace_exactly():
    unit, res, visited = visits(
        "int main() { while (1) { } return 0; }", budget=25
    )
    assert res.steps == 25 and len(visited) == 25


def test_run_tests_collects_per_test_and_union():
    unit = parse(
        "int main() { if (argc() > 1) { print(1); } else { print(2); } return 0; }",
        "t",
    )
    tests = [
        TestCase("a", ("p", "x")),
        TestCase("b", ("p",)),
    ]
    results, cov = run_tests(lower(unit), tests)
    assert results["a"].stdout == b"1\n"
    assert results["b"].stdout == b"2\n"
    assert cov.per_test["a"] != cov.per_test["b"]
    assert cov.union == cov.per_test["a"] | cov.per_test["b"]
    then_id = stmt_by_text(unit, "print(1)")
    assert then_id in cov.per_test["a"]
    assert then_id not in cov.per_test["b"]


def test_trap_ends_the_trace_at_the_trapping_statement():
    unit, res, visited = visits(
        "int main() { int a[2]; a[0] = 1; a[5] = 2; return 0; }"
    )
    assert res.termination == "trap"
    assert visited[-1] == stmt_by_text(unit, "a[5] = 2")
