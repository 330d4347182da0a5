"""Deletion advisor: coverage gaps and statically dead weight."""

from __future__ import annotations

from leader.advisors.debloat import (
    coverage_domain,
    static_candidates,
    suggest,
    uncovered_candidates,
)
from leader.minic import ast, lower, parse
from leader.runtime.interp import execute_with_coverage

SRC = """
int main() {
    int keep = 1;
    if (keep) {
        print(1);
    } else {
        print(2);
    }
    return 0;
}
"""


def run_covered(unit, argv=("p",), stdin=b""):
    _, visited = execute_with_coverage(lower(unit), list(argv), stdin)
    return set(visited)


def find_stmt(unit, needle):
    from leader.minic.printer import print_unit_with_linemap

    text, linemap = print_unit_with_linemap(unit)
    lines = text.split("\n")
    hits = [sid for sid, ln in linemap.items() if needle in lines[ln - 1]]
    assert len(hits) == 1
    return hits[0]


def test_coverage_domain_is_every_function_statement():
    unit = parse(SRC, "t")
    dom = coverage_domain(unit)
    assert dom == {s.stmt_id for s in ast.function_stmts(unit.functions[0])}


def test_uncovered_statements_are_suggested():
    unit = parse(SRC, "t")
    covered = run_covered(unit)
    sugs = uncovered_candidates(unit, covered)
    assert {s.stmt_id for s in sugs} == {find_stmt(unit, "print(2)")}
    assert all(s.reason == "uncovered" and s.function == "main" for s in sugs)


def test_evaluating_a_condition_covers_the_compound_itself():
    text = """
    int main() {
        int x = 0;
        if (x) {
            print(1);
            print(2);
        }
        return 0;
    }
    """
    unit = parse(text, "t")
    covered = run_covered(unit)
    assert find_stmt(unit, "if (x)") in covered
    sugs = uncovered_candidates(unit, covered)
    assert {s.stmt_id for s in sugs} == {
        find_stmt(unit, "print(1)"),
        find_stmt(unit, "print(2)"),
    }


def test_children_of_uncovered_compounds_are_not_suggested_twice():
    text = """
    int main() {
        int x = 0;
        if (x) {
            if (1) {
                print(1);
            }
        }
        return 0;
    }
    """
    unit = parse(text, "t")
    covered = run_covered(unit)
    sugs = uncovered_candidates(unit, covered)
    # the inner if is the deletion root; its child print is implied
    assert {s.stmt_id for s in sugs} == {find_stmt(unit, "if (1)")}


def test_fully_covered_program_yields_no_coverage_suggestions():
    unit = parse("int main() { print(1); return 0; }", "t")
    assert uncovered_candidates(unit, run_covered(unit)) == []


def test_unused_variable_is_static_dead_weight():
    unit = parse(
        "int main() { int unused = 5; print(1); return 0; }", "t"
    )
    (s,) = static_candidates(unit)
    assert s.reason == "unused-var"
    assert s.stmt_id == find_stmt(unit, "int unused")


def test_unused_variable_with_call_initializer_is_kept():
    # the initializer may have effects; deletion is not free
    unit = parse(
        "int main() { int unused = getchar(); print(1); return 0; }", "t"
    )
    assert static_candidates(unit) == []


def test_used_variable_is_not_suggested():
    unit = parse("int main() { int v = 5; return v; }", "t")
    assert static_candidates(unit) == []


def test_empty_conditional_is_dead_weight():
    unit = parse(
        "int main() { int x = 1; if (x > 0) { } return 0; }", "t"
    )
    reasons = {s.reason for s in static_candidates(unit)}
    assert "no-effect-cond" in reasons


def test_empty_conditional_with_call_condition_is_kept():
    unit = parse(
        "int main() { if (getchar() > 0) { } return 0; }", "t"
    )
    assert static_candidates(unit) == []


def test_never_entered_loop_is_dead_weight():
    unit = parse("int main() { while (0) { } return 0; }", "t")
    (s,) = static_candidates(unit)
    assert s.reason == "no-effect-cond"


def test_empty_loop_with_true_condition_is_not_suggested():
    # deleting a potentially infinite loop would change termination
    unit = parse("int main() { int x = 1; while (x) { } return 0; }", "t")
    reasons = {s.reason for s in static_candidates(unit)}
    assert "no-effect-cond" not in reasons


def test_unreferenced_label_is_dead_weight():
    unit = parse("int main() { spare: return 0; }", "t")
    (s,) = static_candidates(unit)
    assert s.reason == "unused-label"


def test_referenced_label_is_kept():
    unit = parse(
        "int main() { int i = 0; top: i = i + 1; if (i < 2) { goto top; } return i; }",
        "t",
    )
    assert static_candidates(unit) == []


def test_suggest_merges_and_sorts_with_coverage_priority():
    text = """
    int main() {
        int unused = 5;
        int x = 0;
        if (x) {
            print(9);
        }
        return 0;
    }
    """
    unit = parse(text, "t")
    covered = run_covered(unit)
    sugs = suggest(unit, covered)
    ids = [s.stmt_id for s in sugs]
    assert ids == sorted(ids) and len(ids) == len(set(ids))
    by_id = {s.stmt_id: s.reason for s in sugs}
    assert by_id[find_stmt(unit, "int unused")] == "unused-var"
    assert by_id[find_stmt(unit, "print(9)")] == "uncovered"
    assert set(by_id) == {find_stmt(unit, "int unused"), find_stmt(unit, "print(9)")}


def test_coverage_evidence_wins_over_pattern_evidence():
    text = """
    int main() {
        int x = 0;
        if (x) {
            int unused = 5;
        }
        return 0;
    }
    """
    unit = parse(text, "t")
    sugs = suggest(unit, run_covered(unit))
    (s,) = [s for s in sugs if s.stmt_id == find_stmt(unit, "int unused")]
    assert s.reason == "uncovered"
