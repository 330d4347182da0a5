"""Decision maker: annotated prompts, reply parsing, rule-based edits."""

from __future__ import annotations

import pytest

from leader.advisors.debloat import Suggestion, suggest
from leader.advisors.security import analyze_unit
from leader.decision import (
    NoCodeBlock,
    ReplyError,
    build_prompt,
    build_retry_prompt,
    decide_rule_based,
    parse_reply,
    render_annotations,
    strip_annotations,
)
from leader.minic import ast, lower, parse
from leader.minic.printer import print_function
from leader.runtime.interp import execute_with_coverage


def find_stmt(unit, needle):
    from leader.minic.printer import print_unit_with_linemap

    text, linemap = print_unit_with_linemap(unit)
    lines = text.split("\n")
    hits = [sid for sid, ln in linemap.items() if needle in lines[ln - 1]]
    assert len(hits) == 1
    return hits[0]


def covered(unit, argv=("p",), stdin=b""):
    _, visited = execute_with_coverage(lower(unit), list(argv), stdin)
    return set(visited)


# --- annotations ---


def test_annotations_mark_suggested_lines():
    unit = parse(
        "int main() { int x = 0; if (x) { print(1); } return 0; }", "t"
    )
    fn = unit.functions[0]
    sugs = [Suggestion(find_stmt(unit, "print(1)"), "uncovered", "main")]
    text = render_annotations(fn, sugs, [])
    (tagged,) = [ln for ln in text.split("\n") if "[DEBLOAT]" in ln]
    assert "print(1);" in tagged and "uncovered" in tagged


def test_annotations_mark_finding_lines():
    unit = parse("int main() { int u; return u; }", "t")
    fn = unit.functions[0]
    findings = [f for f in analyze_unit(unit) if f.stmt_id is not None]
    text = render_annotations(fn, [], findings)
    assert any("[SECURITY]" in ln and "return u;" in ln for ln in text.split("\n"))


def test_strip_is_the_exact_inverse_of_render():
    unit = parse(
        """
        int main() {
            int u;
            int x = 0;
            if (x) { print(1); }
            return u;
        }
        """,
        "t",
    )
    fn = unit.functions[0]
    sugs = [Suggestion(find_stmt(unit, "print(1)"), "uncovered", "main")]
    findings = [f for f in analyze_unit(unit) if f.stmt_id is not None]
    annotated = render_annotations(fn, sugs, findings)
    assert annotated != print_function(fn)
    assert strip_annotations(annotated) == print_function(fn)


def test_strip_leaves_plain_source_alone():
    text = "int f() {\n    return 1; // ordinary comment\n}"
    assert strip_annotations(text) == text


# --- prompts and reply parsing ---


def test_prompt_carries_function_name_and_source():
    prompt = build_prompt("helper", "int helper() {\n}", advice="be careful")
    assert "helper" in prompt and "be careful" in prompt
    assert "[DEBLOAT]" in prompt  # the instructions explain the tags


def test_retry_prompt_carries_feedback():
    prompt = build_retry_prompt("test t1 now produces different output")
    assert "rejected" in prompt and "test t1" in prompt


def test_parse_reply_takes_the_last_fenced_block():
    reply = (
        "Here is my first attempt:\n```\nint f() {\n    return 1;\n}\n```\n"
        "Actually, use this:\n```c\nint f() {\n    return 2;\n}\n```\n"
    )
    fn = parse_reply(reply, "f")
    assert "return 2;" in print_function(fn)


def test_parse_reply_strips_annotations():
    reply = "```\nint f() {\n    return 1; // [DEBLOAT] uncovered\n}\n```"
    fn = parse_reply(reply, "f")
    assert "[DEBLOAT]" not in print_function(fn)


def test_parse_reply_without_fence_raises():
    with pytest.raises(NoCodeBlock):
        parse_reply("int f() { return 1; }", "f")


def test_parse_reply_with_bad_code_raises():
    with pytest.raises(ReplyError):
        parse_reply("```\nint f( { oops\n```", "f")


def test_parse_reply_with_wrong_name_raises():
    with pytest.raises(ReplyError) as exc:
        parse_reply("```\nint g() {\n    return 1;\n}\n```", "f")
    assert "'g'" in str(exc.value) and "'f'" in str(exc.value)


# --- rule-based decisions ---


def test_plain_deletion_when_nothing_breaks():
    unit = parse(
        """
        int main() {
            int x = 0;
            if (x) {
                print(9);
            }
            return 0;
        }
        """,
        "t",
    )
    sugs = suggest(unit, covered(unit))
    fn, decision = decide_rule_based(unit, "main", sugs)
    assert not decision.fell_back
    assert decision.deleted == {s.stmt_id for s in sugs}
    assert "print(9)" not in print_function(fn)


def test_walk_back_restores_null_guard():
    # deleting the guard would create a new high NullDeref; the decision
    # keeps it even though the tests never entered it
    unit = parse(
        """
        int get(int *p) {
            if (p == 0) {
                return 7;
            }
            return *p;
        }
        int main() {
            int v = 3;
            print(get(&v));
            return 0;
        }
        """,
        "t",
    )
    guard = find_stmt(unit, "if (p == 0)")
    sugs = [Suggestion(guard, "uncovered", "get")]
    fn, decision = decide_rule_based(unit, "get", sugs)
    assert not decision.fell_back
    assert decision.deleted == frozenset()
    assert decision.retained == {guard}
    assert "p == 0" in print_function(fn)


def test_uninit_band_aid_rewrites_the_declaration():
    # deleting the only write on the case-9 path would leave a read of
    # an unassigned tmp; since that write stored a literal, the decision
    # moves the literal into the declaration instead of restoring it
    unit = parse(
        """
        int classify(int c) {
            int tmp;
            switch (c) {
            default:
                tmp = 0;
                break;
            case 9:
                tmp = 1;
            }
            return tmp;
        }
        int main() {
            print(classify(0));
            return 0;
        }
        """,
        "t",
    )
    arm = find_stmt(unit, "tmp = 1")
    sugs = [Suggestion(arm, "uncovered", "classify")]
    fn, decision = decide_rule_based(unit, "classify", sugs)
    assert not decision.fell_back
    assert dict(decision.rewrites) == {"tmp": 1}
    assert arm in decision.deleted
    text = print_function(fn)
    assert "int tmp = 1;" in text
    assert "tmp = 1;" not in text.replace("int tmp = 1;", "")


def test_conflicting_literals_rewrite_to_zero():
    unit = parse(
        """
        int f(int c) {
            int r;
            if (c == 1) {
                r = 5;
            }
            if (c == 2) {
                r = 8;
            }
            r = 3;
            return r;
        }
        int main() { print(f(0)); return 0; }
        """,
        "t",
    )
    sugs = [
        Suggestion(find_stmt(unit, "if (c == 1)"), "uncovered", "f"),
        Suggestion(find_stmt(unit, "if (c == 2)"), "uncovered", "f"),
        Suggestion(find_stmt(unit, "r = 3"), "uncovered", "f"),
    ]
    fn, decision = decide_rule_based(unit, "f", sugs)
    assert not decision.fell_back
    assert dict(decision.rewrites) == {"r": 0}
    assert "int r = 0;" in print_function(fn)
    assert "initialized 'r' to 0" in " ".join(decision.notes)


def test_no_suggestions_is_a_noop():
    unit = parse("int main() { return 0; }", "t")
    fn, decision = decide_rule_based(unit, "main", [])
    assert decision.deleted == frozenset()
    assert print_function(fn) == print_function(unit.functions[0])


def test_declarations_survive_if_survivors_reference_them():
    # the declaration is uncovered in a twisted way: suggested for
    # deletion while later uses survive; it must be restored
    unit = parse(
        """
        int main() {
            int v = 1;
            print(v);
            return 0;
        }
        """,
        "t",
    )
    decl = find_stmt(unit, "int v = 1")
    sugs = [Suggestion(decl, "uncovered", "main")]
    fn, decision = decide_rule_based(unit, "main", sugs)
    assert "int v" in print_function(fn)
    assert decl not in decision.deleted
