"""End-to-end debloating runs: advise, decide, validate, retry."""

from __future__ import annotations

import pytest

from helpers import ScriptedBackend, load_corpus
from leader.augment import parse_doc
from leader.minic import lower, parse, print_unit
from leader.minic.ast import function_stmts
from leader.pipeline import (
    MAX_ATTEMPTS,
    SuiteError,
    baseline_cov,
    debloat_program,
    verify_suite,
)
from leader.runtime.interp import execute
from leader.runtime.testcase import TestCase

SRC = """
int pick(int a, int b) {
    if (a > b) {
        return a;
    }
    return b;
}

int main() {
    int n = argc();
    if (n > 90) {
        print(777);
    }
    print(pick(n, 2));
    return 0;
}
"""


def tests_for(*argvs: tuple[str, ...]) -> list[TestCase]:
    return [TestCase(f"t{i}", argv) for i, argv in enumerate(argvs, 1)]


class TestVerifySuite:
    def test_stamps_missing_expectations(self):
        unit = parse(SRC, "p")
        (stamped,) = verify_suite(unit, tests_for(("p", "x")))
        assert stamped.expected_stdout == b"2\n"
        assert stamped.expected_exit == 0

    def test_keeps_matching_expectations(self):
        unit = parse(SRC, "p")
        given = TestCase("t", ("p", "x"), expected_stdout=b"2\n", expected_exit=0)
        assert verify_suite(unit, [given]) == [given]

    def test_rejects_wrong_stdout(self):
        unit = parse(SRC, "p")
        bad = TestCase("t", ("p", "x"), expected_stdout=b"9\n")
        with pytest.raises(SuiteError, match="stdout"):
            verify_suite(unit, [bad])

    def test_rejects_wrong_exit(self):
        unit = parse(SRC, "p")
        bad = TestCase("t", ("p", "x"), expected_stdout=b"2\n", expected_exit=5)
        with pytest.raises(SuiteError, match="exit"):
            verify_suite(unit, [bad])

    def test_rejects_tests_that_trap(self):
        unit = parse("int main() { int *p = 0; return *p; }", "p")
        with pytest.raises(SuiteError, match="NullDeref"):
            verify_suite(unit, tests_for(("p",)))


def test_unknown_policy_is_rejected():
    unit = parse(SRC, "p")
    with pytest.raises(ValueError, match="policy"):
        debloat_program(unit, tests_for(("p",)), policy="yolo")


def test_llm_policy_needs_a_backend():
    unit = parse(SRC, "p")
    with pytest.raises(ValueError, match="backend"):
        debloat_program(unit, tests_for(("p",)), policy="llm")


def test_augment_needs_documentation():
    unit = parse(SRC, "p")
    with pytest.raises(ValueError, match="documentation"):
        debloat_program(unit, tests_for(("p",)), augment=True)


def test_rules_run_deletes_dead_branch_and_passes_suite():
    unit = parse(SRC, "p")
    tests = tests_for(("p",), ("p", "a", "b", "c"))
    run = debloat_program(unit, tests, policy="rules")
    assert run.policy == "rules"
    assert run.program == "p"
    assert "777" not in print_unit(run.unit)
    assert run.deleted_ids
    # the observable tests still pass bit for bit
    ir = lower(run.unit)
    for t in run.observed:
        res = execute(ir, list(t.argv), t.stdin)
        assert res.termination == "normal"
        assert res.stdout == t.expected_stdout
        assert res.exit_code == t.expected_exit


def test_outcomes_respect_the_attempt_ceiling():
    unit = parse(SRC, "p")
    run = debloat_program(unit, tests_for(("p",)), policy="rules")
    assert run.outcomes
    for outcome in run.outcomes:
        assert 1 <= outcome.attempts <= MAX_ATTEMPTS


def test_deleted_ids_match_the_surviving_unit():
    unit = parse(SRC, "p")
    run = debloat_program(unit, tests_for(("p",)), policy="rules")
    remaining = {
        s.stmt_id for fn in run.unit.functions for s in function_stmts(fn)
    }
    original = {s.stmt_id for fn in unit.functions for s in function_stmts(fn)}
    assert run.deleted_ids == original - remaining


def test_security_diff_is_attached():
    unit = parse(SRC, "p")
    run = debloat_program(unit, tests_for(("p",)), policy="rules")
    assert run.security.new == ()
    obj = run.to_json()
    assert obj["policy"] == "rules"
    assert obj["deleted"] == sorted(run.deleted_ids)
    assert obj["security"]["new"] == []


def test_llm_policy_accepts_scripted_rewrites():
    unit = parse(SRC, "p")
    backend = ScriptedBackend()
    run = debloat_program(
        unit, tests_for(("p",), ("p", "a")), policy="llm", backend=backend
    )
    assert backend.exchanges
    assert "777" not in print_unit(run.unit)
    assert all(o.action == "accepted" for o in run.outcomes)
    ir = lower(run.unit)
    for t in run.observed:
        res = execute(ir, list(t.argv), t.stdin)
        assert res.stdout == t.expected_stdout


def test_augmented_run_records_a_report():
    unit, doc, tests = load_corpus("wscount")
    run = debloat_program(unit, tests[:3], doc=doc, policy="rules", augment=True)
    assert run.augment_report is not None
    assert len(run.observed) >= 3
    assert run.to_json()["augment"]["added"] == len(run.augment_report.added)


def test_fell_back_functions_keep_their_original_body():
    # every statement is executed, then force suggestions via an
    # uncovered branch whose deletion breaks a test
    src = """
    int main() {
        int flag = 0;
        if (argc() > 1) {
            flag = 1;
        }
        print(flag);
        return 0;
    }
    """
    unit = parse(src, "p")
    # only the no-argument path is observed, so `flag = 1` looks dead;
    # deleting it is safe for the observed slice and should be accepted
    run = debloat_program(unit, tests_for(("p",)), policy="rules")
    for outcome in run.outcomes:
        if outcome.action == "fell-back":
            before = print_unit(unit.function(outcome.name))
            after = print_unit(run.unit.function(outcome.name))
            assert before == after
            assert outcome.deleted == ()


def test_rules_retry_walks_back_breaking_deletions():
    # the guard is covered but its body is not; body deletion is safe,
    # yet deleting the whole uncovered write would break the second test
    src = """
    int main() {
        int seen = 0;
        int i = 1;
        while (i < argc()) {
            seen = seen + 1;
            i = i + 1;
        }
        if (seen > 100) {
            print(42);
        }
        print(seen);
        return 0;
    }
    """
    unit = parse(src, "p")
    tests = tests_for(("p",), ("p", "a"))
    run = debloat_program(unit, tests, policy="rules")
    assert "42" not in print_unit(run.unit)
    ir = lower(run.unit)
    for t in run.observed:
        res = execute(ir, list(t.argv), t.stdin)
        assert res.stdout == t.expected_stdout


class TestCoverageBaseline:
    def test_deletes_uncovered_statements(self):
        unit = parse(SRC, "p")
        debloated, doomed = baseline_cov(unit, tests_for(("p",)))
        assert doomed
        assert "777" not in print_unit(debloated)

    def test_with_static_also_removes_dead_weight(self):
        src = """
        int main() {
            int unused = 3;
            print(argc());
            return 0;
        }
        """
        unit = parse(src, "p")
        plain, _ = baseline_cov(unit, tests_for(("p",)))
        static, _ = baseline_cov(unit, tests_for(("p",)), with_static=True)
        assert "unused" in print_unit(plain)
        assert "unused" not in print_unit(static)

    def test_has_no_behavior_safety_net(self):
        # deleting the unexecuted branch changes behavior on other inputs
        unit = parse(SRC, "p")
        debloated, _ = baseline_cov(unit, tests_for(("p",)))
        argv = ["p"] + ["x"] * 95
        original = execute(lower(unit), argv, b"")
        after = execute(lower(debloated), argv, b"")
        assert original.stdout != after.stdout
