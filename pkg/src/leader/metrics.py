"""Program metrics: how much smaller, how much safer, how much intact.

Sizes count statements; memory is the byte length of the canonical
lowered-module serialization; attack surface counts distinct short
instruction windows that end in a return, the reusable-snippet analog
for the virtual machine.  Correctness is measured on the held-out tests
and robustness on seeded input mutants, combined into one harmonized
score.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass

from leader.advisors.security import SEVERITY, analyze_unit
from leader.minic import ast, lower
from leader.minic.ir import IrModule
from leader.runtime.fuzz import fuzz_robustness
from leader.runtime.interp import execute
from leader.runtime.testcase import DEFAULT_STEP_BUDGET, NORMAL, TestCase


def program_size(unit: ast.SourceUnit) -> int:
    return ast.unit_size(unit)


def memory_bytes(unit: ast.SourceUnit, ir: IrModule | None = None) -> int:
    if ir is None:
        ir = lower(unit)
    return len(ir.serialize())


def attack_surface(unit: ast.SourceUnit, ir: IrModule | None = None) -> int:
    """Distinct instruction windows of length <= 3 ending at a return."""
    if ir is None:
        ir = lower(unit)
    total = 0
    for fn in ir.functions.values():
        windows: set[tuple[str, ...]] = set()
        for i, ins in enumerate(fn.instrs):
            if ins.op != "Return":
                continue
            for lo in (i, i - 1, i - 2):
                if lo >= 0:
                    windows.add(tuple(x.op for x in fn.instrs[lo : i + 1]))
        total += len(windows)
    return total


def reduction(before: float, after: float) -> float:
    return (before - after) / before if before else 0.0


def harmonized_score(correctness: float, robustness: float) -> float:
    if correctness + robustness == 0:
        return 0.0
    return 2 * correctness * robustness / (correctness + robustness)


def correctness_on(
    unit: ast.SourceUnit,
    tests: list[TestCase],
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[int, int]:
    """(passed, total) on tests that carry expected outputs."""
    ir = lower(unit)
    passed = 0
    for t in tests:
        res = execute(ir, list(t.argv), t.stdin, step_budget)
        ok = (
            res.termination == NORMAL
            and res.stdout == t.expected_stdout
            and res.exit_code == t.expected_exit
        )
        passed += ok
    return passed, len(tests)


def finding_delta(original_unit: ast.SourceUnit, debloated_unit: ast.SourceUnit) -> dict:
    """New and resolved findings, matched by identity key."""
    v_ori = analyze_unit(original_unit)
    v_deb = analyze_unit(debloated_unit)
    budget = Counter(f.key() for f in v_ori)
    new = []
    for f in v_deb:
        if budget[f.key()] > 0:
            budget[f.key()] -= 1
        else:
            new.append(f)
    resolved = sum(budget.values())
    resolved_high = sum(
        n for key, n in budget.items() if SEVERITY[key[0]] == "high"
    )
    return {
        "new": len(new),
        "new_high": sum(1 for f in new if f.severity == "high"),
        "resolved": resolved,
        "resolved_high": resolved_high,
    }


@dataclass(frozen=True)
class MetricsReport:
    program: str
    tests_total: int
    tests_passed: int
    correctness: float
    mutants_total: int
    mutants_normal: int
    robustness: float
    harmonized: float
    size_original: int
    size_debloated: int
    size_reduction: float
    mem_original: int
    mem_debloated: int
    mem_reduction: float
    atk_original: int
    atk_debloated: int
    atk_reduction: float
    new_findings: int
    new_high: int
    resolved_findings: int
    resolved_high: int

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "MetricsReport":
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def evaluate(
    original: ast.SourceUnit,
    debloated: ast.SourceUnit,
    tests: list[TestCase],
    n_mutants: int = 1000,
    seed: int = 0,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> MetricsReport:
    """Score the debloated program against the held-out tests."""
    from leader.pipeline import verify_suite

    tests = verify_suite(original, tests, step_budget)
    ir_ori = lower(original)
    ir_deb = lower(debloated)

    passed, total = correctness_on(debloated, tests, step_budget)
    correctness = passed / total if total else 0.0
    fuzz = fuzz_robustness(ir_deb, tests, n_mutants, seed, step_budget)
    delta = finding_delta(original, debloated)

    size_o, size_d = program_size(original), program_size(debloated)
    mem_o, mem_d = memory_bytes(original, ir_ori), memory_bytes(debloated, ir_deb)
    atk_o, atk_d = attack_surface(original, ir_ori), attack_surface(debloated, ir_deb)

    return MetricsReport(
        program=original.name,
        tests_total=total,
        tests_passed=passed,
        correctness=correctness,
        mutants_total=fuzz.total,
        mutants_normal=fuzz.normal,
        robustness=fuzz.robustness,
        harmonized=harmonized_score(correctness, fuzz.robustness),
        size_original=size_o,
        size_debloated=size_d,
        size_reduction=reduction(size_o, size_d),
        mem_original=mem_o,
        mem_debloated=mem_d,
        mem_reduction=reduction(mem_o, mem_d),
        atk_original=atk_o,
        atk_debloated=atk_d,
        atk_reduction=reduction(atk_o, atk_d),
        new_findings=delta["new"],
        new_high=delta["new_high"],
        resolved_findings=delta["resolved"],
        resolved_high=delta["resolved_high"],
    )
