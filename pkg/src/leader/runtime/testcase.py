"""Test cases, execution results, coverage reports, and JSONL suite IO.

Suite files are JSON Lines: one object per test with keys id, argv,
stdin (base64), expected_stdout (base64, optional), expected_exit
(optional), and an optional feature tag used by the stratified split.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path

TRAP_KINDS = ("NullDeref", "OutOfBounds", "UninitRead", "DivByZero")

NORMAL = "normal"
TRAP = "trap"
STEP_LIMIT = "step_limit"

DEFAULT_STEP_BUDGET = 1_000_000
CALL_DEPTH_LIMIT = 128


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # data, despite the name; keeps pytest from collecting it

    id: str
    argv: tuple[str, ...]
    stdin: bytes = b""
    expected_stdout: bytes | None = None
    expected_exit: int | None = None
    feature: str | None = None

    def with_expected(self, stdout: bytes, exit_code: int | None) -> "TestCase":
        return TestCase(
            self.id, self.argv, self.stdin, stdout, exit_code, self.feature
        )


@dataclass(frozen=True)
class ExecResult:
    stdout: bytes
    exit_code: int | None  # None unless termination is normal
    termination: str  # normal | trap | step_limit
    trap: str | None = None
    steps: int = 0

    def key(self) -> tuple:
        """Observable behavior used for test comparison."""
        return (self.stdout, self.exit_code, self.termination, self.trap)

    def to_json(self) -> dict:
        return {
            "stdout": base64.b64encode(self.stdout).decode("ascii"),
            "exit_code": self.exit_code,
            "termination": self.termination,
            "trap": self.trap,
            "steps": self.steps,
        }


@dataclass
class CoverageReport:
    per_test: dict[str, frozenset[int]]
    union: frozenset[int]

    @classmethod
    def collect(cls, per_test: dict[str, frozenset[int]]) -> "CoverageReport":
        union: set[int] = set()
        for visited in per_test.values():
            union |= visited
        return cls(per_test, frozenset(union))


def test_to_json(t: TestCase) -> dict:
    obj: dict = {
        "id": t.id,
        "argv": list(t.argv),
        "stdin": base64.b64encode(t.stdin).decode("ascii"),
    }
    if t.expected_stdout is not None:
        obj["expected_stdout"] = base64.b64encode(t.expected_stdout).decode("ascii")
    if t.expected_exit is not None:
        obj["expected_exit"] = t.expected_exit
    if t.feature is not None:
        obj["feature"] = t.feature
    return obj


def test_from_json(obj: dict) -> TestCase:
    expected_stdout = obj.get("expected_stdout")
    return TestCase(
        id=str(obj["id"]),
        argv=tuple(obj["argv"]),
        stdin=base64.b64decode(obj.get("stdin", "")),
        expected_stdout=(
            base64.b64decode(expected_stdout) if expected_stdout is not None else None
        ),
        expected_exit=obj.get("expected_exit"),
        feature=obj.get("feature"),
    )


def load_suite(path: str | Path) -> list[TestCase]:
    tests = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            tests.append(test_from_json(json.loads(line)))
    return tests


def save_suite(tests: list[TestCase], path: str | Path) -> None:
    lines = [json.dumps(test_to_json(t), sort_keys=True) for t in tests]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def split_suite(
    tests: list[TestCase], ratio: float = 0.1, seed: int = 0
) -> tuple[list[TestCase], list[TestCase]]:
    """Stratified split into (observable, held-out).

    Tests sharing a feature tag form one group; untagged tests form their
    own group. A group of n >= 2 sends min(max(1, round(ratio * n)), n - 1)
    tests to the observable side, so every group keeps at least one
    held-out witness. Singleton groups go entirely to the held-out side.
    """
    import random

    groups: dict[str, list[int]] = {}
    for i, t in enumerate(tests):
        groups.setdefault(t.feature or "", []).append(i)
    rng = random.Random(seed)
    observable: set[int] = set()
    for tag in sorted(groups):
        members = sorted(groups[tag])
        if len(members) < 2:
            continue
        k = min(max(1, round(ratio * len(members))), len(members) - 1)
        rng.shuffle(members)
        observable.update(members[:k])
    t_d = [t for i, t in enumerate(tests) if i in observable]
    t_e = [t for i, t in enumerate(tests) if i not in observable]
    return t_d, t_e
