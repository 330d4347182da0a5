"""Execution engines, test suites, coverage, and fuzzing."""

from leader.runtime.testcase import (  # noqa: F401
    CoverageReport,
    ExecResult,
    TestCase,
    load_suite,
    save_suite,
)
from leader.runtime.interp import execute, run_tests, run_unit_tests  # noqa: F401
from leader.runtime.reference import reference_execute  # noqa: F401
from leader.runtime.fuzz import fuzz_robustness, mutate_test  # noqa: F401
