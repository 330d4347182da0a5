#!/usr/bin/env python3
"""Re-stamp expected outputs for every bundled corpus suite.

Runs each test against its program and records the observed stdout and
exit status as the expected values. Use after editing a corpus program
or suite; fails loudly if any test stops terminating normally.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from leader.minic import check_unit, lower, parse
from leader.runtime.interp import execute
from leader.runtime.testcase import NORMAL, TestCase, load_suite, save_suite


def restamp(program_dir: Path) -> int:
    unit = parse((program_dir / "program.mc").read_text("utf-8"), program_dir.name)
    check_unit(unit)
    ir = lower(unit)
    suite_path = program_dir / "suite.jsonl"
    tests = load_suite(suite_path)
    out: list[TestCase] = []
    for t in tests:
        result = execute(ir, t.argv, t.stdin)
        if result.termination != NORMAL:
            raise SystemExit(
                f"{program_dir.name}/{t.id}: terminated {result.termination}, "
                "refusing to stamp"
            )
        out.append(t.with_expected(result.stdout, result.exit_code))
    save_suite(out, suite_path)
    return len(out)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--corpus",
        default=str(Path(__file__).resolve().parent.parent / "corpus"),
        help="corpus root holding <program>/program.mc and suite.jsonl",
    )
    args = ap.parse_args()
    root = Path(args.corpus)
    dirs = sorted(p for p in root.iterdir() if (p / "program.mc").exists())
    if not dirs:
        raise SystemExit(f"no programs under {root}")
    for d in dirs:
        n = restamp(d)
        print(f"{d.name}: stamped {n} tests")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
