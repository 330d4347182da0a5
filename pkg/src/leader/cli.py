"""Command-line interface.

Every successful command writes its machine-readable result as JSON in
the output directory; human-oriented text goes to stdout.  Outputs are
deterministic for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from leader.augment import augment_suite, parse_doc
from leader.llm import BackendError, HttpBackend, ReplayBackend
from leader.metrics import MetricsReport, evaluate, program_size
from leader.minic import ParseError, TypeCheckError, check_unit, lower, parse, print_unit
from leader.pipeline import LLM, RULES, SuiteError, baseline_cov, debloat_program
from leader.reporting import format_table, render_figures, write_csv
from leader.runtime.fuzz import fuzz_robustness
from leader.runtime.testcase import (
    DEFAULT_STEP_BUDGET,
    load_suite,
    save_suite,
    split_suite,
)

COV = "cov"
COV_STATIC = "cov-static"
DEFAULT_BASE_URL = "https://api.openai.com/v1"


def _load_unit(path: str):
    p = Path(path)
    # corpus layout names every source file program.mc; the directory
    # carries the actual program name
    name = p.parent.name if p.stem == "program" and p.parent.name else p.stem
    unit = parse(p.read_text(encoding="utf-8"), name)
    check_unit(unit)
    return unit


def _write_json(path: Path, data: dict):
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", "utf-8")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_split(args) -> int:
    tests = load_suite(args.suite)
    t_d, t_e = split_suite(tests, args.split_ratio, args.seed)
    out = _outdir(args)
    save_suite(t_d, out / "t_d.jsonl")
    save_suite(t_e, out / "t_e.jsonl")
    _write_json(out / "split.json", {
        "total": len(tests),
        "observable": len(t_d),
        "held_out": len(t_e),
        "ratio": args.split_ratio,
        "seed": args.seed,
    })
    print(f"split {len(tests)} tests: {len(t_d)} observable, {len(t_e)} held out")
    return 0


def _backend_from(args):
    cfg = args.config_data
    spec = cfg.get("backend", {})
    if spec.get("kind") == "replay":
        # canned replies keyed by request digest; offline and reproducible
        replies = json.loads(Path(spec["path"]).read_text("utf-8"))
        return ReplayBackend(replies=replies)
    return HttpBackend(
        base_url=spec.get("base_url", cfg.get("base_url", DEFAULT_BASE_URL)),
        max_concurrency=cfg.get("max_concurrency", 4),
    )


def cmd_debloat(args) -> int:
    unit = _load_unit(args.program)
    tests = load_suite(args.suite)
    doc = parse_doc(Path(args.doc).read_text("utf-8")) if args.doc else None
    out = _outdir(args)

    if args.policy in (COV, COV_STATIC):
        debloated, deleted = baseline_cov(
            unit, tests, args.step_budget, with_static=args.policy == COV_STATIC
        )
        (out / "debloated.mc").write_text(print_unit(debloated), "utf-8")
        _write_json(out / "debloat.json", {
            "program": unit.name,
            "policy": args.policy,
            "deleted": sorted(deleted),
            "size_original": program_size(unit),
            "size_debloated": program_size(debloated),
        })
        print(f"{unit.name}: deleted {len(deleted)} statements ({args.policy})")
        return 0

    backend = _backend_from(args) if args.policy == LLM else None
    run = debloat_program(
        unit,
        tests,
        doc=doc,
        policy=args.policy,
        augment=args.augment,
        backend=backend,
        seed=args.seed,
        step_budget=args.step_budget,
        k_per_feature=args.config_data.get("k_per_feature", 5),
        max_attempts=args.config_data.get("max_attempts", 3),
        jobs=args.jobs,
    )
    (out / "debloated.mc").write_text(print_unit(run.unit), "utf-8")
    save_suite(run.observed, out / "t_obs.jsonl")
    data = run.to_json()
    data["size_original"] = program_size(unit)
    data["size_debloated"] = program_size(run.unit)
    _write_json(out / "debloat.json", data)
    print(
        f"{unit.name}: deleted {len(run.deleted_ids)} statements, "
        f"{len(run.security.new_high)} new high finding(s)"
    )
    return 0


def cmd_eval(args) -> int:
    original = _load_unit(args.program)
    debloated = _load_unit(args.debloated)
    tests = load_suite(args.suite)
    report = evaluate(
        original, debloated, tests,
        n_mutants=args.mutants, seed=args.seed, step_budget=args.step_budget,
    )
    out = _outdir(args)
    (out / "metrics.json").write_text(report.dumps(), "utf-8")
    print(format_table([report]), end="")
    return 0


def cmd_augment(args) -> int:
    unit = _load_unit(args.program)
    tests = load_suite(args.suite)
    doc = parse_doc(Path(args.doc).read_text("utf-8"))
    backend = _backend_from(args) if args.policy == LLM else None
    augmented, report = augment_suite(
        unit, doc, tests,
        k_per_feature=args.config_data.get("k_per_feature", 5),
        seed=args.seed,
        step_budget=args.step_budget,
        backend=backend,
    )
    out = _outdir(args)
    save_suite(augmented, out / "augmented.jsonl")
    _write_json(out / "augment.json", report.to_json())
    print(f"{unit.name}: added {len(report.added)} tests for {len(report.desired)} features")
    return 0


def cmd_fuzz(args) -> int:
    unit = _load_unit(args.program)
    tests = load_suite(args.suite)
    report = fuzz_robustness(
        lower(unit), tests, args.mutants, args.seed, args.step_budget
    )
    out = _outdir(args)
    _write_json(out / "fuzz.json", report.to_json())
    print(f"{unit.name}: {report.normal}/{report.total} mutants terminated normally")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.metrics:
        data = json.loads(Path(path).read_text("utf-8"))
        reports.append(MetricsReport.from_json(data))
    out = _outdir(args)
    table = format_table(reports)
    (out / "table.txt").write_text(table, "utf-8")
    write_csv(reports, out / "report.csv")
    figures = render_figures(reports, out)
    print(table, end="")
    print("wrote " + ", ".join(str(p) for p in [out / "report.csv", *figures]))
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)
    p.add_argument("--config", default=None, help="JSON file with extra settings")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="leader", description="documentation-guided program debloating"
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="split a suite into observable and held-out")
    p.add_argument("--suite", required=True)
    p.add_argument("--split-ratio", type=float, default=0.1)
    _add_common(p)
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("debloat", help="debloat a program against observable tests")
    p.add_argument("--program", required=True)
    p.add_argument("--doc", default=None)
    p.add_argument("--suite", required=True)
    p.add_argument("--policy", choices=[RULES, LLM, COV, COV_STATIC], default=RULES)
    p.add_argument("--augment", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(fn=cmd_debloat)

    p = sub.add_parser("eval", help="score a debloated program on held-out tests")
    p.add_argument("--program", required=True)
    p.add_argument("--debloated", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--mutants", type=int, default=1000)
    _add_common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("augment", help="propose new tests from the documentation")
    p.add_argument("--program", required=True)
    p.add_argument("--doc", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--policy", choices=[RULES, LLM], default=RULES)
    _add_common(p)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("fuzz", help="measure robustness on seeded input mutants")
    p.add_argument("--program", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--mutants", type=int, default=1000)
    _add_common(p)
    p.set_defaults(fn=cmd_fuzz)

    p = sub.add_parser("report", help="render tables and figures from metrics files")
    p.add_argument("--metrics", nargs="+", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_report)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.config_data = {}
    if getattr(args, "config", None):
        try:
            args.config_data = json.loads(Path(args.config).read_text("utf-8"))
        except (OSError, ValueError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 1
    try:
        return args.fn(args)
    except (SuiteError, ParseError, TypeCheckError, BackendError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
