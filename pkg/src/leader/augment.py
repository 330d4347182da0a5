"""Documentation-guided test augmentation.

The observable suite usually exercises only part of what the manual
promises.  This module reads the program's documentation, works out
which documented features the user still wants (their options appear in
the observable tests), and proposes new tests for those features.  Every
proposal is stamped by running the original program; proposals that do
not terminate normally are dropped, so augmentation can only add tests
the original passes.
"""

from __future__ import annotations

import json
import random
import re
import shlex
from dataclasses import dataclass

from leader.llm import ChatBackend, ChatRequest, ReplayMiss
from leader.minic import ast, lower
from leader.minic.ir import IrModule
from leader.runtime.fuzz import mutate_test
from leader.runtime.interp import execute_with_coverage
from leader.runtime.testcase import DEFAULT_STEP_BUDGET, NORMAL, TestCase

DEFAULT_FEATURE = "default"
K_PER_FEATURE = 5


@dataclass(frozen=True)
class ProgramDoc:
    name: str
    synopsis: str
    options: tuple[tuple[str, str], ...]  # (token, description)
    examples: tuple[str, ...]  # raw example command lines


@dataclass(frozen=True)
class Feature:
    tag: str
    token: str | None  # option token, None for the default behavior
    description: str


_SECTION_RE = re.compile(r"^[A-Z][A-Z ]*$")
_OPTION_RE = re.compile(r"^\s*(-\w+)\s+(.*)$")


def parse_doc(text: str) -> ProgramDoc:
    """Read the NAME/SYNOPSIS/OPTIONS/EXAMPLES manual format."""
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for raw in text.splitlines():
        if _SECTION_RE.match(raw.strip()) and not raw.startswith(" "):
            current = sections.setdefault(raw.strip(), [])
        elif current is not None:
            current.append(raw)
    def body(key: str) -> list[str]:
        return [ln.strip() for ln in sections.get(key, []) if ln.strip()]

    name_line = " ".join(body("NAME"))
    name = name_line.split("-", 1)[0].strip() or name_line.strip()
    synopsis = " ".join(body("SYNOPSIS"))
    options = []
    for ln in body("OPTIONS"):
        m = _OPTION_RE.match(ln)
        if m:
            options.append((m.group(1), m.group(2).strip()))
    examples = tuple(body("EXAMPLES"))
    return ProgramDoc(name, synopsis, tuple(options), examples)


def extract_features(doc: ProgramDoc) -> list[Feature]:
    feats = [Feature(tag=tok.lstrip("-"), token=tok, description=desc)
             for tok, desc in doc.options]
    feats.append(Feature(DEFAULT_FEATURE, None, "behavior with no options"))
    return feats


def _option_tokens(doc: ProgramDoc) -> set[str]:
    return {tok for tok, _ in doc.options}


def _test_features(test: TestCase, doc: ProgramDoc) -> set[str]:
    """Feature tags a single invocation exercises."""
    opts = _option_tokens(doc)
    used = [a for a in test.argv[1:] if a in opts]
    if used:
        return {a.lstrip("-") for a in used}
    return {DEFAULT_FEATURE}


def identify_desired(
    features: list[Feature], doc: ProgramDoc, tests: list[TestCase]
) -> list[Feature]:
    """Features whose use is witnessed by the observable tests."""
    seen: set[str] = set()
    for t in tests:
        seen |= _test_features(t, doc)
    return [f for f in features if f.tag in seen]


def _parse_example(line: str) -> tuple[tuple[str, ...], bytes] | None:
    try:
        tokens = shlex.split(line)
    except ValueError:
        return None
    if not tokens:
        return None
    stdin = b""
    if "<<<" in tokens:
        i = tokens.index("<<<")
        if i + 1 < len(tokens):
            stdin = tokens[i + 1].encode("utf-8")
        tokens = tokens[:i]
    if not tokens:
        return None
    return tuple(tokens), stdin


# fixed operand grammar: whitespace-bearing strings, boundary numbers,
# deeper paths, so documented behaviors hiding behind unusual operands
# get at least one witness
VARIANT_OPERANDS = (
    "",
    " ",
    "\t",
    "a\tb",
    "a\nb",
    "a b c",
    "  padded  ",
    "0",
    "1",
    "-1",
    "-250",
    "9999999",
    "x",
    "word",
    "a/b",
    "a/b/c/d/e",
    "x/",
    "/a",
)

VARIANT_STDIN = (
    b"",
    b"a b\tc\n",
    b"line one\nline two\n",
    b"no trailing newline",
    b"0\n-5\n12\n",
    b"a\n\nb\n",
)


def _exemplar_operands(argv: tuple[str, ...], opts: set[str]) -> list[str]:
    return [a for a in argv[1:] if a not in opts]


def propose_tests(
    doc: ProgramDoc,
    desired: list[Feature],
    tests: list[TestCase],
) -> list[tuple[str, tuple[str, ...], bytes]]:
    """Deterministic candidate invocations: (feature tag, argv, stdin)."""
    opts = _option_tokens(doc)
    prog = tests[0].argv[0] if tests else doc.name
    desired_tokens = [f.token for f in desired if f.token is not None]
    out: list[tuple[str, tuple[str, ...], bytes]] = []
    seen: set[tuple[tuple[str, ...], bytes]] = set()

    def push(tag: str, argv: tuple[str, ...], stdin: bytes):
        key = (argv, stdin)
        if key not in seen:
            seen.add(key)
            out.append((tag, argv, stdin))

    by_tag: dict[str, list[TestCase]] = {}
    for t in tests:
        for tag in _test_features(t, doc):
            by_tag.setdefault(tag, []).append(t)

    for feat in desired:
        prefix = (prog,) + ((feat.token,) if feat.token else ())
        # documented examples that use this feature
        for line in doc.examples:
            parsed = _parse_example(line)
            if parsed is None:
                continue
            argv, stdin = parsed
            probe = TestCase("x", argv, stdin)
            if feat.tag in _test_features(probe, doc):
                push(feat.tag, argv, stdin)
        # operand variants over a fixed grammar
        for op in VARIANT_OPERANDS:
            push(feat.tag, prefix + (op,), b"")
        # exemplar-derived variants: reversed operands, stdin variants
        for ex in by_tag.get(feat.tag, []):
            operands = _exemplar_operands(ex.argv, opts)
            if len(operands) >= 2:
                flags = [a for a in ex.argv[1:] if a in opts]
                push(feat.tag, (prog, *flags, *reversed(operands)), ex.stdin)
            for stdin in VARIANT_STDIN:
                push(feat.tag, ex.argv, stdin)
        # pairwise combinations of desired options
        if feat.token is not None:
            for other in desired_tokens:
                if other != feat.token:
                    push(feat.tag, (prog, feat.token, other, "a b"), b"")
    return out


def _stamp(ir: IrModule, argv: tuple[str, ...], stdin: bytes,
           step_budget: int) -> tuple[TestCase, frozenset[int]] | None:
    result, visited = execute_with_coverage(ir, list(argv), stdin, step_budget)
    if result.termination != NORMAL:
        return None
    case = TestCase(
        id="",
        argv=argv,
        stdin=stdin,
        expected_stdout=result.stdout,
        expected_exit=result.exit_code,
    )
    return case, frozenset(visited)


@dataclass(frozen=True)
class AugmentReport:
    added: tuple[TestCase, ...]
    rejected: int  # proposals that did not terminate normally
    desired: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "added": len(self.added),
            "rejected": self.rejected,
            "desired": list(self.desired),
        }


def augment_suite(
    unit: ast.SourceUnit,
    doc: ProgramDoc,
    tests: list[TestCase],
    k_per_feature: int = K_PER_FEATURE,
    seed: int = 0,
    step_budget: int = DEFAULT_STEP_BUDGET,
    backend: ChatBackend | None = None,
) -> tuple[list[TestCase], AugmentReport]:
    """Return (augmented suite, report); the suite starts with `tests`."""
    ir = lower(unit)
    features = extract_features(doc)
    desired = identify_desired(features, doc, tests)
    proposals = propose_tests(doc, desired, tests)
    if backend is not None:
        proposals = _llm_proposals(backend, doc, desired, tests) + proposals

    covered: set[int] = set()
    for t in tests:
        _, visited = execute_with_coverage(ir, list(t.argv), t.stdin, step_budget)
        covered |= set(visited)

    existing = {(t.argv, t.stdin) for t in tests}
    added: list[TestCase] = []
    rejected = 0
    per_feature: dict[str, int] = {}
    fillers: dict[str, TestCase] = {}

    def accept(tag: str, case: TestCase):
        n = per_feature.get(tag, 0) + 1
        per_feature[tag] = n
        existing.add((case.argv, case.stdin))
        added.append(
            TestCase(
                id=f"aug-{tag}-{n}",
                argv=case.argv,
                stdin=case.stdin,
                expected_stdout=case.expected_stdout,
                expected_exit=case.expected_exit,
                feature=tag,
            )
        )

    # spend the per-feature budget on proposals that reach new statements
    for tag, argv, stdin in proposals:
        if per_feature.get(tag, 0) >= k_per_feature:
            continue
        if (argv, stdin) in existing:
            continue
        stamped = _stamp(ir, argv, stdin, step_budget)
        if stamped is None:
            rejected += 1
            continue
        case, visited = stamped
        if visited - covered:
            covered |= visited
            accept(tag, case)
        elif tag not in fillers:
            fillers[tag] = case

    # features whose proposals all retread covered code still get one witness
    for feat in desired:
        if per_feature.get(feat.tag, 0) == 0 and feat.tag in fillers:
            case = fillers[feat.tag]
            if (case.argv, case.stdin) not in existing:
                accept(feat.tag, case)

    # seeded mutation fallback for any desired feature left dry
    rng = random.Random(seed)
    for feat in desired:
        if per_feature.get(feat.tag, 0) > 0:
            continue
        exemplars = [t for t in tests if feat.tag in _test_features(t, doc)]
        for attempt in range(20 * k_per_feature):
            if per_feature.get(feat.tag, 0) >= k_per_feature or not exemplars:
                break
            base = exemplars[attempt % len(exemplars)]
            m = mutate_test(base, rng, attempt)
            if (m.argv, m.stdin) in existing:
                continue
            stamped = _stamp(ir, m.argv, m.stdin, step_budget)
            if stamped is None:
                rejected += 1
                continue
            case, visited = stamped
            covered |= visited
            accept(feat.tag, case)

    report = AugmentReport(
        added=tuple(added),
        rejected=rejected,
        desired=tuple(f.tag for f in desired),
    )
    return list(tests) + added, report


# --- chat-assisted proposals ---


def _llm_proposals(
    backend: ChatBackend,
    doc: ProgramDoc,
    desired: list[Feature],
    tests: list[TestCase],
) -> list[tuple[str, tuple[str, ...], bytes]]:
    from importlib import resources
    from string import Template

    text = (resources.files("leader") / "templates" / "augment.txt").read_text("utf-8")
    prog = tests[0].argv[0] if tests else doc.name
    prompt = Template(text).substitute(
        doc=_doc_text(doc),
        existing="\n".join(json.dumps(list(t.argv)) for t in tests),
        features=", ".join(f.tag for f in desired),
        name=prog,
    )
    request = ChatRequest(messages=(("user", prompt),))
    try:
        reply = backend.complete(request)
    except ReplayMiss:
        return []
    blocks = re.findall(r"```[^\n]*\n(.*?)```", reply, re.DOTALL)
    if not blocks:
        return []
    out: list[tuple[str, tuple[str, ...], bytes]] = []
    for line in blocks[-1].splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            argv = tuple(str(a) for a in obj["argv"])
            stdin = str(obj.get("stdin", "")).encode("utf-8")
        except (ValueError, KeyError, TypeError):
            continue
        if not argv or argv[0] != prog:
            continue
        probe = TestCase("x", argv, stdin)
        tags = _test_features(probe, doc)
        known = {f.tag for f in desired}
        tag = next((t for t in sorted(tags) if t in known), None)
        if tag is not None:
            out.append((tag, argv, stdin))
    return out


def _doc_text(doc: ProgramDoc) -> str:
    lines = ["NAME", f"    {doc.name}", "SYNOPSIS", f"    {doc.synopsis}", "OPTIONS"]
    for tok, desc in doc.options:
        lines.append(f"    {tok}    {desc}")
    lines.append("EXAMPLES")
    for ex in doc.examples:
        lines.append(f"    {ex}")
    return "\n".join(lines)
