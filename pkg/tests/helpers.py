"""Shared test utilities: corpus loading, a seeded random program
generator, a deterministic scripted chat backend, and a brute-force
finding-diff oracle used to cross-check the production implementation.
"""

from __future__ import annotations

import random
import re
from pathlib import Path

from leader.augment import ProgramDoc, parse_doc
from leader.decision import strip_annotations
from leader.llm import ChatBackend, ChatRequest, ReplayBackend
from leader.minic import ast, parse
from leader.minic.edit import delete_statements
from leader.minic.typecheck import typecheck
from leader.runtime.testcase import TestCase, load_suite

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_names() -> list[str]:
    return sorted(p.name for p in CORPUS.iterdir() if (p / "program.mc").exists())


def load_corpus(name: str) -> tuple[ast.SourceUnit, ProgramDoc, list[TestCase]]:
    root = CORPUS / name
    unit = parse((root / "program.mc").read_text("utf-8"), name)
    doc = parse_doc((root / "program.doc").read_text("utf-8"))
    tests = load_suite(root / "suite.jsonl")
    return unit, doc, tests


# --- seeded random program generator ---------------------------------------
#
# Emits source text, not trees, so everything it produces went through
# the real parser. Programs always typecheck; they may loop forever,
# trap, or read uninitialized locals on purpose, because the engines
# under test must agree on those behaviors too.

_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
_ARITH_OPS = ("+", "-", "*", "/", "%")


class _FnScope:
    def __init__(self):
        self.ints: list[str] = []
        self.arrays: list[tuple[str, int]] = []
        self.ptrs: list[str] = []


class _Gen:
    def __init__(self, rng: random.Random, max_stmts: int):
        self.rng = rng
        self.left = max_stmts
        self.fresh = 0

    def take(self, cost: int = 1) -> bool:
        if self.left < cost:
            return False
        self.left -= cost
        return True

    def name(self, prefix: str) -> str:
        self.fresh += 1
        return f"{prefix}{self.fresh}"

    # expressions

    def expr(self, scope: _FnScope, funcs: list[tuple[str, int]], depth: int = 0) -> str:
        r = self.rng.random()
        if depth >= 2 or r < 0.35:
            return self.leaf(scope)
        if r < 0.70:
            op = self.rng.choice(_ARITH_OPS + _CMP_OPS)
            return (
                f"({self.expr(scope, funcs, depth + 1)} {op} "
                f"{self.expr(scope, funcs, depth + 1)})"
            )
        if r < 0.80:
            op = self.rng.choice(("&&", "||"))
            return (
                f"({self.expr(scope, funcs, depth + 1)} {op} "
                f"{self.expr(scope, funcs, depth + 1)})"
            )
        if r < 0.88:
            op = self.rng.choice(("-", "!"))
            return f"({op}{self.expr(scope, funcs, depth + 1)})"
        if r < 0.94 and funcs:
            fname, arity = self.rng.choice(funcs)
            args = ", ".join(self.leaf(scope) for _ in range(arity))
            return f"{fname}({args})"
        if r < 0.97:
            return f"argat({self.small()}, {self.small()})"
        return self.rng.choice(("argc()", "getchar()"))

    def leaf(self, scope: _FnScope) -> str:
        choices = ["lit"]
        if scope.ints:
            choices += ["var", "var"]
        if scope.arrays:
            choices.append("index")
        pick = self.rng.choice(choices)
        if pick == "var":
            return self.rng.choice(scope.ints)
        if pick == "index":
            name, length = self.rng.choice(scope.arrays)
            if scope.ints and self.rng.random() < 0.2:
                return f"{name}[{self.rng.choice(scope.ints)}]"
            return f"{name}[{self.rng.randrange(length)}]"
        return self.small()

    def small(self) -> str:
        n = self.rng.randrange(-3, 10)
        return f"({n})" if n < 0 else str(n)

    # statements; each returns a list of source lines

    def stmt(self, scope: _FnScope, funcs, depth: int) -> list[str]:
        kinds = ["assign", "decl", "print"]
        if depth < 2:
            kinds += ["if", "if", "while", "for", "switch"]
        if scope.ints and self.rng.random() < 0.1:
            kinds.append("ptr")
        kind = self.rng.choice(kinds)
        if kind == "decl":
            return self.decl(scope, funcs)
        if kind == "assign" and scope.ints:
            if not self.take():
                return []
            target = self.rng.choice(scope.ints)
            return [f"{target} = {self.expr(scope, funcs)};"]
        if kind == "print":
            if not self.take():
                return []
            call = self.rng.choice(("print", "putc"))
            return [f"{call}({self.expr(scope, funcs)});"]
        if kind == "if":
            return self.ifstmt(scope, funcs, depth)
        if kind == "while":
            return self.loop(scope, funcs, depth)
        if kind == "for":
            return self.forloop(scope, funcs, depth)
        if kind == "switch":
            return self.switch(scope, funcs, depth)
        if kind == "ptr":
            return self.ptr(scope)
        return self.decl(scope, funcs)

    def decl(self, scope: _FnScope, funcs) -> list[str]:
        if not self.take():
            return []
        r = self.rng.random()
        if r < 0.15:
            name = self.name("a")
            length = self.rng.choice((2, 3, 4))
            scope.arrays.append((name, length))
            return [f"int {name}[{length}];"]
        name = self.name("v")
        if r < 0.30:
            line = f"int {name};"  # deliberately uninitialized
        else:
            line = f"int {name} = {self.expr(scope, funcs)};"
        scope.ints.append(name)
        return [line]

    def ptr(self, scope: _FnScope) -> list[str]:
        if not self.take(2):
            return []
        name = self.name("p")
        target = self.rng.choice(scope.ints)
        init = "0" if self.rng.random() < 0.3 else f"&{target}"
        scope.ptrs.append(name)
        lines = [f"int *{name} = {init};"]
        if self.rng.random() < 0.7 and self.take():
            lines.append(f"{target} = *{name};")
        return lines

    def body(self, scope: _FnScope, funcs, depth: int, n: int) -> list[str]:
        # block scoping: declarations made inside must not leak out
        mark = (len(scope.ints), len(scope.arrays), len(scope.ptrs))
        lines: list[str] = []
        for _ in range(n):
            lines.extend("    " + ln for ln in self.stmt(scope, funcs, depth))
        del scope.ints[mark[0]:]
        del scope.arrays[mark[1]:]
        del scope.ptrs[mark[2]:]
        return lines

    def ifstmt(self, scope: _FnScope, funcs, depth: int) -> list[str]:
        if not self.take():
            return []
        cond = self.expr(scope, funcs)
        lines = [f"if ({cond}) {{"]
        lines += self.body(scope, funcs, depth + 1, self.rng.choice((1, 2)))
        if self.rng.random() < 0.5:
            lines += ["} else {"]
            lines += self.body(scope, funcs, depth + 1, 1)
        lines += ["}"]
        return lines

    def loop(self, scope: _FnScope, funcs, depth: int) -> list[str]:
        if not self.take(3):
            return []
        i = self.name("w")
        scope.ints.append(i)
        bound = self.rng.choice((2, 3))
        lines = [f"int {i} = 0;", f"while ({i} < {bound}) {{"]
        inner = self.body(scope, funcs, depth + 1, 1)
        if self.rng.random() < 0.15 and self.take():
            inner.append("    " + self.rng.choice(("break;", "continue;")))
        lines += inner
        lines += [f"    {i} = {i} + 1;", "}"]
        return lines

    def forloop(self, scope: _FnScope, funcs, depth: int) -> list[str]:
        if not self.take(2):
            return []
        i = self.name("f")
        scope.ints.append(i)
        bound = self.rng.choice((2, 3, 4))
        lines = [
            f"int {i};",
            f"for ({i} = 0; {i} < {bound}; {i} = {i} + 1) {{",
        ]
        lines += self.body(scope, funcs, depth + 1, 1)
        lines += ["}"]
        return lines

    def switch(self, scope: _FnScope, funcs, depth: int) -> list[str]:
        n_cases = self.rng.choice((2, 3))
        if not self.take(1 + n_cases):
            return []
        lines = [f"switch ({self.expr(scope, funcs)}) {{"]
        values = self.rng.sample(range(0, 6), n_cases)
        slots = [f"case {v}:" for v in values]
        if self.rng.random() < 0.7:
            slots.insert(self.rng.randrange(len(slots) + 1), "default:")
            if not self.take():
                slots.pop()
        for label in slots:
            lines.append(label)
            lines += self.body(scope, funcs, depth + 1, 1)
            if self.rng.random() < 0.7 and self.take():
                lines.append("    break;")
        lines += ["}"]
        return lines

    def function(self, name: str, params: list[str], funcs) -> list[str]:
        scope = _FnScope()
        scope.ints.extend(params)
        sig = ", ".join(f"int {p}" for p in params)
        lines = [f"int {name}({sig}) {{"]
        n = self.rng.choice((2, 3, 4))
        lines += self.body(scope, funcs, 0, n)
        if self.rng.random() < 0.85:
            self.left += 1  # the closing return is always affordable
            self.take()
            lines.append(f"    return {self.expr(scope, funcs)};")
        lines.append("}")
        return lines


def gen_program(rng: random.Random, max_stmts: int = 28) -> str:
    """Random MiniC source text that parses and typechecks."""
    g = _Gen(rng, max_stmts)
    lines: list[str] = []
    funcs: list[tuple[str, int]] = []
    if rng.random() < 0.3 and g.take():
        lines += ["int gv;", ""]
    for _ in range(rng.choice((0, 1, 1))):
        if g.left < 4:
            break
        fname = g.name("fn")
        arity = rng.choice((1, 2))
        params = [g.name("q") for _ in range(arity)]
        lines += g.function(fname, params, list(funcs))
        lines.append("")
        funcs.append((fname, arity))
    lines += g.function("main", [], funcs)
    return "\n".join(lines) + "\n"


def gen_unit(rng: random.Random, max_stmts: int = 28) -> ast.SourceUnit:
    text = gen_program(rng, max_stmts)
    unit = parse(text, "gen")
    diags = typecheck(unit)
    assert not diags, f"generator produced an invalid program: {diags}\n{text}"
    return unit


def deletable_ids(unit: ast.SourceUnit) -> list[int]:
    """Statement ids inside function bodies, nested ones included."""
    ids: list[int] = []
    for fn in unit.functions:
        ids.extend(s.stmt_id for s in ast.function_stmts(fn))
    return sorted(ids)


def gen_debloat_pair(
    rng: random.Random, max_stmts: int = 28
) -> tuple[ast.SourceUnit, ast.SourceUnit, set[int]]:
    """An original unit, a deletion-derived variant, and the deleted ids."""
    unit = gen_unit(rng, max_stmts)
    candidates = deletable_ids(unit)
    n = rng.randrange(0, max(1, len(candidates) // 2) + 1)
    doomed = set(rng.sample(candidates, min(n, len(candidates))))
    debloated = delete_statements(unit, doomed)
    # subtree deletion removes more than the sampled roots
    deleted = set(deletable_ids(unit)) - set(deletable_ids(debloated))
    return unit, debloated, deleted


# --- brute-force finding diff ----------------------------------------------


def bruteforce_diff(original, debloated, deleted_ids):
    """Quadratic pairwise matching used as an oracle for diff_findings.

    Original findings anchored at deleted statements are eliminated.
    Each debloated finding greedily pairs with one unmatched surviving
    original of the same key; the unpaired remainder is new.
    """
    eliminated = [
        f for f in original if f.stmt_id is not None and f.stmt_id in deleted_ids
    ]
    survivors = [
        f for f in original if not (f.stmt_id is not None and f.stmt_id in deleted_ids)
    ]
    used = [False] * len(survivors)
    new = []
    for f in debloated:
        for i, s in enumerate(survivors):
            if not used[i] and s.key() == f.key():
                used[i] = True
                break
        else:
            new.append(f)
    return eliminated, new


# --- deterministic chat stand-in -------------------------------------------

_FENCES = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


class ScriptedBackend(ChatBackend):
    """Deterministic stand-in for a chat model.

    Augmentation prompts get an empty proposal block. Revision prompts
    get the annotated function back with every line the advisors tagged
    for deletion dropped. Rejection prompts get the original function.
    Every exchange is logged so a ReplayBackend can be built from it.
    """

    def __init__(self):
        self.exchanges: list[tuple[ChatRequest, str]] = []

    def complete(self, request: ChatRequest) -> str:
        text = request.messages[-1][1]
        if "JSON object per line" in text:
            reply = "No new invocations to suggest.\n```\n```\n"
        elif text.startswith("Your revised function was rejected"):
            first = _FENCES.findall(request.messages[0][1])[0]
            body = strip_annotations(first).strip()
            reply = f"Keeping the original.\n```\n{body}\n```\n"
        else:
            block = _FENCES.findall(text)[-1]
            kept = [ln for ln in block.splitlines() if "[DEBLOAT]" not in ln]
            body = strip_annotations("\n".join(kept)).strip()
            reply = f"Dropping the unexecuted statements.\n```\n{body}\n```\n"
        self.exchanges.append((request, reply))
        return reply


def replay_of(scripted: ScriptedBackend) -> ReplayBackend:
    replay = ReplayBackend()
    for request, reply in scripted.exchanges:
        replay.add(request, reply)
    return replay
