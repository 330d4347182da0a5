"""Seeded input mutation for robustness probing.

Mutants are derived from suite tests round-robin and run without an
expected-output check: the only question is whether the program still
terminates normally on slightly damaged input.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from leader.minic.ir import IrModule
from leader.runtime.interp import execute
from leader.runtime.testcase import DEFAULT_STEP_BUDGET, NORMAL, TestCase

# argv[0] is the program name; mutations touch operands only
MUTATION_KINDS = ("flipbyte", "duparg", "truncarg", "inschar", "droparg")


def _flip_stdin(stdin: bytes, rng: random.Random) -> bytes:
    if not stdin:
        return bytes([rng.randrange(256)])
    data = bytearray(stdin)
    pos = rng.randrange(len(data))
    data[pos] ^= rng.randrange(1, 256)
    return bytes(data)


def mutate_test(test: TestCase, rng: random.Random, serial: int = 0) -> TestCase:
    """One mutant of `test`; the chosen kind is the id suffix."""
    kind = rng.choice(MUTATION_KINDS)
    args = list(test.argv)
    stdin = test.stdin
    movable = len(args) > 1  # anything after the program name?
    if kind == "flipbyte" or not movable:
        stdin = _flip_stdin(stdin, rng)
    elif kind == "duparg":
        i = rng.randrange(1, len(args))
        args.insert(i + 1, args[i])
    elif kind == "truncarg":
        i = rng.randrange(1, len(args))
        if args[i]:
            args[i] = args[i][: rng.randrange(len(args[i]))]
        else:
            stdin = _flip_stdin(stdin, rng)
    elif kind == "inschar":
        ch = chr(rng.randrange(32, 127))
        i = rng.randrange(1, len(args))
        pos = rng.randrange(len(args[i]) + 1)
        args[i] = args[i][:pos] + ch + args[i][pos:]
    else:  # droparg
        del args[rng.randrange(1, len(args))]
    return TestCase(
        id=f"{test.id}/m{serial}.{kind}",
        argv=tuple(args),
        stdin=stdin,
    )


@dataclass(frozen=True)
class FuzzReport:
    total: int
    normal: int
    by_kind: dict[str, tuple[int, int]]  # kind -> (run, normal)

    @property
    def robustness(self) -> float:
        return self.normal / self.total if self.total else 0.0

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "normal": self.normal,
            "robustness": self.robustness,
            "by_kind": {k: list(v) for k, v in sorted(self.by_kind.items())},
        }


def fuzz_robustness(
    ir: IrModule,
    tests: list[TestCase],
    n_mutants: int = 1000,
    seed: int = 0,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> FuzzReport:
    """Run `n_mutants` seeded mutants; report how many stay Normal."""
    if not tests:
        raise ValueError("need at least one seed test")
    rng = random.Random(seed)
    by_kind: dict[str, list[int]] = {}
    normal = 0
    for serial in range(n_mutants):
        base = tests[serial % len(tests)]
        mutant = mutate_test(base, rng, serial)
        kind = mutant.id.rsplit(".", 1)[1]
        result = execute(ir, list(mutant.argv), mutant.stdin, step_budget)
        tally = by_kind.setdefault(kind, [0, 0])
        tally[0] += 1
        if result.termination == NORMAL:
            tally[1] += 1
            normal += 1
    return FuzzReport(
        total=n_mutants,
        normal=normal,
        by_kind={k: (v[0], v[1]) for k, v in by_kind.items()},
    )
