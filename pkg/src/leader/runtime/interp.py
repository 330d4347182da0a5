"""Deterministic interpreter over the lowered IR.

Locals start as poison; using poison observably (branching, printing,
returning, dereferencing, or indexing with it) traps UninitRead, while
arithmetic and plain copies propagate it silently.  Globals are
zero-initialized.  The step budget counts statement-entry events (the
instructions flagged head by lowering), which the reference evaluator in
leader.runtime.reference counts identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from leader.minic import ast
from leader.minic.ir import IrModule, lower
from leader.runtime.testcase import (
    CALL_DEPTH_LIMIT,
    DEFAULT_STEP_BUDGET,
    NORMAL,
    STEP_LIMIT,
    TRAP,
    CoverageReport,
    ExecResult,
    TestCase,
)


class _Poison:
    __slots__ = ()

    def __repr__(self):
        return "<poison>"


POISON = _Poison()


class _Halt(Exception):
    def __init__(self, termination: str, trap: str | None = None, exit_code=None):
        self.termination = termination
        self.trap = trap
        self.exit_code = exit_code


def _trunc_div(a: int, b: int) -> int:
    q = a // b
    if q < 0 and q * b != a:
        q += 1
    return q


def _trunc_mod(a: int, b: int) -> int:
    return a - _trunc_div(a, b) * b


@dataclass
class _Frame:
    func: object
    fid: int
    pc: int = 0
    regs: list = field(default_factory=list)
    vars: dict = field(default_factory=dict)
    arrays: dict = field(default_factory=dict)
    ret_dst: int | None = None


class _Machine:
    def __init__(self, ir: IrModule, argv, stdin: bytes, budget: int):
        self.ir = ir
        self.argv = [a.encode("utf-8") for a in argv]
        self.stdin = stdin
        self.stdin_pos = 0
        self.out = bytearray()
        self.budget = budget
        self.steps = 0
        self.visited: list[int] = []
        self.frames: list[_Frame] = []
        self.frame_store: dict[int, _Frame] = {}
        self.next_fid = 0
        self.gvars: dict = {}
        self.garrays: dict = {}
        for name, kind, length, init in ir.globals:
            if kind == "array":
                self.garrays[name] = [0] * length
            else:
                self.gvars[name] = init

    def trap(self, kind: str):
        raise _Halt(TRAP, trap=kind)

    def push_frame(self, fname: str, args: list, ret_dst: int | None):
        if len(self.frames) >= CALL_DEPTH_LIMIT:
            raise _Halt(STEP_LIMIT)
        fn = self.ir.functions[fname]
        frame = _Frame(fn, self.next_fid, regs=[POISON] * fn.nregs, ret_dst=ret_dst)
        self.next_fid += 1
        for name, (kind, length) in fn.vars.items():
            if kind == "array":
                frame.arrays[name] = [POISON] * length
            else:
                frame.vars[name] = POISON
        for pname, value in zip(fn.params, args):
            frame.vars[pname] = value
        self.frames.append(frame)
        self.frame_store[frame.fid] = frame

    def read_var(self, frame: _Frame, name: str):
        if name in frame.vars:
            return frame.vars[name]
        return self.gvars[name]

    def write_var(self, frame: _Frame, name: str, value):
        if name in frame.vars:
            frame.vars[name] = value
        else:
            self.gvars[name] = value

    def array_of(self, frame: _Frame, name: str) -> list:
        if name in frame.arrays:
            return frame.arrays[name]
        return self.garrays[name]

    def addr_of(self, frame: _Frame, name: str):
        if name in frame.vars:
            return ("l", frame.fid, name)
        return ("g", name)

    def load_slot(self, ptr):
        if ptr[0] == "g":
            return self.gvars[ptr[1]]
        return self.frame_store[ptr[1]].vars[ptr[2]]

    def store_slot(self, ptr, value):
        if ptr[0] == "g":
            self.gvars[ptr[1]] = value
        else:
            self.frame_store[ptr[1]].vars[ptr[2]] = value

    def check_index(self, idx, length: int) -> int:
        if idx is POISON:
            self.trap("UninitRead")
        if not (0 <= idx < length):
            self.trap("OutOfBounds")
        return idx

    def run(self) -> ExecResult:
        self.push_frame("main", [], None)
        try:
            exit_code = self.loop()
        except _Halt as h:
            return ExecResult(
                bytes(self.out), h.exit_code, h.termination, h.trap, self.steps
            )
        return ExecResult(bytes(self.out), exit_code, NORMAL, None, self.steps)

    def loop(self) -> int:
        while True:
            frame = self.frames[-1]
            ins = frame.func.instrs[frame.pc]
            if ins.head:
                if self.steps >= self.budget:
                    raise _Halt(STEP_LIMIT)
                self.steps += 1
                self.visited.append(ins.stmt)
            op = ins.op
            frame.pc += 1
            if op == "LoadConst":
                frame.regs[ins.dst] = ins.args[0]
            elif op == "LoadVar":
                if len(ins.args) > 1:
                    frame.regs[ins.dst] = self.addr_of(frame, ins.args[0])
                else:
                    frame.regs[ins.dst] = self.read_var(frame, ins.args[0])
            elif op == "StoreVar":
                self.write_var(frame, ins.args[0], frame.regs[ins.args[1]])
            elif op == "LoadIndex":
                arr = self.array_of(frame, ins.args[0])
                idx = self.check_index(frame.regs[ins.args[1]], len(arr))
                frame.regs[ins.dst] = arr[idx]
            elif op == "StoreIndex":
                arr = self.array_of(frame, ins.args[0])
                idx = self.check_index(frame.regs[ins.args[1]], len(arr))
                arr[idx] = frame.regs[ins.args[2]]
            elif op == "LoadDeref":
                p = frame.regs[ins.args[0]]
                if p is POISON:
                    self.trap("UninitRead")
                if not isinstance(p, tuple):  # null literal 0 stays an int
                    self.trap("NullDeref")
                frame.regs[ins.dst] = self.load_slot(p)
            elif op == "StoreDeref":
                p = frame.regs[ins.args[0]]
                if p is POISON:
                    self.trap("UninitRead")
                if not isinstance(p, tuple):
                    self.trap("NullDeref")
                self.store_slot(p, frame.regs[ins.args[1]])
            elif op == "Arith":
                o, a, b = ins.args
                va, vb = frame.regs[a], frame.regs[b]
                frame.regs[ins.dst] = self.arith(o, va, vb)
            elif op == "Compare":
                o, a, b = ins.args
                va, vb = frame.regs[a], frame.regs[b]
                if va is POISON or vb is POISON:
                    frame.regs[ins.dst] = POISON
                else:
                    frame.regs[ins.dst] = int(self.compare(o, va, vb))
            elif op == "Jump":
                frame.pc = ins.args[0]
            elif op == "Branch":
                c = frame.regs[ins.args[0]]
                if c is POISON:
                    self.trap("UninitRead")
                frame.pc = ins.args[1] if c != 0 else ins.args[2]
            elif op == "Call":
                fname, arg_regs = ins.args
                self.push_frame(fname, [frame.regs[r] for r in arg_regs], ins.dst)
            elif op == "Return":
                value = None
                if ins.args:
                    if ins.args[0] == "implicit":
                        self.trap("UninitRead")
                    value = frame.regs[ins.args[0]]
                    if value is POISON:
                        self.trap("UninitRead")
                self.frames.pop()
                del self.frame_store[frame.fid]
                if not self.frames:
                    return value if value is not None else 0
                if frame.ret_dst is not None:
                    self.frames[-1].regs[frame.ret_dst] = value
            elif op == "Print":
                v = frame.regs[ins.args[0]]
                if v is POISON:
                    self.trap("UninitRead")
                if ins.args[1] == "char":
                    self.out.append(v % 256)
                else:
                    self.out.extend(str(v).encode("ascii"))
                    self.out.append(10)
            elif op == "ArgvRead":
                mode = ins.args[0]
                if mode == "argc":
                    frame.regs[ins.dst] = len(self.argv)
                elif mode == "argat":
                    i = frame.regs[ins.args[1]]
                    j = frame.regs[ins.args[2]]
                    if i is POISON or j is POISON:
                        self.trap("UninitRead")
                    if 0 <= i < len(self.argv) and 0 <= j < len(self.argv[i]):
                        frame.regs[ins.dst] = self.argv[i][j]
                    else:
                        frame.regs[ins.dst] = -1
                else:  # stdin
                    if self.stdin_pos < len(self.stdin):
                        frame.regs[ins.dst] = self.stdin[self.stdin_pos]
                        self.stdin_pos += 1
                    else:
                        frame.regs[ins.dst] = -1
            else:
                raise RuntimeError(f"unknown op {op}")

    def arith(self, op: str, a, b):
        if op in ("/", "%"):
            if b is POISON:
                return POISON
            if b == 0:
                self.trap("DivByZero")
            if a is POISON:
                return POISON
            return _trunc_div(a, b) if op == "/" else _trunc_mod(a, b)
        if a is POISON or b is POISON:
            return POISON
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        raise RuntimeError(f"unknown arith {op}")

    @staticmethod
    def compare(op: str, a, b) -> bool:
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b


def execute(
    ir: IrModule,
    argv: tuple[str, ...] | list[str],
    stdin: bytes = b"",
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> ExecResult:
    """Run a lowered module to completion or abnormal termination."""
    return _Machine(ir, argv, stdin, step_budget).run()


def execute_with_coverage(
    ir: IrModule,
    argv,
    stdin: bytes = b"",
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[ExecResult, list[int]]:
    m = _Machine(ir, argv, stdin, step_budget)
    result = m.run()
    return result, m.visited


def run_tests(
    ir: IrModule, tests: list[TestCase], step_budget: int = DEFAULT_STEP_BUDGET
) -> tuple[dict[str, ExecResult], CoverageReport]:
    """Execute every test, collecting per-test and union coverage."""
    results: dict[str, ExecResult] = {}
    per_test: dict[str, frozenset[int]] = {}
    for t in tests:
        result, visited = execute_with_coverage(ir, t.argv, t.stdin, step_budget)
        results[t.id] = result
        per_test[t.id] = frozenset(visited)
    return results, CoverageReport.collect(per_test)


def run_unit_tests(
    unit: ast.SourceUnit,
    tests: list[TestCase],
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[dict[str, ExecResult], CoverageReport]:
    return run_tests(lower(unit), tests, step_budget)
