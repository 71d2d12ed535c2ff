"""Line-oriented circuit language.

One instruction per line, ``#`` starts a comment::

    # eraserlab-dsl v1
    qubits 3
    partition A=0 B=1 T=2
    init bell 0 1
    cnot 0 2
    report epf
    measure T basis theta=0.7853981633974483 phi=0
    report epf

``qubits`` must come first. ``partition`` may appear once, before any
``measure`` or ``report``. Angles are in radians.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Union

import numpy as np

from .circuits import BasisParams, Gate, MeasurementSpec, apply_gate, product_basis, taggant_basis
from .scenarios import (
    Branch,
    ScenarioTrace,
    Step,
    ensemble_ea,
    ensemble_ef,
    ensemble_ep,
    ensemble_epf,
    measure_branches,
)
from .state import MAX_QUBITS, PartitionSpec, StateFileError, StateVector, bell_state, read_state

VERSION = 1
HEADER = f"# eraserlab-dsl v{VERSION}"
DSL_UNITARY_TOL = 1e-9
MAX_TAGGANT_QUBITS = 2

_INT = re.compile(r"[0-9]+\Z")
_FLOAT = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")
_HEADER = re.compile(r"#\s*eraserlab-dsl\s+v(\S+)\s*\Z")


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str, kind: str = "syntax"):
        self.line = line
        self.column = column
        self.message = message
        self.kind = kind
        super().__init__(f"line {line}, column {column}: {message}")


class ExecutionError(Exception):
    def __init__(self, line: int, message: str, io: bool = False):
        self.line = line
        self.message = message
        self.io = io
        super().__init__(f"line {line}: {message}")


# --- program model -------------------------------------------------------------------


@dataclass(frozen=True)
class InitBits:
    bits: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class InitBell:
    i: int
    j: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class InitState:
    path: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unitary:
    target: int
    entries: tuple[float, ...]  # m00re m00im m01re m01im m10re m10im m11re m11im
    line: int = field(default=0, compare=False)

    def matrix(self) -> np.ndarray:
        e = np.array(self.entries)
        return (e[0::2] + 1j * e[1::2]).reshape(2, 2)


@dataclass(frozen=True)
class Cnot:
    control: int
    target: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Measure:
    theta: float
    phi: float
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Report:
    kind: str  # ep, ef, ea, epf
    theta: float | None = None
    phi: float | None = None
    line: int = field(default=0, compare=False)


Instruction = Union[InitBits, InitBell, InitState, Unitary, Cnot, Measure, Report]
REPORT_KINDS = ("ep", "ef", "ea", "epf")


@dataclass(frozen=True)
class Program:
    register_size: int
    partition: PartitionSpec | None
    instructions: tuple[Instruction, ...]
    versioned: bool = field(default=False, compare=False)

    @property
    def source_spans(self) -> tuple[int, ...]:
        return tuple(i.line for i in self.instructions)


# --- parser --------------------------------------------------------------------------


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        self.tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]
        self.text = text

    def fail(self, index: int, message: str, kind: str = "syntax") -> ParseError:
        col = self.tokens[index][1] if index < len(self.tokens) else len(self.text.rstrip()) + 1
        return ParseError(self.number, col, message, kind)

    def arity(self, n: int, usage: str) -> None:
        if len(self.tokens) != n:
            raise self.fail(min(len(self.tokens), n), f"expected '{usage}'")

    def int_at(self, index: int, size: int | None = None) -> int:
        tok = self.tokens[index][0]
        if not _INT.match(tok):
            raise self.fail(index, f"expected a non-negative integer, got {tok!r}")
        value = int(tok)
        if size is not None and value >= size:
            raise self.fail(index, f"qubit index {value} out of range for {size} qubits", "semantic")
        return value

    def float_at(self, index: int, tok: str | None = None) -> float:
        tok = self.tokens[index][0] if tok is None else tok
        if not _FLOAT.match(tok):
            raise self.fail(index, f"expected a number, got {tok!r}")
        value = float(tok)
        if not np.isfinite(value):
            raise self.fail(index, f"number {tok!r} is not finite")
        return value

    def keyed_floats(self, start: int, required: tuple[str, ...], optional: dict[str, float]):
        values: dict[str, float] = {}
        allowed = set(required) | set(optional)
        for k in range(start, len(self.tokens)):
            tok = self.tokens[k][0]
            key, sep, raw = tok.partition("=")
            if not sep or key not in allowed:
                raise self.fail(k, f"expected one of {', '.join(sorted(allowed))} as key=value")
            if key in values:
                raise self.fail(k, f"duplicate {key}")
            values[key] = self.float_at(k, raw)
        for key in required:
            if key not in values:
                raise self.fail(len(self.tokens), f"missing {key}=<float>")
        for key, default in optional.items():
            values.setdefault(key, default)
        return values


def _decode(source: str | bytes) -> str:
    if isinstance(source, str):
        return source
    try:
        return source.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = source.count(b"\n", 0, exc.start) + 1
        col = exc.start - (source.rfind(b"\n", 0, exc.start) + 1) + 1
        raise ParseError(line, col, "invalid UTF-8") from None


def _parse_partition(ln: _Line, n: int) -> PartitionSpec:
    groups: dict[str, list[int]] = {}
    for k in range(1, len(ln.tokens)):
        tok = ln.tokens[k][0]
        key, sep, raw = tok.partition("=")
        if not sep or key not in ("A", "B", "T"):
            raise ln.fail(k, "expected A=<idx,...>, B=<idx,...> or T=<idx,...>")
        if key in groups:
            raise ln.fail(k, f"duplicate {key} group", "semantic")
        idx = []
        for part in raw.split(",") if raw else []:
            if not _INT.match(part):
                raise ln.fail(k, f"invalid qubit index {part!r} in {key} group")
            q = int(part)
            if q >= n:
                raise ln.fail(k, f"qubit index {q} out of range for {n} qubits", "semantic")
            idx.append(q)
        groups[key] = idx
    if not groups.get("A"):
        raise ln.fail(len(ln.tokens), "partition needs a nonempty A group", "semantic")
    try:
        cut = PartitionSpec(tuple(groups["A"]), tuple(groups.get("B", ())), tuple(groups.get("T", ())))
    except ValueError as exc:
        raise ln.fail(1, f"invalid partition: {exc}", "semantic") from None
    if cut.n_qubits != n:
        raise ln.fail(1, f"partition covers {cut.n_qubits} of {n} qubits", "semantic")
    return cut


def parse(source: str | bytes) -> Program:
    """Parse a program; raises :class:`ParseError` at the first error."""
    text = _decode(source)
    n: int | None = None
    partition: PartitionSpec | None = None
    versioned = False
    seen_code = False
    instructions: list[Instruction] = []

    for number, raw in enumerate(text.split("\n"), start=1):
        raw = raw.rstrip("\r")
        code, hash_, comment = raw.partition("#")
        if not seen_code and hash_ and not code.strip():
            m = _HEADER.match("#" + comment)
            if m:
                if m.group(1) != str(VERSION):
                    raise ParseError(number, 1, f"unsupported dsl version v{m.group(1)}", "semantic")
                versioned = True
        ln = _Line(number, code)
        if not ln.tokens:
            continue
        seen_code = True
        op = ln.tokens[0][0]

        if n is None:
            if op != "qubits":
                raise ParseError(number, ln.tokens[0][1], "missing qubits declaration", "semantic")
            ln.arity(2, "qubits N")
            n = ln.int_at(1)
            if not 1 <= n <= MAX_QUBITS:
                raise ln.fail(1, f"register size must be in 1..{MAX_QUBITS}", "semantic")
            continue

        if op == "qubits":
            raise ln.fail(0, "duplicate qubits declaration", "semantic")
        elif op == "partition":
            if partition is not None:
                raise ln.fail(0, "duplicate partition declaration", "semantic")
            if any(isinstance(i, (Measure, Report)) for i in instructions):
                raise ln.fail(0, "partition must precede measure and report", "semantic")
            partition = _parse_partition(ln, n)
        elif op == "init":
            instructions.append(_parse_init(ln, n))
        elif op == "u":
            ln.arity(10, "u <target> <m00re> <m00im> <m01re> <m01im> <m10re> <m10im> <m11re> <m11im>")
            target = ln.int_at(1, n)
            entries = tuple(ln.float_at(k) for k in range(2, 10))
            ins = Unitary(target, entries, number)
            try:
                Gate.single(ins.matrix(), target, tol=DSL_UNITARY_TOL)
            except ValueError as exc:
                raise ln.fail(2, str(exc), "semantic") from None
            instructions.append(ins)
        elif op == "cnot":
            ln.arity(3, "cnot <control> <target>")
            control, target = ln.int_at(1, n), ln.int_at(2, n)
            if control == target:
                raise ln.fail(2, "c-NOT control and target must differ", "semantic")
            instructions.append(Cnot(control, target, number))
        elif op == "measure":
            if len(ln.tokens) < 3 or ln.tokens[1][0] != "T" or ln.tokens[2][0] != "basis":
                raise ln.fail(min(len(ln.tokens), 1), "expected 'measure T basis theta=<float> phi=<float>'")
            vals = ln.keyed_floats(3, ("theta",), {"phi": 0.0})
            _require_partition(ln, partition, need_t=True)
            instructions.append(Measure(vals["theta"], vals["phi"], number))
        elif op == "report":
            instructions.append(_parse_report(ln, partition))
        else:
            raise ln.fail(0, f"unknown instruction {op!r}")

    if n is None:
        raise ParseError(1, 1, "missing qubits declaration", "semantic")
    return Program(n, partition, tuple(instructions), versioned)


def _parse_init(ln: _Line, n: int) -> Instruction:
    if len(ln.tokens) < 2:
        raise ln.fail(1, "expected 'init <bitstring>', 'init bell <i> <j>' or 'init state <path>'")
    what = ln.tokens[1][0]
    if what == "bell":
        ln.arity(4, "init bell <i> <j>")
        i, j = ln.int_at(2, n), ln.int_at(3, n)
        if i == j:
            raise ln.fail(3, "Bell pair needs two distinct qubits", "semantic")
        return InitBell(i, j, ln.number)
    if what == "state":
        if len(ln.tokens) < 3:
            raise ln.fail(2, "expected 'init state <path>'")
        start = ln.tokens[2][1] - 1
        return InitState(ln.text[start:].strip(), ln.number)
    ln.arity(2, "init <bitstring>")
    if set(what) - {"0", "1"}:
        raise ln.fail(1, f"invalid bitstring {what!r}")
    if len(what) != n:
        raise ln.fail(1, f"bitstring has {len(what)} bits, register has {n}", "semantic")
    return InitBits(what, ln.number)


def _require_partition(ln: _Line, partition: PartitionSpec | None, need_t: bool) -> None:
    if partition is None:
        raise ln.fail(0, "partition must be declared first", "semantic")
    if len(partition.a_qubits) != 1:
        raise ln.fail(0, "entanglement needs a single-qubit A group", "semantic")
    if need_t and not partition.t_qubits:
        raise ln.fail(0, "partition has an empty T group", "semantic")


def _parse_report(ln: _Line, partition: PartitionSpec | None) -> Report:
    if len(ln.tokens) < 2 or ln.tokens[1][0] not in REPORT_KINDS:
        raise ln.fail(1, "expected 'report ep|ef|ea|epf'")
    kind = ln.tokens[1][0]
    if kind == "ep":
        vals = ln.keyed_floats(2, ("theta",), {"phi": 0.0})
        _require_partition(ln, partition, need_t=True)
        return Report(kind, vals["theta"], vals["phi"], ln.number)
    ln.arity(2, f"report {kind}")
    _require_partition(ln, partition, need_t=False)
    if kind in ("ef", "ea", "epf") and len(partition.t_qubits) > MAX_TAGGANT_QUBITS:
        raise ln.fail(1, f"taggant of more than {MAX_TAGGANT_QUBITS} qubits is not supported", "semantic")
    return Report(kind, None, None, ln.number)


# --- rendering ----------------------------------------------------------------------


def _idx(qs) -> str:
    return ",".join(str(q) for q in qs)


def render_instruction(ins: Instruction) -> str:
    if isinstance(ins, InitBits):
        return f"init {ins.bits}"
    if isinstance(ins, InitBell):
        return f"init bell {ins.i} {ins.j}"
    if isinstance(ins, InitState):
        return f"init state {ins.path}"
    if isinstance(ins, Unitary):
        return f"u {ins.target} " + " ".join(repr(float(x)) for x in ins.entries)
    if isinstance(ins, Cnot):
        return f"cnot {ins.control} {ins.target}"
    if isinstance(ins, Measure):
        return f"measure T basis theta={ins.theta!r} phi={ins.phi!r}"
    if isinstance(ins, Report):
        if ins.kind == "ep":
            return f"report ep theta={ins.theta!r} phi={ins.phi!r}"
        return f"report {ins.kind}"
    raise TypeError(f"not an instruction: {ins!r}")


def render(p: Program) -> str:
    lines = [HEADER] if p.versioned else []
    lines.append(f"qubits {p.register_size}")
    if p.partition is not None:
        c = p.partition
        lines.append(f"partition A={_idx(c.a_qubits)} B={_idx(c.b_qubits)} T={_idx(c.t_qubits)}")
    lines += [render_instruction(i) for i in p.instructions]
    return "\n".join(lines) + "\n"


# --- execution ----------------------------------------------------------------------


def _nearest_unitary(m: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def execute(p: Program, base_dir: str | PathLike | None = None) -> ScenarioTrace:
    """Run ``p`` from |0...0>; one step per non-report instruction.

    Each ``report`` fills its column on the most recent step (an initial
    ``start`` step is created if nothing has run yet). Relative ``init
    state`` paths resolve against ``base_dir``.
    """
    n = p.register_size
    cut = p.partition
    branches: tuple[Branch, ...] = (Branch(1.0, StateVector.basis("0" * n)),)
    steps: list[Step] = []

    def push(label: str) -> None:
        steps.append(Step(label, branches[0].state, branches=branches if len(branches) > 1 else ()))

    for ins in p.instructions:
        try:
            if isinstance(ins, Report):
                if not steps:
                    push("start")
                steps[-1] = _report(steps[-1], ins, branches, cut)
                continue
            if isinstance(ins, InitBits):
                branches = (Branch(1.0, StateVector.basis(ins.bits)),)
            elif isinstance(ins, InitBell):
                branches = (Branch(1.0, bell_state(n, ins.i, ins.j)),)
            elif isinstance(ins, InitState):
                branches = (Branch(1.0, _load_state(ins, n, base_dir)),)
            elif isinstance(ins, Unitary):
                g = Gate.single(_nearest_unitary(ins.matrix()), ins.target)
                branches = tuple(Branch(b.weight, apply_gate(b.state, g)) for b in branches)
            elif isinstance(ins, Cnot):
                g = Gate.cnot(ins.control, ins.target)
                branches = tuple(Branch(b.weight, apply_gate(b.state, g)) for b in branches)
            elif isinstance(ins, Measure):
                single = taggant_basis(BasisParams(ins.theta, ins.phi))
                spec = MeasurementSpec(cut.t_qubits, product_basis(single, len(cut.t_qubits)))
                branches = measure_branches(branches, spec)
            push(render_instruction(ins))
        except ExecutionError:
            raise
        except (ValueError, IndexError) as exc:
            raise ExecutionError(ins.line, str(exc)) from None
    return ScenarioTrace(tuple(steps), cut if cut is not None else PartitionSpec(range(n)), "dsl")


def _load_state(ins: InitState, n: int, base_dir) -> StateVector:
    path = Path(ins.path)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    try:
        s = read_state(path)
    except StateFileError as exc:
        raise ExecutionError(ins.line, f"{path}: {exc}") from None
    except OSError as exc:
        raise ExecutionError(ins.line, f"cannot read state file {path}: {exc.strerror}", io=True) from None
    if s.n_qubits != n:
        raise ExecutionError(ins.line, f"state file has {s.n_qubits} qubits, register has {n}")
    return s


def _report(step: Step, ins: Report, branches, cut: PartitionSpec) -> Step:
    if ins.kind == "epf":
        return dataclasses.replace(step, e_pf=ensemble_epf(branches, cut))
    if ins.kind == "ef":
        return dataclasses.replace(step, e_f=ensemble_ef(branches, cut))
    if ins.kind == "ea":
        return dataclasses.replace(step, e_a=ensemble_ea(branches, cut))
    single = taggant_basis(BasisParams(ins.theta, ins.phi))
    basis = product_basis(single, len(cut.t_qubits))
    return dataclasses.replace(step, e_p=ensemble_ep(branches, cut, basis))


def parse_file(path: str | PathLike) -> Program:
    return parse(Path(path).read_bytes())
