"""Command-line front end.

Exit codes: 0 success, 1 check or parse failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .circuits import BasisParams, taggant_basis
from .dsl import ExecutionError, ParseError, execute, parse
from .measures import entanglement_of_projection, ep_closed_form, tagged_alpha_state
from .scenarios import (
    FIG1_CUT,
    MEAS_BASES,
    SCENARIOS,
    ScenarioTrace,
    check_2x4_invariance,
    check_sandwich,
    run_fig1a,
    run_fig1b,
    run_fig2a,
    run_fig2b,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
CHECK_TOL = 1e-6
SANDWICH_STATES = 20
SANDWICH_BASES = 10
HEADER = ("step", "label", "e_pf", "e_f", "e_a")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x: float | None) -> str:
    """Nine significant digits; numerical dust below 1e-12 prints as 0."""
    if x is None:
        return ""
    if abs(x) < 1e-12:
        x = 0.0
    return f"{x:.9g}"


def trace_csv(trace: ScenarioTrace) -> str:
    with_ep = any(s.e_p is not None for s in trace.steps)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER + (("e_p",) if with_ep else ()))
    for k, s in enumerate(trace.steps):
        row = [str(k), s.label, fmt(s.e_pf), fmt(s.e_f), fmt(s.e_a)]
        if with_ep:
            row.append(fmt(s.e_p))
        w.writerow(row)
    return buf.getvalue()


def _emit(text: str, output: str | None, stdout: TextIO) -> None:
    if output is None:
        stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _err(msg: str, stderr: TextIO) -> None:
    if stderr.isatty() and not os.environ.get("ERASERLAB_NO_COLOR"):
        msg = f"\x1b[31m{msg}\x1b[0m"
    print(msg, file=stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eraserlab", description="Entanglement-eraser circuits and measures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a built-in scenario and print its trace as CSV")
    run.add_argument("scenario", help=f"one of {', '.join(SCENARIOS)}")
    run.add_argument("--meas", choices=sorted(MEAS_BASES), default="hbar_vbar")
    run.add_argument("--theta", type=float, default=math.pi / 4)
    run.add_argument("--phi", type=float, default=0.0)
    run.add_argument("--output")

    sweep = sub.add_parser("sweep", help="closed-form vs numeric E_p over a^2")
    sweep.add_argument("--alpha2", type=float, default=0.5)
    sweep.add_argument("--grid", type=int, default=11)
    sweep.add_argument("--output")

    ex = sub.add_parser("exec", help="parse and execute a DSL program")
    ex.add_argument("path")
    ex.add_argument("--output")

    check = sub.add_parser("check", help="2x4 invariance and E_f <= E_p <= E_a checks")
    check.add_argument("--samples", type=int, default=1000)
    check.add_argument("--seed", type=int, default=0)
    return p


def cmd_run(args, stdout: TextIO, stderr: TextIO) -> int:
    name = args.scenario
    if name == "fig1a":
        trace = run_fig1a()
    elif name == "fig1b":
        trace = run_fig1b(BasisParams(args.theta, args.phi))
    elif name == "fig2a":
        trace = run_fig2a()
    elif name == "fig2b":
        trace = run_fig2b(args.meas)
    else:
        _err(f"unknown scenario: {name} (expected one of {', '.join(SCENARIOS)})", stderr)
        return EXIT_USAGE
    _emit(trace_csv(trace), args.output, stdout)
    return EXIT_OK


def sweep_rows(alpha2: float, grid: int) -> list[tuple[float, float, float]]:
    state = tagged_alpha_state(alpha2)
    rows = []
    for a2 in np.linspace(0.0, 1.0, grid):
        a2 = float(a2)
        numeric = entanglement_of_projection(
            state, FIG1_CUT, taggant_basis(BasisParams.from_a2(a2))
        ).value
        rows.append((a2, ep_closed_form(alpha2, a2), numeric))
    return rows


def cmd_sweep(args, stdout: TextIO, stderr: TextIO) -> int:
    if not (0.0 <= args.alpha2 <= 1.0):
        _err(f"--alpha2 must be in [0, 1], got {args.alpha2}", stderr)
        return EXIT_USAGE
    if args.grid < 2:
        _err(f"--grid must be at least 2, got {args.grid}", stderr)
        return EXIT_USAGE
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("a2", "ep_closed_form", "ep_numeric"))
    for row in sweep_rows(args.alpha2, args.grid):
        w.writerow([fmt(v) for v in row])
    _emit(buf.getvalue(), args.output, stdout)
    return EXIT_OK


def cmd_exec(args, stdout: TextIO, stderr: TextIO) -> int:
    path = Path(args.path)
    try:
        source = path.read_bytes()
    except OSError as exc:
        _err(f"cannot read {path}: {exc.strerror}", stderr)
        return EXIT_IO
    try:
        program = parse(source)
        trace = execute(program, base_dir=path.parent)
    except ParseError as exc:
        _err(f"{path}: {exc} ({exc.kind})", stderr)
        return EXIT_FAIL
    except ExecutionError as exc:
        _err(f"{path}: {exc}", stderr)
        return EXIT_IO if exc.io else EXIT_FAIL
    _emit(trace_csv(trace), args.output, stdout)
    return EXIT_OK


def cmd_check(args, stdout: TextIO, stderr: TextIO) -> int:
    if args.samples < 1:
        _err(f"--samples must be positive, got {args.samples}", stderr)
        return EXIT_USAGE
    inv = check_2x4_invariance(args.samples, args.seed)
    sandwich = check_sandwich(min(args.samples, SANDWICH_STATES), SANDWICH_BASES, args.seed)
    print(f"2x4 invariance: max |E_p - 1| = {inv:.3e} over {args.samples} bases", file=stdout)
    print(f"sandwich E_f <= E_p <= E_a: max violation = {sandwich:.3e}", file=stdout)
    ok = inv < CHECK_TOL and sandwich < CHECK_TOL
    print("ok" if ok else "FAILED", file=stdout)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "exec": cmd_exec, "check": cmd_check}


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _err(f"usage error: {exc}", stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, stdout, stderr)
    except OSError as exc:
        _err(f"I/O error: {exc}", stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())
