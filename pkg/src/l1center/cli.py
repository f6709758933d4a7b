"""``l1center`` command line: solve, oracle, decide, gen, bench."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

from . import bench as bench_mod
from .decision import decide_side
from .generate import DISTRIBUTIONS, random_instance
from .lp_core import InconsistentDecision, LineSpec, Rect
from .model import Instance, InstanceError, Metric, PrepTable, apply_weight_reduction, to_l1_frame
from .oracle import OracleSizeError, oracle_center, oracle_center_approx
from .solver import SolverConfig, solve

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SIZE = 3

# n*m above this is refused rather than risking memory exhaustion
SOLVE_LIMIT = 50_000_000


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _read_instance(path: str | None, metric: str | None) -> Instance:
    if path is None:
        raise CliError("--input is required")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if metric is not None and isinstance(doc, dict):
        doc["metric"] = metric
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            inst = Instance.from_json(doc)
        except InstanceError as exc:
            raise CliError(f"{path}: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return inst


def _floats(text: str, count: int, flag: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != count:
        raise CliError(f"{flag} expects {count} comma-separated numbers")
    return vals


def _ints(text: str, flag: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        vals = []
    if not vals or any(v < 1 for v in vals):
        raise CliError(f"{flag} expects a comma-separated list of positive integers")
    return vals


def _emit(doc: Any) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _result_doc(center: Sequence[float], objective: float, stats: dict[str, Any]) -> dict[str, Any]:
    return {"center": {"x": float(center[0]), "y": float(center[1])}, "objective": float(objective), "stats": stats}


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _read_instance(args.input, args.metric)
    if inst.n * inst.m > SOLVE_LIMIT:
        raise CliError(f"n*m = {inst.n * inst.m} exceeds the limit {SOLVE_LIMIT}", EXIT_SIZE)
    cfg = SolverConfig(seed=args.seed, tolerance=args.tolerance, trace=args.emit_trace is not None)
    res = solve(inst, cfg)
    if args.emit_trace is not None:
        Path(args.emit_trace).write_text(json.dumps(res.trace, sort_keys=True) + "\n")
    _emit(res.to_json())
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    inst = _read_instance(args.input, args.metric)
    if args.tol is not None:
        q, v = oracle_center_approx(inst, args.tol)
        method = "golden-section"
    else:
        try:
            q, v = oracle_center(inst)
        except OracleSizeError as exc:
            raise CliError(str(exc), EXIT_SIZE) from None
        method = "exhaustive"
    _emit(_result_doc(q, v, {"n": inst.n, "m": inst.m, "method": method, "metric": inst.metric.value}))
    return EXIT_OK


def cmd_decide(args: argparse.Namespace) -> int:
    inst = _read_instance(args.input, args.metric)
    x1, x2, y1, y2 = _floats(args.rect, 4, "--rect")
    a, b, c = _floats(args.line, 3, "--line")
    if a == 0 and b == 0:
        raise CliError("--line needs a nonzero normal (a, b)")
    if not (x1 <= x2 and y1 <= y2):
        raise CliError("--rect must satisfy x1 <= x2 and y1 <= y2")
    work = apply_weight_reduction(inst)
    if work.metric is Metric.LINF:
        # the line and rectangle are given in the L1 frame of the instance
        work, _ = to_l1_frame(work)
    table = PrepTable.from_instance(work)
    try:
        out = decide_side(table, Rect(x1, x2, y1, y2), LineSpec.from_coeffs(a, b, c), tol=args.tolerance)
    except InconsistentDecision as exc:
        raise CliError(f"inconsistent decision: {exc}") from None
    doc: dict[str, Any] = {"decision": {"FOUND": "center", "POSITIVE": "positive", "NEGATIVE": "negative"}[out.kind.name]}
    if out.found:
        doc["center"] = {"x": out.point[0], "y": out.point[1]}
        doc["objective"] = out.value
    _emit(doc)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        inst = random_instance(args.n, args.m, args.seed, args.distribution, args.metric or "l1")
    except InstanceError as exc:
        raise CliError(str(exc)) from None
    text = json.dumps(inst.to_json()) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    ns = _ints(args.n_list, "--n-list")
    ms = _ints(args.m_list, "--m-list")
    if args.repeats < 1:
        raise CliError("--repeats must be at least 1")
    rows = bench_mod.run_bench(ns, ms, args.repeats, args.seed)
    sys.stdout.write(bench_mod.rows_to_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="instance JSON file ('-' for stdin)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--metric", choices=[m.value for m in Metric], default=None,
                        help="override the metric stored in the input")
    common.add_argument("--emit-trace", metavar="PATH", default=None)

    p = argparse.ArgumentParser(prog="l1center", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="compute the center")
    s.set_defaults(func=cmd_solve)
    o = sub.add_parser("oracle", parents=[common], help="brute-force reference center")
    o.add_argument("--tol", type=float, default=None, help="use the golden-section search at this tolerance")
    o.set_defaults(func=cmd_oracle)
    d = sub.add_parser("decide", parents=[common], help="locate the center relative to a line")
    d.add_argument("--rect", required=True, help="x1,x2,y1,y2 (inf allowed)")
    d.add_argument("--line", required=True, help="a,b,c for the line a*x + b*y = c")
    d.set_defaults(func=cmd_decide)
    g = sub.add_parser("gen", parents=[common], help="write a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform")
    g.add_argument("--output", default=None)
    g.set_defaults(func=cmd_gen)
    b = sub.add_parser("bench", parents=[common], help="time solve over a size grid (CSV)")
    b.add_argument("--n-list", default="100,1000,10000")
    b.add_argument("--m-list", default="10")
    b.add_argument("--repeats", type=int, default=3)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
