"""Command-line driver: parse, unroll, run, compare, listbench."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ExecutionError, OracleMismatch, ParseError, TransformError
from .ilp import ISSUE_POLICIES, LATENCY_PRESETS, schedule_trace
from .interp import DEFAULT_BUDGET, GUARD_COSTS, GUARD_EVAL, Diverged, check_equiv, dump_trace, execute
from .listlab import VARIANTS, VariantId, traversal_report
from .parser import dump_ast, parse, pretty
from .unroll import UnrollPlan, unroll

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_TRANSFORM, EXIT_DIVERGED, EXIT_ORACLE, EXIT_RUNTIME = range(7)

REPORT_COLUMNS = [
    "program",
    "variant",
    "W",
    "renaming",
    "latency-preset",
    "instructions",
    "cycles",
    "ILP",
    "guard_evals",
    "speedup_vs_baseline",
]
LISTBENCH_COLUMNS = REPORT_COLUMNS + ["n", "cycles_per_node", "exit_kind"]


class CliError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        super().__init__(message)


# ------------------------------------------------------------ arg helpers


def _int_list(text: str) -> list:
    """``2,4,8`` or ``0..64`` (inclusive) or a mix of both."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _list_arg(minimum: int, what: str):
    def convert(text: str) -> list:
        try:
            values = _int_list(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad {what} list {text!r}") from None
        if not values or any(v < minimum for v in values):
            raise argparse.ArgumentTypeError(f"every {what} must be >= {minimum}")
        return values

    return convert


def _flatten(groups, default):
    if not groups:
        return list(default)
    seen = []
    for g in groups:
        for v in g:
            if v not in seen:
                seen.append(v)
    return seen


def _input_pair(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        if "," in value:
            return name.strip(), [int(v) for v in value.split(",")]
        return name.strip(), int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-integer value in {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _factor(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("unroll factor must be >= 2")
    return v


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None


def _load(path: str):
    src = _read(path)
    try:
        return parse(src)
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"{path}:{exc}") from None


def _write_out(path: Optional[str], text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


def _decimal(x, places: int = 6) -> str:
    return f"{float(x):.{places}f}"


def _onoff(flag: bool) -> str:
    return "on" if flag else "off"


def _plan(args, factor: int) -> UnrollPlan:
    loop = args.loop
    return UnrollPlan(
        loop=int(loop) if loop.isdigit() else loop,
        factor=factor,
        mode=args.mode,
        simplify_guard=not args.no_simplify,
        fuse_body=args.fuse_body,
    )


def _transform(program, plan: UnrollPlan):
    try:
        return unroll(program, plan)
    except TransformError as exc:
        raise CliError(EXIT_TRANSFORM, f"cannot unroll: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_parse(args, out) -> int:
    program = _load(args.file)
    out.write(dump_ast(program) + "\n" if args.emit == "ast" else pretty(program))
    return EXIT_OK


def cmd_unroll(args, out) -> int:
    program = _load(args.file)
    result = _transform(program, _plan(args, args.factor))
    out.write(dump_ast(result) + "\n" if args.emit == "ast" else pretty(result))
    return EXIT_OK


def _execute(program, inputs, budget, tracing, guard_cost):
    try:
        return execute(program, inputs, budget, tracing=tracing, guard_cost=guard_cost)
    except ExecutionError as exc:
        raise CliError(EXIT_RUNTIME, f"runtime error: {exc}") from None
    except (KeyError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"bad input: {exc.args[0] if exc.args else exc}") from None


def cmd_run(args, out) -> int:
    program = _load(args.file)
    inputs = dict(args.input or [])
    tracing = bool(args.trace) or args.width is not None
    store, met, tr = _execute(program, inputs, args.budget, tracing, args.guard_cost)
    for name, value in sorted(store.scalars.items()):
        out.write(f"{name} = {value}\n")
    for name, values in sorted(store.arrays.items()):
        out.write(f"{name} = {{{', '.join(map(str, values))}}}\n")
    out.write(
        f"# metrics: statements={met.statements} loop_guard_evals={met.loop_guard_evals} "
        f"if_guard_evals={met.if_guard_evals} for_increments={met.for_increments} "
        f"loop_overhead={met.loop_overhead} budget_used={met.budget_used} "
        f"terminated={str(met.terminated).lower()}\n"
    )
    if args.width is not None:
        res = schedule_trace(tr, args.width, args.latency, args.rename, args.issue)
        out.write(
            f"# cost: W={args.width} latency={res.latency} renaming={_onoff(args.rename)} "
            f"instructions={res.total_instructions} cycles={res.total_cycles} ILP={_decimal(res.ilp, 4)}\n"
        )
    if args.trace:
        path = None if args.trace == "-" else args.trace
        _write_out(path, dump_trace(tr, os.path.basename(args.file)), out)
    return EXIT_OK


@dataclass
class CompareConfig:
    source: str
    factors: list
    widths: list
    latency: str = "unit"
    renaming: bool = False
    guard_cost: str = "single"
    trials: int = 100
    seed: int = 0
    csv_path: Optional[str] = None
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(k < 2 for k in self.factors):
            raise ValueError("unroll factors must be >= 2")
        if not self.widths or any(w < 1 for w in self.widths):
            raise ValueError("widths must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def _config_line(command: str, pairs: list) -> str:
    return "# config: " + " ".join([f"command={command}"] + [f"{k}={v}" for k, v in pairs]) + "\n"


def _csv_text(header: str, columns: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _guard_count(trace) -> int:
    return sum(1 for i in trace if i.kind == GUARD_EVAL)


def cmd_compare(args, out) -> int:
    cfg = CompareConfig(
        source=args.file,
        factors=_flatten(args.factor, []),
        widths=_flatten(args.width, [1]),
        latency=args.latency,
        renaming=args.rename,
        guard_cost=args.guard_cost,
        trials=args.trials,
        seed=args.seed,
        csv_path=args.csv,
        inputs=dict(args.input or []),
    )
    program = _load(cfg.source)
    name = os.path.basename(cfg.source)
    versions = [("original", program)]
    summary = []
    for k in cfg.factors:
        transformed = _transform(program, _plan(args, k))
        versions.append((f"k={k}", transformed))
    if not cfg.factors:
        versions.append(("self", program))

    for label, prog in versions[1:]:
        verdict = check_equiv(program, prog, cfg.trials, args.budget, cfg.seed)
        if isinstance(verdict, Diverged):
            witness = " ".join(f"{k}={v}" for k, v in sorted(verdict.witness.items()))
            raise CliError(
                EXIT_DIVERGED,
                f"{label}: Diverged at {verdict.location} ({verdict.left} vs {verdict.right}); "
                f"witness: {witness}; seed {cfg.seed}",
            )
        detail = f"{verdict.trials} trials" if verdict.verdict == "Equivalent" else f"{len(verdict.cases)} of {verdict.trials} trials hit the budget"
        summary.append(f"equivalence {label}: {verdict.verdict} ({detail}, seed {cfg.seed})")

    traces = {}
    for label, prog in versions:
        _, met, tr = _execute(prog, cfg.inputs, args.budget, True, cfg.guard_cost)
        if not met.terminated:
            raise CliError(EXIT_RUNTIME, f"{label}: step budget exhausted on the given inputs")
        traces[label] = tr

    rows, best = [], None
    base_guards = _guard_count(traces["original"])
    for label, _ in versions:
        tr = traces[label]
        for w in cfg.widths:
            res = schedule_trace(tr, w, cfg.latency, cfg.renaming, args.issue)
            base = schedule_trace(traces["original"], w, cfg.latency, cfg.renaming, args.issue)
            sp = Fraction(1) if res.total_cycles == base.total_cycles else Fraction(base.total_cycles, res.total_cycles)
            rows.append(
                [name, label, w, _onoff(cfg.renaming), res.latency, res.total_instructions,
                 res.total_cycles, _decimal(res.ilp), _guard_count(tr), _decimal(sp)]
            )
            if label != "original" and (best is None or sp > best[0]):
                best = (sp, label, w)
        if label != "original":
            g = _guard_count(tr)
            ratio = Fraction(base_guards, g) if g else Fraction(1)
            summary.append(f"overhead ratio {label}: {base_guards}/{g} = {_decimal(ratio, 4)}")
    if best is not None:
        summary.append(f"max speedup: {_decimal(best[0], 4)} ({best[1]}, W={best[2]})")

    header = _config_line(
        "compare",
        [
            ("file", cfg.source),
            ("factors", ",".join(map(str, cfg.factors)) or "self"),
            ("widths", ",".join(map(str, cfg.widths))),
            ("loop", args.loop),
            ("mode", args.mode),
            ("simplify", _onoff(not args.no_simplify)),
            ("fuse_body", _onoff(args.fuse_body)),
            ("latency", cfg.latency),
            ("renaming", _onoff(cfg.renaming)),
            ("guard_cost", cfg.guard_cost),
            ("issue", args.issue),
            ("trials", cfg.trials),
            ("budget", args.budget),
            ("seed", cfg.seed),
            ("inputs", ",".join(f"{k}={_fmt_input(v)}" for k, v in sorted(cfg.inputs.items())) or "-"),
        ],
    )
    text = _csv_text(header, REPORT_COLUMNS, rows)
    if cfg.csv_path:
        _write_out(cfg.csv_path, text, out)
        out.write("\n".join(summary) + "\n")
    else:
        out.write(text)
        sys.stderr.write("\n".join(summary) + "\n")
    return EXIT_OK


def _fmt_input(v) -> str:
    return ":".join(map(str, v)) if isinstance(v, list) else str(v)


def cmd_listbench(args, out) -> int:
    variants = [VariantId.parse(v) for v in _flatten(args.variant, [v.value for v in VARIANTS])]
    ns = _flatten(args.n, [0, 1, 2, 3, 4, 5, 12, 60])
    widths = _flatten(args.width, [2])
    try:
        report = traversal_report(ns, widths, args.latency, args.rename, variants, issue=args.issue)
    except OracleMismatch as exc:
        raise CliError(EXIT_ORACLE, f"oracle mismatch: {exc}") from None
    rows = []
    for r in report:
        rows.append(
            [
                "listlab", r.variant.value, r.width, _onoff(r.renaming), r.latency, r.instructions,
                r.cycles, _decimal(r.ilp), r.guard_evals,
                "" if r.speedup_vs_baseline is None else _decimal(r.speedup_vs_baseline),
                r.n, "" if r.cycles_per_node is None else _decimal(r.cycles_per_node), r.exit_kind,
            ]
        )
    header = _config_line(
        "listbench",
        [
            ("variants", ",".join(v.value for v in variants)),
            ("n", ",".join(map(str, ns))),
            ("widths", ",".join(map(str, widths))),
            ("latency", args.latency),
            ("renaming", _onoff(args.rename)),
            ("issue", args.issue),
            ("seed", args.seed),
        ],
    )
    text = _csv_text(header, LISTBENCH_COLUMNS, rows)
    _write_out(args.csv, text, out)
    if args.csv:
        out.write(f"{len(rows)} rows, 0 oracle mismatches\n")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_unroll_flags(p, factor_list: bool) -> None:
    if factor_list:
        p.add_argument("--factor", action="append", type=_list_arg(2, "factor"),
                       help="unroll factor(s), e.g. 2,4,8; omit for a self-compare")
    else:
        p.add_argument("--factor", type=_factor, default=2, help="unroll factor k (default 2)")
    p.add_argument("--loop", default="0", help="loop label or pre-order index (default 0)")
    p.add_argument("--mode", choices=["auto", "for", "wp"], default="auto")
    p.add_argument("--no-simplify", action="store_true", help="keep the raw wp guard conjuncts")
    p.add_argument("--fuse-body", action="store_true",
                   help="collapse WHILE body copies into one assignment per variable when linear")


def _add_model_flags(p, width_list: bool) -> None:
    if width_list:
        p.add_argument("--width", action="append", type=_list_arg(1, "width"), help="issue width(s)")
    else:
        p.add_argument("--width", type=_positive, help="also report model cycles at this width")
    p.add_argument("--latency", choices=sorted(LATENCY_PRESETS), default="unit")
    p.add_argument("--rename", action="store_true", help="drop WAW/WAR edges")
    p.add_argument("--issue", choices=ISSUE_POLICIES, default="ooo",
                   help="slot-filling (ooo) or strictly in-order issue")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loopunroll", description="Loop unrolling experiments on a small C-like language.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and print a program")
    p.add_argument("file")
    p.add_argument("--emit", choices=["ast", "pretty"], default="pretty")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("unroll", help="unroll one loop and print the result")
    p.add_argument("file")
    _add_unroll_flags(p, factor_list=False)
    p.add_argument("--emit", choices=["ast", "pretty"], default="pretty")
    p.set_defaults(func=cmd_unroll)

    p = sub.add_parser("run", help="interpret a program")
    p.add_argument("file")
    p.add_argument("--input", action="append", type=_input_pair, metavar="NAME=VALUE")
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    p.add_argument("--guard-cost", choices=GUARD_COSTS, default="single")
    p.add_argument("--trace", metavar="PATH", help="write the dynamic trace as JSON lines ('-' for stdout)")
    _add_model_flags(p, width_list=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="check and cost unrolled versions against the original")
    p.add_argument("file")
    _add_unroll_flags(p, factor_list=True)
    _add_model_flags(p, width_list=True)
    p.add_argument("--guard-cost", choices=GUARD_COSTS, default="single")
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    p.add_argument("--input", action="append", type=_input_pair, metavar="NAME=VALUE")
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("listbench", help="list-counting traversal comparison")
    p.add_argument("--variant", action="append", type=lambda s: s.split(","),
                   help="V1-naive, V2-sentinel3, V3-twoptr (default all)")
    p.add_argument("--n", action="append", type=_list_arg(0, "node count"), help="node counts, e.g. 0..64")
    _add_model_flags(p, width_list=True)
    p.add_argument("--seed", type=int, default=0, help="echoed only; the benchmark is deterministic")
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(func=cmd_listbench)
    return ap


def main(argv=None, stdout=None) -> int:
    out = stdout or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "listbench":
            try:
                args.variant = [[VariantId.parse(v).value for v in g] for g in args.variant] if args.variant else None
            except ValueError as exc:
                ap.error(str(exc))
        if args.command == "compare":
            try:
                CompareConfig(args.file, _flatten(args.factor, []), _flatten(args.width, [1]), trials=args.trials)
            except ValueError as exc:
                ap.error(str(exc))
        return args.func(args, out)
    except CliError as exc:
        sys.stderr.write(f"loopunroll: {exc}\n")
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
