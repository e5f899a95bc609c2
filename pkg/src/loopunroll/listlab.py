"""Linked-list counting programs over index-array encodings.

Nodes are numbered 1..n and index 0 is the terminal sentinel whose link
points to itself. Three counting strategies are generated as mini-language
source: a plain walk, a walk unrolled three nodes per iteration that relies
on the sentinel, and a two-pointer walk over a doubly linked list.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

from .errors import OracleMismatch
from .ilp import BasicBlock, build_dag, critical_path, schedule_block, schedule_trace, split_blocks
from .interp import execute
from .parser import parse
from .syntax import Program, iter_loops

MAIN, CLEANUP = "main", "cleanup"


@dataclass(frozen=True)
class ListEncoding:
    n: int
    next: tuple
    left: tuple
    first: int
    last: int

    @property
    def right(self) -> tuple:
        return self.next


def encode_list(n: int) -> ListEncoding:
    if n < 0:
        raise ValueError("node count must be >= 0")
    nxt = [0] + [i + 1 for i in range(1, n)] + ([0] if n else [])
    left = [0] + [i - 1 for i in range(1, n + 1)]
    return ListEncoding(n, tuple(nxt), tuple(left), 1 if n else 0, n)


class VariantId(str, Enum):
    V1 = "V1-naive"
    V2 = "V2-sentinel3"
    V3 = "V3-twoptr"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "VariantId":
        t = text.strip()
        for v in cls:
            if t in (v.value, v.name, v.name.lower()):
                return v
        raise ValueError(f"unknown variant {text!r}; expected one of {[v.value for v in cls]}")


VARIANTS = tuple(VariantId)


def _array(name: str, values: tuple) -> str:
    return f"array {name}[{len(values)}] = {{{', '.join(map(str, values))}}};"


def list_source(variant: VariantId, n: int) -> str:
    """Mini-language source for one variant over an ``n``-node list."""
    variant = VariantId(variant)
    enc = encode_list(n)
    if variant is VariantId.V1:
        return "\n".join(
            [
                _array("next", enc.next),
                f"var first = {enc.first};",
                "var lp = 0;",
                "var count = 0;",
                "lp = first;",
                "count = 0;",
                f"label {MAIN}: while (lp != 0) {{",
                "    lp = next[lp];",
                "    count = count + 1;",
                "}",
                "",
            ]
        )
    if variant is VariantId.V2:
        return "\n".join(
            [
                _array("next", enc.next),
                f"var first = {enc.first};",
                "var lp = 0;",
                "var lp1 = 0;",
                "var lp2 = 0;",
                "var count = 0;",
                "lp = first;",
                "count = 0;",
                "lp1 = next[lp];",
                "lp2 = next[lp1];",
                f"label {MAIN}: while (lp2 != 0) {{",
                "    count = count + 3;",
                "    lp = next[lp2];",
                "    lp1 = next[lp];",
                "    lp2 = next[lp1];",
                "}",
                f"label {CLEANUP}: while (lp != 0) {{",
                "    lp = next[lp];",
                "    count = count + 1;",
                "}",
                "",
            ]
        )
    return "\n".join(
        [
            _array("right", enc.right),
            _array("left", enc.left),
            f"var first = {enc.first};",
            f"var last = {enc.last};",
            "var F = 0;",
            "var L = 0;",
            "var count = 0;",
            "count = 0;",
            "if (first == 0) {",
            "    count = 0;",
            "} else {",
            "    F = first;",
            "    L = last;",
            f"    label {MAIN}: while (F != L && right[F] != L) {{",
            "        F = right[F];",
            "        L = left[L];",
            "        count = count + 2;",
            "    }",
            "    if (F == L) {",
            "        count = count + 1;",
            "    } else {",
            "        count = count + 2;",
            "    }",
            "}",
            "",
        ]
    )


def gen_list_program(variant: VariantId, n: int) -> Program:
    return parse(list_source(variant, n))


def count_oracle(n: int) -> int:
    if n < 0:
        raise ValueError("node count must be >= 0")
    return n


def exit_kind(variant: VariantId, n: int, store) -> str:
    """How the walk ended: ``met``, ``adjacent`` or ``empty``.

    Only the two-pointer walk has meeting cursors; the other variants report
    ``empty`` for the empty list and an empty string otherwise.
    """
    if n == 0:
        return "empty"
    if VariantId(variant) is not VariantId.V3:
        return ""
    return "met" if store["F"] == store["L"] else "adjacent"


def _loop_pos(program: Program, label: str):
    for lp in iter_loops(program.body):
        if lp.label == label:
            return lp.pos
    raise KeyError(label)


def loop_iterations(metrics, label: str) -> int:
    """Body executions of a labelled WHILE loop entered at most once."""
    evals = metrics.loop_guards.get(label, 0)
    return max(0, evals - 1)


def main_loop_blocks(program: Program, trace, label: str = MAIN) -> list:
    """Blocks holding exactly one iteration of the labelled loop.

    These are the blocks that end at the loop's guard and directly follow
    another evaluation of that same guard.
    """
    pos = _loop_pos(program, label)
    out = []
    prev_main = False
    for b in split_blocks(trace):
        last = b.instrs[-1]
        ends_main = last.kind == "guard-eval" and last.pos == pos
        if ends_main and prev_main:
            out.append(b)
        prev_main = ends_main
    return out


@dataclass(frozen=True)
class TraversalRow:
    variant: VariantId
    n: int
    width: int
    renaming: bool
    latency: str
    instructions: int
    cycles: int
    ilp: float
    guard_evals: int
    count: int
    main_iterations: int
    exit_kind: str
    speedup_vs_baseline: Optional[Fraction] = None

    @property
    def cycles_per_node(self) -> Optional[Fraction]:
        return Fraction(self.cycles, self.n) if self.n else None


def traversal_report(
    ns: Iterable[int],
    widths: Iterable[int] = (2,),
    latency="unit",
    renaming: bool = True,
    variants: Iterable = VARIANTS,
    *,
    issue: str = "ooo",
) -> list:
    """Run every (variant, n, W), check the count, and collect model numbers.

    ``speedup_vs_baseline`` compares against the plain walk at the same n and W
    (so it is only filled when that variant is part of the run).
    """
    variants = [VariantId(v) for v in variants]
    ns, widths = list(ns), list(widths)
    rows = []
    for v in variants:
        for n in ns:
            prog = gen_list_program(v, n)
            store, met, tr = execute(prog, tracing=True)
            got, want = store["count"], count_oracle(n)
            if got != want:
                raise OracleMismatch(v.value, n, got, want)
            kind = exit_kind(v, n, store)
            for w in widths:
                res = schedule_trace(tr, w, latency, renaming, issue)
                rows.append(
                    TraversalRow(
                        v, n, w, renaming, res.latency, res.total_instructions, res.total_cycles,
                        res.ilp, met.guard_evals, got, loop_iterations(met, MAIN), kind,
                    )
                )
    base = {(r.n, r.width): r.cycles for r in rows if r.variant is VariantId.V1}
    out = []
    for r in rows:
        b = base.get((r.n, r.width))
        if b is not None and r.cycles:
            r = TraversalRow(**{**r.__dict__, "speedup_vs_baseline": Fraction(b, r.cycles)})
        out.append(r)
    return out


def serial_chain_check(n: int = 12, widths: Iterable[int] = (2, 4, 8), latency="unit") -> list:
    """``(W, cycles, critical path)`` for each distinct main-loop block of V2."""
    prog = gen_list_program(VariantId.V2, n)
    _, _, tr = execute(prog, tracing=True)
    out = []
    seen = set()
    for b in main_loop_blocks(prog, tr):
        shape = tuple((i.kind, len(i.reads), len(i.writes)) for i in b.instrs)
        if shape in seen:
            continue
        seen.add(shape)
        dag = build_dag(BasicBlock(0, b.instrs))
        cp = critical_path(dag, latency, True)
        for w in widths:
            out.append((w, schedule_block(dag, w, latency, True).cycles, cp))
    return out
