"""Trace-driven superscalar issue model.

A dynamic trace is cut into basic blocks at guard evaluations. Each block
gets a dependence DAG over concrete locations and is list-scheduled under an
issue width; blocks run back to back with no overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .interp import ARRAY_WRITE, DEFAULT_BUDGET, GUARD_EVAL, SCALAR_WRITE, execute

RAW, WAW, WAR = "RAW", "WAW", "WAR"

LATENCY_PRESETS = {
    "unit": {SCALAR_WRITE: 1, ARRAY_WRITE: 1, GUARD_EVAL: 1},
    # any instruction that reads an array cell takes two cycles
    "load2": {SCALAR_WRITE: 1, ARRAY_WRITE: 1, GUARD_EVAL: 1, "load": 2},
}


def resolve_latency(latency) -> tuple:
    """``(name, mapping)`` for a preset name or an explicit mapping."""
    if latency is None:
        latency = "unit"
    if isinstance(latency, str):
        try:
            return latency, LATENCY_PRESETS[latency]
        except KeyError:
            raise ValueError(f"unknown latency preset {latency!r}") from None
    mapping = dict(latency)
    if any(v < 1 for v in mapping.values()):
        raise ValueError("latencies must be >= 1")
    for name, preset in LATENCY_PRESETS.items():
        if preset == mapping:
            return name, mapping
    return "custom", mapping


def instr_latency(instr, latency: Mapping) -> int:
    if "load" in latency and instr.reads_array():
        return latency["load"]
    return latency.get(instr.kind, 1)


@dataclass(frozen=True)
class BasicBlock:
    id: int
    instrs: tuple

    def __len__(self):
        return len(self.instrs)


@dataclass(frozen=True)
class Edge:
    src: int  # index within the block
    dst: int
    kind: str
    loc: str


@dataclass(frozen=True)
class DepDag:
    block: BasicBlock
    edges: tuple

    @property
    def nodes(self) -> tuple:
        return self.block.instrs

    def preds(self, renaming: bool = False) -> list:
        """Predecessor indices per node; renaming keeps only RAW edges."""
        out = [set() for _ in self.block.instrs]
        for e in self.edges:
            if renaming and e.kind != RAW:
                continue
            out[e.dst].add(e.src)
        return [sorted(p) for p in out]


@dataclass(frozen=True)
class BlockSchedule:
    cycles: int
    issue: tuple  # 1-based issue cycle per instruction, block-relative


@dataclass(frozen=True)
class ScheduleResult:
    block_cycles: tuple
    issue_cycles: tuple  # absolute issue cycle per dynamic instruction
    total_cycles: int
    total_instructions: int
    width: int
    latency: str
    renaming: bool
    block_sizes: tuple = field(default=())
    issue: str = "ooo"

    @property
    def ilp(self) -> float:
        if self.total_cycles == 0:
            return 0.0
        return self.total_instructions / self.total_cycles

    @property
    def mean_block_size(self) -> float:
        if not self.block_sizes:
            return 0.0
        return sum(self.block_sizes) / len(self.block_sizes)


def split_blocks(trace) -> list:
    """Greedy maximal split: every guard evaluation closes its block."""
    blocks, current = [], []
    for instr in trace:
        current.append(instr)
        if instr.kind == GUARD_EVAL:
            blocks.append(BasicBlock(len(blocks), tuple(current)))
            current = []
    if current:
        blocks.append(BasicBlock(len(blocks), tuple(current)))
    return blocks


def build_dag(block: BasicBlock) -> DepDag:
    """Exact RAW/WAW/WAR edges over concrete locations inside one block."""
    edges = []
    last_writer: dict = {}
    readers: dict = {}
    for v, instr in enumerate(block.instrs):
        for loc in sorted(instr.reads):
            if loc in last_writer:
                edges.append(Edge(last_writer[loc], v, RAW, loc))
        for loc in sorted(instr.writes):
            if loc in last_writer:
                edges.append(Edge(last_writer[loc], v, WAW, loc))
            for r in readers.get(loc, ()):
                if r != v:
                    edges.append(Edge(r, v, WAR, loc))
        for loc in instr.reads:
            readers.setdefault(loc, []).append(v)
        for loc in instr.writes:
            last_writer[loc] = v
            readers[loc] = []
    return DepDag(block, tuple(edges))


def critical_path(dag: DepDag, latency="unit", renaming: bool = False) -> int:
    """Longest latency-weighted path through the DAG (0 for an empty block)."""
    _, lat = resolve_latency(latency)
    preds = dag.preds(renaming)
    finish = []
    for v, instr in enumerate(dag.nodes):
        start = max((finish[u] for u in preds[v]), default=0)
        finish.append(start + instr_latency(instr, lat))
    return max(finish, default=0)


ISSUE_POLICIES = ("ooo", "in-order")


def schedule_block(
    dag: DepDag,
    width: int,
    latency="unit",
    renaming: bool = False,
    issue: str = "ooo",
) -> BlockSchedule:
    """Greedy list schedule in sequence order.

    Each instruction takes the earliest cycle that follows its predecessors'
    results (issue + latency - 1) and still has fewer than ``width``
    instructions. With ``issue="in-order"`` it additionally may not issue
    before the previous instruction; that variant is monotone in both width
    and renaming, whereas the default slot-filling variant can suffer list
    scheduling anomalies when edges are removed.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    if issue not in ISSUE_POLICIES:
        raise ValueError(f"issue policy must be one of {ISSUE_POLICIES}")
    _, lat = resolve_latency(latency)
    preds = dag.preds(renaming)
    nodes = dag.nodes
    lats = [instr_latency(i, lat) for i in nodes]
    in_order = issue == "in-order"
    used: dict = {}
    cycles = []
    done = 0
    floor = 1
    for v in range(len(nodes)):
        c = 1 + max((cycles[u] + lats[u] - 1 for u in preds[v]), default=0)
        if in_order and c < floor:
            c = floor
        while used.get(c, 0) >= width:
            c += 1
        used[c] = used.get(c, 0) + 1
        cycles.append(c)
        floor = c
        done = max(done, c + lats[v] - 1)
    return BlockSchedule(done, tuple(cycles))


def _block_key(block: BasicBlock) -> tuple:
    """Blocks with the same shape of location reuse schedule identically.

    Locations are renamed by first appearance so repeated loop iterations
    over different array cells share one cache entry.
    """
    names: dict = {}

    def canon(loc):
        if loc not in names:
            names[loc] = len(names)
        return names[loc]

    return tuple(
        (
            i.kind,
            i.reads_array(),
            tuple(sorted(canon(x) for x in sorted(i.reads))),
            tuple(sorted(canon(x) for x in sorted(i.writes))),
        )
        for i in block.instrs
    )


def schedule_trace(
    trace,
    width: int,
    latency="unit",
    renaming: bool = False,
    issue: str = "ooo",
) -> ScheduleResult:
    name, lat = resolve_latency(latency)
    cache: dict = {}
    block_cycles, starts, sizes = [], [], []
    offset = 0
    for block in split_blocks(trace):
        key = _block_key(block)
        sched = cache.get(key)
        if sched is None:
            sched = schedule_block(build_dag(block), width, lat, renaming, issue)
            cache[key] = sched
        block_cycles.append(sched.cycles)
        starts.extend(offset + c for c in sched.issue)
        sizes.append(len(block))
        offset += sched.cycles
    return ScheduleResult(
        block_cycles=tuple(block_cycles),
        issue_cycles=tuple(starts),
        total_cycles=offset,
        total_instructions=len(trace),
        width=width,
        latency=name,
        renaming=renaming,
        block_sizes=tuple(sizes),
        issue=issue,
    )


def cost(
    program,
    inputs: Optional[Mapping] = None,
    width: int = 1,
    latency="unit",
    renaming: bool = False,
    *,
    budget: int = DEFAULT_BUDGET,
    guard_cost: str = "single",
    issue: str = "ooo",
) -> ScheduleResult:
    """Whole-program cycles: trace, split, schedule each block, sum."""
    _, _, tr = execute(program, inputs, budget, tracing=True, guard_cost=guard_cost)
    return schedule_trace(tr, width, latency, renaming, issue)


def speedup(before: ScheduleResult, after: ScheduleResult) -> Fraction:
    """``before.total_cycles / after.total_cycles`` as an exact ratio."""
    if before.total_cycles == 0 and after.total_cycles == 0:
        return Fraction(1)
    if after.total_cycles == 0:
        raise ZeroDivisionError("the optimised run has zero cycles")
    return Fraction(before.total_cycles, after.total_cycles)
