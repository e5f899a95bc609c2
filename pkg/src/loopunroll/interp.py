"""Reference interpreter: execution, dynamic traces, and equivalence checking.

Programs are compiled once into nested Python closures. Each dynamic
instruction (assignment, FOR-header write, guard evaluation) consumes one
unit of the step budget, so ``RunMetrics.statements`` always equals the
length of the trace that the same run would emit.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import DivisionByZero, ExecutionError, IndexOutOfBounds, Overflow
from .linear import trunc_div
from .syntax import (
    INT_MAX,
    INT_MIN,
    And,
    ArrayAssign,
    ArrayRead,
    Assign,
    BinOp,
    BoolLit,
    Cmp,
    For,
    If,
    Int,
    Or,
    Program,
    Var,
    While,
)
from .wp import AssumptionSet, normalize_cmp

SCALAR_WRITE = "scalar-write"
ARRAY_WRITE = "array-write"
GUARD_EVAL = "guard-eval"

GUARD_COSTS = ("single", "per-conjunct")
DEFAULT_BUDGET = 10_000_000


@dataclass
class Store:
    scalars: dict = field(default_factory=dict)
    arrays: dict = field(default_factory=dict)

    def __getitem__(self, name: str):
        if name in self.scalars:
            return self.scalars[name]
        return self.arrays[name]

    def locations(self) -> dict:
        """Flat ``{location: value}`` view (``x[3]`` for array cells)."""
        out = dict(self.scalars)
        for name, values in self.arrays.items():
            for i, v in enumerate(values):
                out[f"{name}[{i}]"] = v
        return out


@dataclass(frozen=True)
class DynInstr:
    seq: int
    kind: str
    reads: frozenset
    writes: frozenset
    taken: Optional[bool]
    pos: Optional[tuple]

    def reads_array(self) -> bool:
        return any("[" in loc for loc in self.reads)

    def to_json(self, filename: str = "<input>") -> str:
        obj = {
            "seq": self.seq,
            "kind": self.kind,
            "reads": sorted(self.reads),
            "writes": sorted(self.writes),
        }
        if self.kind == GUARD_EVAL:
            obj["taken"] = self.taken
        line, col = self.pos if self.pos else (0, 0)
        obj["pos"] = f"{filename}:{line}:{col}"
        return json.dumps(obj)


@dataclass
class RunMetrics:
    statements: int = 0
    loop_guard_evals: int = 0
    if_guard_evals: int = 0
    for_increments: int = 0
    budget_used: int = 0
    terminated: bool = True
    # guard evaluations per loop, keyed by label or "#<pre-order index>"
    loop_guards: dict = field(default_factory=dict)

    @property
    def guard_evals(self) -> int:
        return self.loop_guard_evals + self.if_guard_evals

    @property
    def loop_overhead(self) -> int:
        return self.loop_guard_evals + self.for_increments


class _Exhausted(Exception):
    pass


class _Machine:
    __slots__ = ("scal", "arr", "steps", "budget", "trace", "reads", "metrics")

    def __init__(self, scal, arr, budget, tracing):
        self.scal = scal
        self.arr = arr
        self.steps = 0
        self.budget = budget
        self.trace = [] if tracing else None
        self.reads = set()
        self.metrics = RunMetrics()

    def emit(self, kind, writes, taken, pos):
        self.trace.append(DynInstr(self.steps - 1, kind, frozenset(self.reads), writes, taken, pos))


def _check(v, pos):
    if v > INT_MAX or v < INT_MIN:
        raise Overflow(pos)
    return v


class _Compiler:
    def __init__(self, tracing: bool, guard_cost: str):
        if guard_cost not in GUARD_COSTS:
            raise ValueError(f"guard_cost must be one of {GUARD_COSTS}")
        self.tracing = tracing
        self.per_conjunct = guard_cost == "per-conjunct"
        self.loops = 0

    def loop_key(self, loop) -> str:
        # keys follow pre-order, so allocate before compiling the body
        n = self.loops
        self.loops += 1
        return loop.label or f"#{n}"

    # -- expressions

    def expr(self, e):
        tracing = self.tracing
        if isinstance(e, Int):
            v = e.value
            return lambda m: v
        if isinstance(e, Var):
            name = e.name
            if tracing:

                def var(m):
                    m.reads.add(name)
                    return m.scal[name]

                return var
            return lambda m: m.scal[name]
        if isinstance(e, ArrayRead):
            name, fi, pos = e.array, self.expr(e.index), e.pos

            def aread(m):
                i = fi(m)
                a = m.arr[name]
                if i < 0 or i >= len(a):
                    raise IndexOutOfBounds(name, i, pos)
                if tracing:
                    m.reads.add(f"{name}[{i}]")
                return a[i]

            return aread
        if isinstance(e, BinOp):
            fl, fr, pos = self.expr(e.left), self.expr(e.right), e.pos
            op = e.op
            if op == "+":
                return lambda m: _check(fl(m) + fr(m), pos)
            if op == "-":
                return lambda m: _check(fl(m) - fr(m), pos)
            if op == "*":
                return lambda m: _check(fl(m) * fr(m), pos)

            def div(m):
                a = fl(m)
                b = fr(m)
                if b == 0:
                    raise DivisionByZero(pos)
                return _check(trunc_div(a, b), pos)

            return div
        raise TypeError(f"not an expression: {e!r}")

    # -- predicates

    def pred(self, p, emit_leaves: bool):
        if isinstance(p, (Cmp, BoolLit)):
            leaf = self._leaf(p)
            if not emit_leaves:
                return leaf
            pos = p.pos

            def emitting(m):
                if m.steps >= m.budget:
                    raise _Exhausted
                if m.trace is not None:
                    m.reads = set()
                v = leaf(m)
                m.steps += 1
                if m.trace is not None:
                    m.emit(GUARD_EVAL, frozenset(), v, pos)
                return v

            return emitting
        parts = [self.pred(i, emit_leaves) for i in p.items]
        if isinstance(p, And):

            def conj(m):
                for f in parts:
                    if not f(m):
                        return False
                return True

            return conj

        def disj(m):
            for f in parts:
                if f(m):
                    return True
            return False

        return disj

    def _leaf(self, p):
        if isinstance(p, BoolLit):
            v = p.value
            return lambda m: v
        fl, fr = self.expr(p.left), self.expr(p.right)
        op = p.op
        if op == "==":
            return lambda m: fl(m) == fr(m)
        if op == "!=":
            return lambda m: fl(m) != fr(m)
        if op == "<":
            return lambda m: fl(m) < fr(m)
        if op == "<=":
            return lambda m: fl(m) <= fr(m)
        if op == ">":
            return lambda m: fl(m) > fr(m)
        return lambda m: fl(m) >= fr(m)

    def guard(self, p, pos, on_eval):
        """Guard evaluation as one or more dynamic instructions.

        ``on_eval(m)`` updates the per-kind guard counters once per evaluation.
        """
        if self.per_conjunct:
            inner = self.pred(p, emit_leaves=True)

            def per_leaf(m):
                v = inner(m)
                on_eval(m)
                return v

            return per_leaf
        fp = self.pred(p, emit_leaves=False)

        def single(m):
            if m.steps >= m.budget:
                raise _Exhausted
            if m.trace is not None:
                m.reads = set()
            v = fp(m)
            m.steps += 1
            on_eval(m)
            if m.trace is not None:
                m.emit(GUARD_EVAL, frozenset(), v, pos)
            return v

        return single

    # -- statements

    def block(self, stmts):
        fs = [self.stmt(s) for s in stmts]
        if len(fs) == 1:
            return fs[0]

        def run_block(m):
            for f in fs:
                f(m)

        return run_block

    def _write(self, name, fe, pos):
        writes = frozenset((name,))

        def assign(m):
            if m.steps >= m.budget:
                raise _Exhausted
            if m.trace is not None:
                m.reads = set()
            v = fe(m)
            m.scal[name] = v
            m.steps += 1
            if m.trace is not None:
                m.emit(SCALAR_WRITE, writes, None, pos)

        return assign

    def stmt(self, s):
        if isinstance(s, Assign):
            return self._write(s.target, self.expr(s.value), s.pos)
        if isinstance(s, ArrayAssign):
            name, fi, fv, pos = s.array, self.expr(s.index), self.expr(s.value), s.pos

            def aassign(m):
                if m.steps >= m.budget:
                    raise _Exhausted
                if m.trace is not None:
                    m.reads = set()
                i = fi(m)
                a = m.arr[name]
                if i < 0 or i >= len(a):
                    raise IndexOutOfBounds(name, i, pos)
                a[i] = fv(m)
                m.steps += 1
                if m.trace is not None:
                    m.emit(ARRAY_WRITE, frozenset((f"{name}[{i}]",)), None, pos)

            return aassign
        if isinstance(s, If):
            def count_if(m):
                m.metrics.if_guard_evals += 1

            fg = self.guard(s.guard, s.pos, count_if)
            ft = self.block(s.then)
            fe = self.block(s.orelse)

            def if_stmt(m):
                if fg(m):
                    ft(m)
                else:
                    fe(m)

            return if_stmt
        if isinstance(s, While):
            key = self.loop_key(s)

            def count_loop(m):
                met = m.metrics
                met.loop_guard_evals += 1
                met.loop_guards[key] = met.loop_guards.get(key, 0) + 1

            fg = self.guard(s.guard, s.pos, count_loop)
            fb = self.block(s.body)

            def while_stmt(m):
                while fg(m):
                    fb(m)

            return while_stmt
        if isinstance(s, For):
            key = self.loop_key(s)
            i = s.counter

            def count_loop(m):
                met = m.metrics
                met.loop_guard_evals += 1
                met.loop_guards[key] = met.loop_guards.get(key, 0) + 1

            finit = self._write(i, self.expr(s.init), s.pos)
            fg = self.guard(Cmp("<", Var(i), s.limit, pos=s.pos), s.pos, count_loop)
            fb = self.block(s.body)
            step = s.step
            fstep = self._write(i, self.expr(BinOp("+", Var(i), Int(step), pos=s.pos)), s.pos)

            def for_stmt(m):
                finit(m)
                while fg(m):
                    fb(m)
                    fstep(m)
                    m.metrics.for_increments += 1

            return for_stmt
        raise TypeError(f"not a statement: {s!r}")


_CACHE: dict = {}


def _compiled(program: Program, tracing: bool, guard_cost: str):
    key = (id(program), tracing, guard_cost)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is program:
        return hit[1]
    fn = _Compiler(tracing, guard_cost).block(program.body)
    if len(_CACHE) > 512:
        _CACHE.clear()
    _CACHE[key] = (program, fn)
    return fn


def initial_store(program: Program, inputs: Optional[Mapping] = None) -> Store:
    """Declared initial values with ``inputs`` overriding them."""
    scal = {d.name: (d.init if d.init is not None else 0) for d in program.scalars.values()}
    arr = {
        d.name: list(d.init) if d.init is not None else [0] * d.length
        for d in program.arrays.values()
    }
    for name, value in (inputs or {}).items():
        if name in scal:
            if isinstance(value, (list, tuple)):
                raise ValueError(f"scalar {name!r} given an array value")
            scal[name] = int(value)
        elif name in arr:
            if not isinstance(value, (list, tuple)) or len(value) != len(arr[name]):
                raise ValueError(f"array {name!r} needs exactly {len(arr[name])} values")
            arr[name] = [int(v) for v in value]
        else:
            raise KeyError(f"input {name!r} is not declared")
    for name, v in scal.items():
        if not INT_MIN <= v <= INT_MAX:
            raise ValueError(f"input {name!r} outside the 64-bit range")
    return Store(scal, arr)


def execute(
    program: Program,
    inputs: Optional[Mapping] = None,
    budget: int = DEFAULT_BUDGET,
    *,
    tracing: bool = False,
    guard_cost: str = "single",
):
    """Run ``program``; returns ``(store, metrics, trace_or_None)``.

    Runtime faults propagate as :class:`~loopunroll.errors.ExecutionError`.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    store = initial_store(program, inputs)
    m = _Machine(store.scalars, store.arrays, budget, tracing)
    fn = _compiled(program, tracing, guard_cost)
    try:
        fn(m)
    except _Exhausted:
        m.metrics.terminated = False
    m.metrics.statements = m.steps
    m.metrics.budget_used = m.steps
    return store, m.metrics, (tuple(m.trace) if tracing else None)


def run(program: Program, inputs: Optional[Mapping] = None, budget: int = DEFAULT_BUDGET, *, guard_cost: str = "single"):
    store, metrics, _ = execute(program, inputs, budget, guard_cost=guard_cost)
    return store, metrics


def trace(program: Program, inputs: Optional[Mapping] = None, budget: int = DEFAULT_BUDGET, *, guard_cost: str = "single") -> tuple:
    return execute(program, inputs, budget, tracing=True, guard_cost=guard_cost)[2]


def dump_trace(instrs, filename: str = "<input>") -> str:
    """JSON-lines rendering, one object per dynamic instruction."""
    return "".join(i.to_json(filename) + "\n" for i in instrs)


# ---------------------------------------------------------------- equivalence

INPUT_RANGE = 2**16
BOUNDARY_VALUES = (0, 1, -1)


@dataclass(frozen=True)
class Equivalent:
    trials: int
    seed: int
    verdict = "Equivalent"


@dataclass(frozen=True)
class Diverged:
    witness: dict
    location: str
    left: object
    right: object
    seed: int
    verdict = "Diverged"


@dataclass(frozen=True)
class Inconclusive:
    cases: tuple  # input stores on which a run exhausted its budget
    trials: int
    seed: int
    verdict = "Inconclusive"


def _bounds(program: Program, names) -> dict:
    """Per-scalar intervals implied by single-variable linear assumptions."""
    lo = {n: -INPUT_RANGE for n in names}
    hi = {n: INPUT_RANGE for n in names}
    for f in AssumptionSet.of(program.assumptions).forms():
        if len(f.coeffs) != 1 or f.coeffs[0][0] not in lo:
            continue
        (name, c), k = f.coeffs[0], f.const
        # c*x + k >= 0
        if c > 0:
            lo[name] = max(lo[name], -(k // c))
        else:
            hi[name] = min(hi[name], k // -c)
    return {n: (lo[n], hi[n]) for n in names}


class InputSampler:
    """Seeded generator of input stores over a program's scalars.

    Values come from the assumption-implied intervals intersected with
    [-2**16, 2**16], mixing uniform draws with boundary values; draws are
    rejected until every assumption holds.
    """

    def __init__(self, program: Program, rng: random.Random, names=None, attempts: int = 200):
        self.program = program
        self.rng = rng
        self.names = sorted(program.scalars) if names is None else list(names)
        self.bounds = _bounds(program, self.names)
        self.attempts = attempts
        compiler = _Compiler(False, "single")
        self._checks = [compiler.pred(p, False) for p in program.assumptions]

    def _draw(self) -> dict:
        rng = self.rng
        draw = {}
        for n in self.names:
            lo, hi = self.bounds[n]
            if lo > hi:
                lo, hi = -INPUT_RANGE, INPUT_RANGE
            if rng.random() < 0.2:
                options = [v for v in BOUNDARY_VALUES + (lo, hi) if lo <= v <= hi]
                draw[n] = rng.choice(options)
            else:
                draw[n] = rng.randint(lo, hi)
        return draw

    def _admissible(self, draw: dict) -> bool:
        if not self._checks:
            return True
        store = initial_store(self.program, draw)
        m = _Machine(store.scalars, store.arrays, 1, False)
        try:
            return all(c(m) for c in self._checks)
        except ExecutionError:
            return False

    def __call__(self) -> dict:
        for _ in range(self.attempts):
            draw = self._draw()
            if self._admissible(draw):
                return draw
        raise ValueError("could not draw inputs satisfying the assumptions")


def _outcome(program, inputs, budget):
    try:
        store, metrics = run(program, inputs, budget)
    except ExecutionError as exc:
        return ("error", exc.kind)
    if not metrics.terminated:
        return ("budget", None)
    return ("ok", store.locations())


def check_equiv(p1: Program, p2: Program, trials: int = 100, budget: int = DEFAULT_BUDGET, seed: int = 0, names=None):
    """Empirical equivalence of two programs over seeded random inputs.

    Both programs must declare the same identifiers. Runs that fault count as
    agreeing only when both fault with the same error kind.
    """
    if p1.scalars.keys() != p2.scalars.keys() or p1.arrays.keys() != p2.arrays.keys():
        raise ValueError("programs must share a declaration set")
    sample = InputSampler(p1, random.Random(seed), names)
    exhausted = []
    for _ in range(trials):
        inputs = sample()
        a = _outcome(p1, inputs, budget)
        b = _outcome(p2, inputs, budget)
        if a[0] == "budget" or b[0] == "budget":
            exhausted.append(inputs)
            continue
        if a == b:
            continue
        if a[0] == "ok" and b[0] == "ok":
            loc = next(k for k in sorted(a[1]) if a[1][k] != b[1].get(k))
            return Diverged(inputs, loc, a[1][loc], b[1].get(loc), seed)
        return Diverged(inputs, "<outcome>", a[1] if a[0] == "error" else "ok", b[1] if b[0] == "error" else "ok", seed)
    if exhausted:
        return Inconclusive(tuple(exhausted), trials, seed)
    return Equivalent(trials, seed)
