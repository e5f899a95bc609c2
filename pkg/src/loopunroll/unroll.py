"""Source-to-source loop unrolling: counted FOR loops and wp-guarded WHILE loops."""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass, replace
from typing import Optional, Union

from .errors import GuardTooLarge, LoopNotFound, NotAWhileLoop, NotCountedFor, UnsupportedBody
from .linear import to_linear
from .syntax import (
    And,
    Assign,
    BinOp,
    For,
    If,
    Int,
    Program,
    Var,
    While,
    assigned_names,
    free_vars,
    iter_loops,
    replace_var,
    replace_var_in_stmts,
    strip_labels,
    validate,
)
from .wp import AssumptionSet, simplify, wp_seq

MODES = ("auto", "counted-for", "wp-while")
MAX_GUARD_NODES = 50_000
_MODE_ALIASES = {"for": "counted-for", "wp": "wp-while"}


@dataclass(frozen=True)
class UnrollPlan:
    """Which loop to unroll and how.

    ``loop`` is a label or a 0-based index into the program's loops in
    pre-order. ``fuse_body`` additionally collapses the k body copies of a
    WHILE loop into one assignment per variable when every result is linear.
    ``max_guard_nodes`` bounds the size of the unsimplified WHILE guard.
    """

    loop: Union[str, int] = 0
    factor: int = 2
    mode: str = "auto"
    simplify_guard: bool = True
    fuse_body: bool = False
    max_guard_nodes: int = MAX_GUARD_NODES

    def __post_init__(self):
        mode = _MODE_ALIASES.get(self.mode, self.mode)
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        object.__setattr__(self, "mode", mode)
        if self.factor < 2:
            raise ValueError("unroll factor must be >= 2")


def _loop_index(program: Program, selector) -> int:
    loops = list(iter_loops(program.body))
    if isinstance(selector, str) and not selector.isdigit():
        hits = [n for n, lp in enumerate(loops) if lp.label == selector]
        if len(hits) != 1:
            raise LoopNotFound(f"no loop labelled {selector!r}")
        return hits[0]
    idx = int(selector)
    if not 0 <= idx < len(loops):
        raise LoopNotFound(f"loop index {idx} out of range ({len(loops)} loops)")
    return idx


def find_loop(program: Program, selector):
    """Resolve a label or pre-order index to exactly one loop."""
    return list(iter_loops(program.body))[_loop_index(program, selector)]


def _replace_loop(stmts, index: int, new_stmts, counter=None) -> tuple:
    """Splice ``new_stmts`` in place of the loop with pre-order number ``index``."""
    if counter is None:
        counter = [0]
    out = []
    for s in stmts:
        if isinstance(s, (While, For)):
            n = counter[0]
            counter[0] += 1
            if n == index:
                out.extend(new_stmts)
                # keep numbering consistent for loops nested in the replaced one
                counter[0] += sum(1 for _ in iter_loops(s.body))
                continue
            s = replace(s, body=_replace_loop(s.body, index, new_stmts, counter))
        elif isinstance(s, If):
            s = replace(
                s,
                then=_replace_loop(s.then, index, new_stmts, counter),
                orelse=_replace_loop(s.orelse, index, new_stmts, counter),
            )
        out.append(s)
    return tuple(out)


def static_trip_count(loop: For) -> Optional[int]:
    """Iteration count when init and limit are literals, else ``None``."""
    if not isinstance(loop, For):
        raise NotCountedFor("static_trip_count needs a counted FOR loop")
    if isinstance(loop.init, Int) and isinstance(loop.limit, Int):
        span = loop.limit.value - loop.init.value
        return max(0, -(-span // loop.step))
    return None


# ------------------------------------------------------------------------ FOR


def unroll_for(program: Program, plan: UnrollPlan) -> Program:
    index = _loop_index(program, plan.loop)
    loop = find_loop(program, index)
    if plan.mode not in ("auto", "counted-for"):
        raise NotCountedFor(f"plan mode {plan.mode!r} does not unroll FOR loops")
    if not isinstance(loop, For):
        raise NotCountedFor("selected loop is not a counted FOR loop")
    i, k, step = loop.counter, plan.factor, loop.step
    written = assigned_names(loop.body)
    if i in free_vars(loop.limit) or written & free_vars(loop.limit):
        raise UnsupportedBody("for loop", loop.pos, "limit is not loop-invariant")

    copies = []
    for j in range(k):
        body = loop.body if j == 0 else strip_labels(loop.body)
        if j:
            body = replace_var_in_stmts(body, i, BinOp("+", Var(i), Int(j * step)))
        copies.extend(body)

    trips = static_trip_count(loop)
    exact = trips is not None and trips % k == 0
    if exact:
        main_limit = loop.limit
    elif isinstance(loop.limit, Int):
        main_limit = Int(loop.limit.value - (k - 1) * step)
    else:
        main_limit = BinOp("-", loop.limit, Int((k - 1) * step))

    main = For(i, loop.init, main_limit, k * step, tuple(copies), loop.label, pos=loop.pos)
    new = [main]
    if not exact:
        new.append(For(i, Var(i), loop.limit, step, strip_labels(loop.body), None, pos=loop.pos))
    return validate(Program(program.decls, _replace_loop(program.body, index, new)))


# ---------------------------------------------------------------------- WHILE


def tree_size(node) -> int:
    """Node count of a syntax tree, counting shared subtrees once per use."""
    memo: dict = {}

    def go(n) -> int:
        key = id(n)
        if key not in memo:
            total = 1
            for f in fields(n):
                v = getattr(n, f.name)
                for child in v if isinstance(v, tuple) else (v,):
                    if is_dataclass(child):
                        total += go(child)
            memo[key] = total
        return memo[key]

    return go(node)


def unrolled_guard(
    loop: While, k: int, assumptions=(), simplify_guard: bool = True, max_nodes: int = MAX_GUARD_NODES
):
    """B && wp(S, B) && ... && wp(S^(k-1), B) for the loop's guard B and body S.

    Raises GuardTooLarge as soon as the raw guard passes ``max_nodes``.
    """
    if not loop.body:
        raise UnsupportedBody("empty loop body", loop.pos, "nothing to unroll")
    facts = assumptions if isinstance(assumptions, AssumptionSet) else AssumptionSet.of(assumptions)
    parts = [loop.guard]
    raw = [loop.guard]
    nodes = tree_size(loop.guard)
    for n in range(1, k):
        w = wp_seq(loop.body, raw[-1])
        raw.append(w)
        nodes += tree_size(w)
        if nodes > max_nodes:
            raise GuardTooLarge(loop.pos, n + 1, nodes, max_nodes)
    for w in raw[1:]:
        parts.append(simplify(w, facts) if simplify_guard else w)
    if simplify_guard:
        parts[0] = simplify(parts[0], facts)
        return simplify(And(tuple(parts)), facts)
    return And(tuple(parts))


def fuse_assignments(stmts) -> Optional[tuple]:
    """Collapse straight-line scalar assignments into one write per variable.

    Symbolic execution gives each variable's final value in terms of the
    entry state. The fused block is returned only when every final value is
    linear and an ordering exists in which no write clobbers a value that a
    later write still reads; otherwise ``None``.
    """
    env: dict = {}
    order = []
    for s in stmts:
        if not isinstance(s, Assign):
            return None
        env[s.target] = _simultaneous(s.value, env)
        if s.target not in order:
            order.append(s.target)

    finals = {}
    for name in order:
        form = to_linear(env[name])
        if form is None:
            return None
        finals[name] = form
    # drop identities such as x = x
    finals = {n: f for n, f in finals.items() if f.coeffs != ((n, 1),) or f.const != 0}

    pending = list(finals)
    out = []
    while pending:
        for n in pending:
            # writing n is safe once no other pending value reads the old n
            if not any(n in finals[o].as_dict() for o in pending if o != n):
                out.append(Assign(n, finals[n].to_expr()))
                pending.remove(n)
                break
        else:
            return None
    return tuple(out)


def _simultaneous(value, env: dict):
    """Substitute every ``env`` binding at once (no capture between bindings)."""
    tag = "\x00"
    for name in env:
        value = replace_var(value, name, Var(tag + name))
    for name, expr in env.items():
        value = replace_var(value, tag + name, expr)
    return value


def stable_assumptions(program: Program) -> tuple:
    """Assumptions over scalars that no statement assigns.

    ``assume`` describes the entry state, so it still holds at a loop head
    only when none of its variables is ever written.
    """
    written = assigned_names(program.body)
    return tuple(p for p in program.assumptions if not (free_vars(p) & written))


def unroll_while(program: Program, plan: UnrollPlan) -> Program:
    index = _loop_index(program, plan.loop)
    loop = find_loop(program, index)
    if plan.mode not in ("auto", "wp-while"):
        raise NotAWhileLoop(f"plan mode {plan.mode!r} does not unroll WHILE loops")
    if not isinstance(loop, While):
        raise NotAWhileLoop("selected loop is not a WHILE loop")
    guard = unrolled_guard(
        loop, plan.factor, stable_assumptions(program), plan.simplify_guard, plan.max_guard_nodes
    )
    body = tuple(loop.body) * plan.factor
    if plan.fuse_body:
        fused = fuse_assignments(body)
        if fused is not None:
            body = fused
    main = While(guard, body, loop.label, pos=loop.pos)
    cleanup = While(loop.guard, loop.body, None, pos=loop.pos)
    return validate(Program(program.decls, _replace_loop(program.body, index, [main, cleanup])))


def unroll(program: Program, plan: UnrollPlan) -> Program:
    """Dispatch on the selected loop's kind (``mode='auto'``) or the plan's mode."""
    loop = find_loop(program, plan.loop)
    if plan.mode == "counted-for" or (plan.mode == "auto" and isinstance(loop, For)):
        return unroll_for(program, plan)
    return unroll_while(program, plan)
