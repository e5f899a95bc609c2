"""Reference computations that share no code with the package."""

from __future__ import annotations


def quotient_guards(a: int, b: int, k: int = 1) -> int:
    """Loop-guard evaluations of the quotient loop unrolled ``k`` times.

    Simulates the main loop (guard: a >= j*b for j = 1..k) and then the
    cleanup loop directly on Python integers.
    """
    evals = 0
    if k > 1:
        while True:
            evals += 1
            if not all(a - j * b >= 0 for j in range(1, k + 1)):
                break
            a -= k * b
    while True:
        evals += 1
        if not a >= b:
            break
        a -= b
    return evals


def walk_naive(n: int) -> int:
    nxt = [0] + list(range(2, n + 1)) + ([0] if n else [])
    lp, count = (1 if n else 0), 0
    while lp != 0:
        lp = nxt[lp]
        count += 1
    return count


def twoptr_exit(n: int) -> str:
    if n == 0:
        return "empty"
    f, l = 1, n
    while f != l and f + 1 != l:
        f, l = f + 1, l - 1
    return "met" if f == l else "adjacent"


def sentinel_main_iterations(n: int) -> int:
    nxt = [0] + list(range(2, n + 1)) + ([0] if n else [])
    lp = 1 if n else 0
    lp1 = nxt[lp]
    lp2 = nxt[lp1]
    it = 0
    while lp2 != 0:
        it += 1
        lp = nxt[lp2]
        lp1 = nxt[lp]
        lp2 = nxt[lp1]
    return it


def deps(instrs, renaming: bool) -> list:
    """Predecessor sets straight from the hazard definitions (pairwise scan)."""
    preds = [set() for _ in instrs]
    for v, iv in enumerate(instrs):
        for u in range(v):
            iu = instrs[u]

            def clean(loc, lo=u, hi=v):
                return not any(loc in instrs[m].writes for m in range(lo + 1, hi))

            raw = any(loc in iu.writes and clean(loc) for loc in iv.reads)
            if raw:
                preds[v].add(u)
                continue
            if renaming:
                continue
            waw = any(loc in iu.writes and clean(loc) for loc in iv.writes)
            war = any(loc in iu.reads and clean(loc) for loc in iv.writes)
            if waw or war:
                preds[v].add(u)
    return preds


def schedule(instrs, width: int, lat, renaming: bool, in_order: bool = False) -> int:
    """Cycle count of the sequence-order greedy rule using a slot table."""
    preds = deps(instrs, renaming)
    lats = [lat(i) for i in instrs]
    slots = [0] * (4 * len(instrs) * max(lats, default=1) + 4)
    start = []
    for v in range(len(instrs)):
        c = 1
        for u in preds[v]:
            c = max(c, start[u] + lats[u])
        if in_order and start:
            c = max(c, start[-1])
        while slots[c] >= width:
            c += 1
        slots[c] += 1
        start.append(c)
    return max((s + l - 1 for s, l in zip(start, lats)), default=0)


def unit(_instr) -> int:
    return 1


def load2(instr) -> int:
    return 2 if any("[" in loc for loc in instr.reads) else 1


def eval_expr(e, env: dict, arrays: dict = None) -> int:
    """Evaluate an expression tree over Python integers (truncating division)."""
    t = type(e).__name__
    if t == "Int":
        return e.value
    if t == "Var":
        return env[e.name]
    if t == "ArrayRead":
        return arrays[e.array][eval_expr(e.index, env, arrays)]
    a, b = eval_expr(e.left, env, arrays), eval_expr(e.right, env, arrays)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def eval_pred(p, env: dict, arrays: dict = None) -> bool:
    t = type(p).__name__
    if t == "BoolLit":
        return p.value
    if t == "And":
        return all(eval_pred(i, env, arrays) for i in p.items)
    if t == "Or":
        return any(eval_pred(i, env, arrays) for i in p.items)
    a, b = eval_expr(p.left, env, arrays), eval_expr(p.right, env, arrays)
    return {"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[p.op]


def exec_assigns(body, env: dict) -> dict:
    env = dict(env)
    for s in body:
        env[s.target] = eval_expr(s.value, env)
    return env
