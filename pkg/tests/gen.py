"""Seeded random program generators and hypothesis strategies for the tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from loopunroll.syntax import (
    And,
    ArrayAssign,
    ArrayDecl,
    ArrayRead,
    Assign,
    Assume,
    BinOp,
    BoolLit,
    Cmp,
    For,
    If,
    Int,
    Or,
    Program,
    Var,
    VarDecl,
    While,
)

SCALARS = ("a", "b", "c", "d")
CMP = ("==", "!=", "<", "<=", ">", ">=")
BOUND = 20


# ------------------------------------------------------------ expressions


def rand_expr(rng: random.Random, names=SCALARS, depth: int = 2, arrays=(), divide=True):
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        if arrays and rng.random() < 0.15:
            arr, length = rng.choice(arrays)
            return ArrayRead(arr, Int(rng.randrange(length)))
        if rng.random() < 0.6:
            return Var(rng.choice(names))
        return Int(rng.randint(-5, 5))
    op = rng.choice("+-+-*/" if divide else "+-+-*")
    left = rand_expr(rng, names, depth - 1, arrays, divide)
    if op == "*":
        return BinOp("*", Int(rng.randint(-2, 2)), left) if rng.random() < 0.5 else BinOp("*", left, Int(rng.randint(-2, 2)))
    if op == "/":
        return BinOp("/", left, Int(rng.choice([-3, -2, 2, 3])) if rng.random() < 0.8 else Var(rng.choice(names)))
    return BinOp(op, left, rand_expr(rng, names, depth - 1, arrays, divide))


def rand_cmp(rng, names=SCALARS, depth=1, arrays=(), divide=True):
    return Cmp(rng.choice(CMP), rand_expr(rng, names, depth, arrays, divide), rand_expr(rng, names, depth, arrays, divide))


def rand_pred(rng, names=SCALARS, depth=2, arrays=(), divide=True):
    roll = rng.random()
    if depth == 0 or roll < 0.5:
        if rng.random() < 0.05:
            return BoolLit(rng.random() < 0.5)
        return rand_cmp(rng, names, 1, arrays, divide)
    items = tuple(rand_pred(rng, names, depth - 1, arrays, divide) for _ in range(rng.randint(2, 3)))
    return And(items) if roll < 0.8 else Or(items)


# ---------------------------------------------------- general round-trip


def random_program(rng: random.Random) -> Program:
    """Any well-formed program; termination is not guaranteed."""
    arrays = [("arr", rng.randint(1, 4))]
    decls = [VarDecl(n, rng.choice([None, rng.randint(-9, 9)])) for n in SCALARS]
    length = arrays[0][1]
    init = tuple(rng.randint(-9, 9) for _ in range(length)) if rng.random() < 0.5 else None
    decls.append(ArrayDecl("arr", length, init))
    if rng.random() < 0.5:
        decls.append(Assume(rand_cmp(rng, SCALARS, 1)))
    counters = iter(["i", "j", "k"])
    labels = iter(["outer", "inner", "third", "fourth", "fifth"])
    used_counters = []

    def stmts(depth):
        out = []
        for _ in range(rng.randint(0, 3)):
            roll = rng.random()
            if depth == 0 or roll < 0.55:
                if rng.random() < 0.8:
                    out.append(Assign(rng.choice(SCALARS), rand_expr(rng, SCALARS, 2, arrays)))
                else:
                    out.append(ArrayAssign("arr", rand_expr(rng, SCALARS, 1), rand_expr(rng, SCALARS, 2, arrays)))
            elif roll < 0.7:
                label = next(labels, None) if rng.random() < 0.3 else None
                out.append(While(rand_pred(rng, SCALARS, 2, arrays), stmts(depth - 1), label))
            elif roll < 0.85:
                c = next(counters, None)
                if c is None:
                    continue
                used_counters.append(c)
                label = next(labels, None) if rng.random() < 0.3 else None
                body = stmts(depth - 1)
                out.append(
                    For(c, rand_expr(rng, SCALARS, 1), rand_expr(rng, SCALARS, 1), rng.randint(1, 4), body, label)
                )
            else:
                orelse = stmts(depth - 1) if rng.random() < 0.5 else ()
                out.append(If(rand_pred(rng, SCALARS, 2, arrays), stmts(depth - 1), orelse))
        return tuple(out)

    body = stmts(3)
    decls.extend(VarDecl(c, None) for c in used_counters)
    return Program(tuple(decls), body)


# ----------------------------------------------------- WHILE equivalence


def _bounds():
    out = []
    for n in SCALARS:
        out.append(Assume(Cmp(">=", Var(n), Int(-BOUND))))
        out.append(Assume(Cmp("<=", Var(n), Int(BOUND))))
    return out


def random_while_program(rng: random.Random) -> Program:
    """A wp-eligible WHILE loop that always terminates.

    One scalar strictly moves toward a bound every iteration and its test is
    a conjunct of the guard. Other conjuncts and assignments are random.
    """
    prog = rng.choice(SCALARS)
    others = [n for n in SCALARS if n != prog]
    delta = rng.randint(1, 3)
    down = rng.random() < 0.5
    reach = rng.randint(BOUND // 2, BOUND)
    limit = Int(-reach if down else reach)
    if down:
        progress = rng.choice([Cmp(">", Var(prog), limit), Cmp(">=", Var(prog), limit), Cmp("<", limit, Var(prog))])
        step = Assign(prog, BinOp("-", Var(prog), Int(delta)))
    else:
        progress = rng.choice([Cmp("<", Var(prog), limit), Cmp("<=", Var(prog), limit), Cmp(">", limit, Var(prog))])
        step = Assign(prog, BinOp("+", Var(prog), Int(delta)))

    body = [Assign(rng.choice(others), rand_expr(rng, SCALARS, 2)) for _ in range(rng.randint(0, 3))]
    body.insert(rng.randint(0, len(body)), step)

    conjuncts = [progress]
    for _ in range(rng.choice([0, 0, 1, 2])):
        conjuncts.append(rand_pred(rng, SCALARS, 1))
    rng.shuffle(conjuncts)
    guard = conjuncts[0] if len(conjuncts) == 1 else And(tuple(conjuncts))

    decls = [VarDecl(n, rng.randint(-BOUND, BOUND)) for n in SCALARS] + _bounds()
    prefix = []
    if rng.random() < 0.3:
        prefix.append(Assign(rng.choice(others), rand_expr(rng, SCALARS, 1)))
    return Program(tuple(decls), tuple(prefix) + (While(guard, tuple(body), "main"),))


# ------------------------------------------------------- FOR equivalence


def random_for_program(rng: random.Random) -> Program:
    """A canonical counted FOR loop with in-bounds array traffic."""
    length = rng.randint(4, 24)
    step = rng.randint(1, 3)
    offset = rng.randint(0, 2)
    decls = [
        ArrayDecl("arr", length, tuple(rng.randint(-9, 9) for _ in range(length))),
        VarDecl("i", None),
        VarDecl("n", None),
        VarDecl("lo", None),
    ]
    decls += [VarDecl(x, rng.randint(-9, 9)) for x in ("s", "t")]
    top = length - offset
    decls += [
        Assume(Cmp(">=", Var("n"), Int(0))),
        Assume(Cmp("<=", Var("n"), Int(top))),
        Assume(Cmp(">=", Var("lo"), Int(0))),
        Assume(Cmp("<=", Var("lo"), Int(top))),
        Assume(Cmp(">=", Var("s"), Int(-BOUND))),
        Assume(Cmp("<=", Var("s"), Int(BOUND))),
        Assume(Cmp(">=", Var("t"), Int(-BOUND))),
        Assume(Cmp("<=", Var("t"), Int(BOUND))),
    ]
    init = rng.choice([Int(rng.randint(0, 3)), Var("lo")])
    if isinstance(init, Int):
        init = Int(min(init.value, top))
    limit = rng.choice([Int(rng.randint(0, top)), Var("n")])

    idx = BinOp("+", Var("i"), Int(offset)) if offset else Var("i")
    pool = [
        lambda: ArrayAssign("arr", idx, BinOp("+", BinOp("*", ArrayRead("arr", idx), Int(2)), Var("s"))),
        lambda: Assign("s", BinOp("+", Var("s"), ArrayRead("arr", idx))),
        lambda: Assign("t", BinOp("+", Var("t"), Var("i"))),
        lambda: Assign("s", BinOp("-", Var("s"), rand_expr(rng, ("t", "i"), 1, divide=False))),
        lambda: If(Cmp(rng.choice(CMP), Var("i"), Int(rng.randint(0, top))), (Assign("t", BinOp("-", Var("t"), Int(1))),), ()),
    ]
    body = tuple(rng.choice(pool)() for _ in range(rng.randint(1, 3)))
    return Program(tuple(decls), (For("i", init, limit, step, body, "main"),))


# ------------------------------------------------------------- hypothesis

small_ints = st.integers(min_value=-50, max_value=50)


@st.composite
def exprs(draw, names=SCALARS, depth=2, divide=False):
    if depth == 0 or draw(st.booleans()):
        if draw(st.booleans()):
            return Var(draw(st.sampled_from(names)))
        return Int(draw(st.integers(-6, 6)))
    op = draw(st.sampled_from("+-*/" if divide else "+-*"))
    left = draw(exprs(names, depth - 1, divide))
    if op == "*":
        return BinOp("*", Int(draw(st.integers(-3, 3))), left)
    if op == "/":
        return BinOp("/", left, Int(draw(st.sampled_from([-3, -2, 2, 3]))))
    return BinOp(op, left, draw(exprs(names, depth - 1, divide)))


@st.composite
def cmps(draw, names=SCALARS, divide=False):
    return Cmp(draw(st.sampled_from(CMP)), draw(exprs(names, 2, divide)), draw(exprs(names, 2, divide)))


@st.composite
def preds(draw, names=SCALARS, depth=2, divide=False):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        if draw(st.integers(0, 15)) == 0:
            return BoolLit(draw(st.booleans()))
        return draw(cmps(names, divide))
    items = tuple(draw(st.lists(preds(names, depth - 1, divide), min_size=2, max_size=3)))
    return And(items) if draw(st.booleans()) else Or(items)


@st.composite
def assign_bodies(draw, names=SCALARS, max_size=4):
    n = draw(st.integers(0, max_size))
    return tuple(Assign(draw(st.sampled_from(names)), draw(exprs(names, 2))) for _ in range(n))


def states(names=SCALARS):
    return st.fixed_dictionaries({n: small_ints for n in names})
