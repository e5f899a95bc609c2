"""Abstract syntax of the mini language and generic tree utilities.

Every node is a frozen dataclass. Source positions ride along in a ``pos``
field that is excluded from equality, so two trees compare equal exactly
when they are structurally identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

from .errors import (
    CounterMutatedInBody,
    DuplicateDeclaration,
    DuplicateLabel,
    ParseError,
    UndeclaredIdentifier,
)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

Pos = Optional[tuple]

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


def _pos():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Int:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class ArrayRead:
    array: str
    index: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


Expr = Union[Int, Var, ArrayRead, BinOp]


# ----------------------------------------------------------------- predicates


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class And:
    items: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Or:
    items: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


Pred = Union[Cmp, And, Or, BoolLit]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ArrayAssign:
    array: str
    index: Expr
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    guard: Pred
    body: tuple
    label: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class For:
    """Canonical counted loop ``for (i = init; i < limit; i += step)``."""

    counter: str
    init: Expr
    limit: Expr
    step: int
    body: tuple
    label: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    guard: Pred
    then: tuple
    orelse: tuple = ()
    pos: Pos = _pos()


Stmt = Union[Assign, ArrayAssign, While, For, If]
Loop = Union[While, For]


# --------------------------------------------------------------- declarations


@dataclass(frozen=True)
class VarDecl:
    name: str
    init: Optional[int] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    length: int
    init: Optional[tuple] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assume:
    pred: Pred
    pos: Pos = _pos()


Decl = Union[VarDecl, ArrayDecl, Assume]


@dataclass(frozen=True)
class Program:
    decls: tuple = ()
    body: tuple = ()

    @property
    def scalars(self) -> dict:
        return {d.name: d for d in self.decls if isinstance(d, VarDecl)}

    @property
    def arrays(self) -> dict:
        return {d.name: d for d in self.decls if isinstance(d, ArrayDecl)}

    @property
    def assumptions(self) -> tuple:
        return tuple(d.pred for d in self.decls if isinstance(d, Assume))


# ------------------------------------------------------------------ traversal


def free_vars(node) -> frozenset:
    """Scalar and array identifiers occurring in an expression or predicate."""
    out: set = set()
    _collect(node, out)
    return frozenset(out)


def _collect(node, out: set) -> None:
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, ArrayRead):
        out.add(node.array)
        _collect(node.index, out)
    elif isinstance(node, (BinOp, Cmp)):
        _collect(node.left, out)
        _collect(node.right, out)
    elif isinstance(node, (And, Or)):
        for item in node.items:
            _collect(item, out)
    elif isinstance(node, (Int, BoolLit)):
        pass
    else:
        raise TypeError(f"not an expression or predicate: {node!r}")


def array_reads(node) -> bool:
    """True when the tree contains at least one array read."""
    if isinstance(node, ArrayRead):
        return True
    if isinstance(node, (BinOp, Cmp)):
        return array_reads(node.left) or array_reads(node.right)
    if isinstance(node, (And, Or)):
        return any(array_reads(i) for i in node.items)
    return False


def map_expr(node, fn):
    """Rebuild an expression/predicate bottom-up, applying ``fn`` to every
    expression node after its children have been rebuilt."""
    if isinstance(node, (Int, Var)):
        return fn(node)
    if isinstance(node, ArrayRead):
        return fn(replace(node, index=map_expr(node.index, fn)))
    if isinstance(node, BinOp):
        return fn(replace(node, left=map_expr(node.left, fn), right=map_expr(node.right, fn)))
    if isinstance(node, Cmp):
        return replace(node, left=map_expr(node.left, fn), right=map_expr(node.right, fn))
    if isinstance(node, (And, Or)):
        return replace(node, items=tuple(map_expr(i, fn) for i in node.items))
    if isinstance(node, BoolLit):
        return node
    raise TypeError(f"not an expression or predicate: {node!r}")


def replace_var(node, name: str, expr: Expr):
    """Replace every occurrence of scalar ``name`` by ``expr``."""

    def fn(n):
        if isinstance(n, Var) and n.name == name:
            return expr
        return n

    return map_expr(node, fn)


def replace_var_in_stmts(stmts, name: str, expr: Expr) -> tuple:
    """Substitute a scalar read inside a statement list.

    The caller guarantees ``name`` is never assigned inside ``stmts``.
    """
    return tuple(_replace_in_stmt(s, name, expr) for s in stmts)


def _replace_in_stmt(s: Stmt, name: str, expr: Expr) -> Stmt:
    sub = lambda n: replace_var(n, name, expr)  # noqa: E731
    if isinstance(s, Assign):
        return replace(s, value=sub(s.value))
    if isinstance(s, ArrayAssign):
        return replace(s, index=sub(s.index), value=sub(s.value))
    if isinstance(s, While):
        return replace(s, guard=sub(s.guard), body=replace_var_in_stmts(s.body, name, expr))
    if isinstance(s, For):
        return replace(
            s,
            init=sub(s.init),
            limit=sub(s.limit),
            body=replace_var_in_stmts(s.body, name, expr),
        )
    if isinstance(s, If):
        return replace(
            s,
            guard=sub(s.guard),
            then=replace_var_in_stmts(s.then, name, expr),
            orelse=replace_var_in_stmts(s.orelse, name, expr),
        )
    raise TypeError(f"not a statement: {s!r}")


def iter_stmts(stmts) -> Iterator[Stmt]:
    """Pre-order walk over a statement list, descending into nested bodies."""
    for s in stmts:
        yield s
        if isinstance(s, (While, For)):
            yield from iter_stmts(s.body)
        elif isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)


def iter_loops(stmts) -> Iterator[Loop]:
    for s in iter_stmts(stmts):
        if isinstance(s, (While, For)):
            yield s


def assigned_names(stmts) -> frozenset:
    """Scalars and arrays written anywhere inside ``stmts`` (FOR counters included)."""
    out = set()
    for s in iter_stmts(stmts):
        if isinstance(s, Assign):
            out.add(s.target)
        elif isinstance(s, ArrayAssign):
            out.add(s.array)
        elif isinstance(s, For):
            out.add(s.counter)
    return frozenset(out)


def strip_labels(stmts) -> tuple:
    """Copy of ``stmts`` with every loop label removed (used when duplicating bodies)."""
    out = []
    for s in stmts:
        if isinstance(s, (While, For)):
            s = replace(s, label=None, body=strip_labels(s.body))
        elif isinstance(s, If):
            s = replace(s, then=strip_labels(s.then), orelse=strip_labels(s.orelse))
        out.append(s)
    return tuple(out)


def count_comparisons(p: Pred) -> int:
    if isinstance(p, (Cmp, BoolLit)):
        return 1
    return sum(count_comparisons(i) for i in p.items)


# ----------------------------------------------------------------- validation


def _at(pos):
    return pos if pos is not None else (0, 0)


def validate(program: Program) -> Program:
    """Check the static well-formedness rules; return the program unchanged.

    Raises the first violation found in source order.
    """
    scalars: dict = {}
    arrays: dict = {}
    for d in program.decls:
        if isinstance(d, (VarDecl, ArrayDecl)):
            if d.name in scalars or d.name in arrays:
                line, col = _at(d.pos)
                raise DuplicateDeclaration(f"{d.name!r} declared twice", line, col)
            if isinstance(d, VarDecl):
                scalars[d.name] = d
            else:
                if d.length < 1:
                    line, col = _at(d.pos)
                    raise ParseError(f"array {d.name!r} must have length >= 1", line, col)
                if d.init is not None and len(d.init) != d.length:
                    line, col = _at(d.pos)
                    raise ParseError(
                        f"array {d.name!r} has {len(d.init)} initializers for length {d.length}",
                        line,
                        col,
                    )
                arrays[d.name] = d
        else:
            _check_uses(d.pred, scalars, {}, d.pos)

    labels: set = set()
    _check_body(program.body, scalars, arrays, labels, counters=())
    return program


def _check_uses(node, scalars, arrays, pos):
    if isinstance(node, Var):
        if node.name not in scalars:
            line, col = _at(node.pos or pos)
            raise UndeclaredIdentifier(f"undeclared scalar {node.name!r}", line, col)
    elif isinstance(node, ArrayRead):
        if node.array not in arrays:
            line, col = _at(node.pos or pos)
            raise UndeclaredIdentifier(f"undeclared array {node.array!r}", line, col)
        _check_uses(node.index, scalars, arrays, pos)
    elif isinstance(node, (BinOp, Cmp)):
        _check_uses(node.left, scalars, arrays, pos)
        _check_uses(node.right, scalars, arrays, pos)
    elif isinstance(node, (And, Or)):
        for i in node.items:
            _check_uses(i, scalars, arrays, pos)


def _check_body(stmts, scalars, arrays, labels, counters):
    for s in stmts:
        if isinstance(s, Assign):
            if s.target not in scalars:
                line, col = _at(s.pos)
                raise UndeclaredIdentifier(f"undeclared scalar {s.target!r}", line, col)
            if s.target in counters:
                line, col = _at(s.pos)
                raise CounterMutatedInBody(f"loop counter {s.target!r} assigned in its body", line, col)
            _check_uses(s.value, scalars, arrays, s.pos)
        elif isinstance(s, ArrayAssign):
            if s.array not in arrays:
                line, col = _at(s.pos)
                raise UndeclaredIdentifier(f"undeclared array {s.array!r}", line, col)
            _check_uses(s.index, scalars, arrays, s.pos)
            _check_uses(s.value, scalars, arrays, s.pos)
        elif isinstance(s, If):
            _check_uses(s.guard, scalars, arrays, s.pos)
            _check_body(s.then, scalars, arrays, labels, counters)
            _check_body(s.orelse, scalars, arrays, labels, counters)
        elif isinstance(s, (While, For)):
            if s.label is not None:
                if s.label in labels:
                    line, col = _at(s.pos)
                    raise DuplicateLabel(f"duplicate loop label {s.label!r}", line, col)
                labels.add(s.label)
            if isinstance(s, While):
                _check_uses(s.guard, scalars, arrays, s.pos)
                _check_body(s.body, scalars, arrays, labels, counters)
            else:
                if s.counter not in scalars:
                    line, col = _at(s.pos)
                    raise UndeclaredIdentifier(f"undeclared scalar {s.counter!r}", line, col)
                if s.counter in counters:
                    line, col = _at(s.pos)
                    raise CounterMutatedInBody(f"loop counter {s.counter!r} reused by a nested loop", line, col)
                _check_uses(s.init, scalars, arrays, s.pos)
                _check_uses(s.limit, scalars, arrays, s.pos)
                _check_body(s.body, scalars, arrays, labels, counters + (s.counter,))
        else:
            raise TypeError(f"not a statement: {s!r}")
