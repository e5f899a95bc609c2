"""Integer linear forms over scalar identifiers."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

from .syntax import INT_MAX, INT_MIN, ArrayRead, BinOp, Int, Var


@dataclass(frozen=True)
class LinearForm:
    """``sum(coeff * name) + const`` with no zero coefficients stored."""

    coeffs: tuple = ()  # sorted (name, coeff) pairs
    const: int = 0

    @classmethod
    def of(cls, mapping: dict, const: int = 0) -> "LinearForm":
        return cls(tuple(sorted((k, v) for k, v in mapping.items() if v != 0)), const)

    @classmethod
    def constant(cls, c: int) -> "LinearForm":
        return cls((), c)

    @classmethod
    def var(cls, name: str) -> "LinearForm":
        return cls(((name, 1),), 0)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LinearForm") -> "LinearForm":
        d = self.as_dict()
        for k, v in other.coeffs:
            d[k] = d.get(k, 0) + v
        return LinearForm.of(d, self.const + other.const)

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple((k, -v) for k, v in self.coeffs), -self.const)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def scale(self, c: int) -> "LinearForm":
        return LinearForm.of({k: v * c for k, v in self.coeffs}, self.const * c)

    def content(self) -> int:
        """gcd of the variable coefficients (0 for constants)."""
        g = 0
        for _, v in self.coeffs:
            g = gcd(g, v)
        return g

    def fits_int64(self) -> bool:
        return all(INT_MIN <= v <= INT_MAX for _, v in self.coeffs) and INT_MIN <= self.const <= INT_MAX

    def to_expr(self):
        """Render as an expression: positive terms first, then negative ones."""
        pos = [(k, v) for k, v in self.coeffs if v > 0]
        neg = [(k, -v) for k, v in self.coeffs if v < 0]
        if not pos:
            if not neg:
                return Int(self.const)
            # lead with a negative literal coefficient so it re-parses identically
            (k, v), rest = neg[0], neg[1:]
            head = BinOp("*", Int(-v), Var(k))
            return _append(head, [], rest, self.const)
        head = _term(*pos[0])
        return _append(head, pos[1:], neg, self.const)


def _term(name: str, coeff: int):
    return Var(name) if coeff == 1 else BinOp("*", Int(coeff), Var(name))


def _append(head, pos, neg, const):
    e = head
    for k, v in pos:
        e = BinOp("+", e, _term(k, v))
    for k, v in neg:
        e = BinOp("-", e, _term(k, v))
    if const > 0:
        e = BinOp("+", e, Int(const))
    elif const < 0:
        e = BinOp("-", e, Int(-const))
    return e


def sum_expr(terms: list, const: int):
    """Expression for ``sum(c * x) + const`` given positive-coefficient terms."""
    if not terms:
        return Int(const)
    return _append(_term(*terms[0]), terms[1:], [], const)


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def to_linear(e) -> Optional[LinearForm]:
    """Linear form of ``e`` or ``None`` when it is not linear over scalars.

    Array reads, products of two non-constant terms, and division of a
    non-constant numerator are all non-linear. Constant subterms are folded
    with the language's truncating division; division by zero is non-linear
    (it must stay in the tree so that the runtime error survives).
    """
    if isinstance(e, Int):
        return LinearForm.constant(e.value)
    if isinstance(e, Var):
        return LinearForm.var(e.name)
    if isinstance(e, ArrayRead):
        return None
    if isinstance(e, BinOp):
        left = to_linear(e.left)
        if left is None:
            return None
        right = to_linear(e.right)
        if right is None:
            return None
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            if left.is_constant:
                return right.scale(left.const)
            if right.is_constant:
                return left.scale(right.const)
            return None
        if e.op == "/":
            if left.is_constant and right.is_constant and right.const != 0:
                return LinearForm.constant(trunc_div(left.const, right.const))
            return None
    raise TypeError(f"not an expression: {e!r}")
