"""Weakest preconditions of straight-line bodies and a sound predicate simplifier."""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .errors import UnsupportedBody
from .linear import LinearForm, sum_expr, to_linear, trunc_div
from .syntax import (
    INT_MAX,
    INT_MIN,
    FALSE,
    TRUE,
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
    While,
    map_expr,
    replace_var,
)

# subsumption search bounds
MAX_MULTIPLIER = 8
MAX_DEPTH = 2


def substitute(p, x: str, e):
    """``p`` with every occurrence of scalar ``x`` replaced by ``e``."""
    return replace_var(p, x, e)


def _kind(s) -> str:
    return {
        ArrayAssign: "array assignment",
        While: "while loop",
        For: "for loop",
        If: "if statement",
    }.get(type(s), type(s).__name__)


def wp_seq(body, post):
    """wp(s1; ...; sn, post), folding substitution right to left."""
    for s in body:
        if not isinstance(s, Assign):
            raise UnsupportedBody(_kind(s), s.pos, "only scalar assignments have a weakest precondition here")
    result = post
    for s in reversed(tuple(body)):
        result = substitute(result, s.target, s.value)
    return result


def wp_power(body, post, i: int):
    """wp(S^i, post) for ``i`` concatenated copies of ``body``."""
    if i < 1:
        raise ValueError("power must be >= 1")
    return wp_seq(tuple(body) * i, post)


# ------------------------------------------------------------------ simplify


@dataclass(frozen=True)
class AssumptionSet:
    """Comparisons assumed to hold on every state of interest."""

    preds: tuple = ()

    @classmethod
    def of(cls, preds: Iterable = ()) -> "AssumptionSet":
        flat = []
        for p in preds:
            flat.extend(_conjuncts(p))
        return cls(tuple(flat))

    def forms(self) -> tuple:
        """Assumptions as ``LinearForm >= 0`` facts."""
        out = []
        for p in self.preds:
            if not isinstance(p, Cmp):
                continue
            norm = normalize_cmp(p)
            if norm is None:
                continue
            op, f = norm
            if op == ">=":
                out.append(f)
            elif op == "==":
                out.extend([f, -f])
        return tuple(dict.fromkeys(out))


def _conjuncts(p):
    if isinstance(p, And):
        for i in p.items:
            yield from _conjuncts(i)
    else:
        yield p


def normalize_cmp(c: Cmp):
    """``(op, form)`` with op in {">=", "==", "!="} meaning ``form op 0``,
    or ``None`` when either side is non-linear or a coefficient leaves the
    64-bit range.

    Strict comparisons are tightened using integrality; the form is divided
    by the gcd of its coefficients, and equalities are sign-normalised so the
    first coefficient is positive.
    """
    left = to_linear(c.left)
    if left is None:
        return None
    right = to_linear(c.right)
    if right is None:
        return None
    d = left - right
    if not (left.fits_int64() and right.fits_int64() and d.fits_int64()):
        # huge constants: leave the comparison (and its overflow) as written
        return None
    one = LinearForm.constant(1)
    op, f = {
        ">=": (">=", d),
        ">": (">=", d - one),
        "<=": (">=", -d),
        "<": (">=", -d - one),
        "==": ("==", d),
        "!=": ("!=", d),
    }[c.op]
    g = f.content()
    if g > 1:
        if op == ">=":
            f = LinearForm(tuple((k, v // g) for k, v in f.coeffs), f.const // g)
        elif f.const % g == 0:
            f = LinearForm(tuple((k, v // g) for k, v in f.coeffs), f.const // g)
        else:
            # no integer solution: == is false, != is true
            return op, None
    if op in ("==", "!=") and f.coeffs and f.coeffs[0][1] < 0:
        f = -f
    return op, f


def _render(op: str, f: LinearForm) -> Cmp:
    pos = [(k, v) for k, v in f.coeffs if v > 0]
    neg = [(k, -v) for k, v in f.coeffs if v < 0]
    if pos:
        return Cmp(op, sum_expr(pos, 0), sum_expr(neg, -f.const))
    return Cmp(op, Int(f.const), sum_expr(neg, 0))


def fold_expr(e):
    """Fold constant binary operations that cannot fault."""

    def fn(n):
        if isinstance(n, BinOp) and isinstance(n.left, Int) and isinstance(n.right, Int):
            a, b = n.left.value, n.right.value
            if n.op == "+":
                v = a + b
            elif n.op == "-":
                v = a - b
            elif n.op == "*":
                v = a * b
            elif b == 0:
                return n
            else:
                v = trunc_div(a, b)
            if INT_MIN <= v <= INT_MAX:
                return Int(v)
        return n

    return map_expr(e, fn)


def is_safe(p) -> bool:
    """True when evaluating ``p`` can never raise (ignoring 64-bit overflow).

    Array reads may be out of bounds and division may be by zero, so either
    one makes a predicate unsafe to drop or reorder.
    """
    if isinstance(p, BoolLit):
        return True
    if isinstance(p, Cmp):
        return _safe_expr(p.left) and _safe_expr(p.right)
    return all(is_safe(i) for i in p.items)


def _safe_expr(e) -> bool:
    if isinstance(e, ArrayRead):
        return False
    if isinstance(e, BinOp):
        if e.op == "/" and not (isinstance(e.right, Int) and e.right.value != 0):
            return False
        return _safe_expr(e.left) and _safe_expr(e.right)
    return True


def _simplify_cmp(c: Cmp):
    norm = normalize_cmp(c)
    if norm is None:
        c = replace(c, left=fold_expr(c.left), right=fold_expr(c.right))
        if isinstance(c.left, Int) and isinstance(c.right, Int):
            return BoolLit(_compare(c.op, c.left.value, c.right.value))
        return c
    op, f = norm
    if f is None:
        return BoolLit(op == "!=")
    if f.is_constant:
        return BoolLit(_compare(op, f.const, 0))
    if not f.fits_int64():
        return c
    return _render(op, f)


def _compare(op: str, a: int, b: int) -> bool:
    return {
        "==": a == b,
        "!=": a != b,
        "<": a < b,
        "<=": a <= b,
        ">": a > b,
        ">=": a >= b,
    }[op]


def _ge_form(p) -> Optional[LinearForm]:
    if isinstance(p, Cmp) and p.op == ">=":
        norm = normalize_cmp(p)
        if norm is not None and norm[1] is not None:
            return norm[1]
    return None


def _nonneg_combination(diff: LinearForm, facts: tuple) -> bool:
    """Is ``diff`` = sum(lambda_j * fact_j) + mu with lambda_j in 1..8 and mu >= 0?

    At most ``MAX_DEPTH`` facts take part. The last multiplier is solved for
    rather than enumerated.
    """
    return _combination(diff.as_dict(), diff.const, facts, MAX_DEPTH)


@functools.lru_cache(maxsize=65536)
def _combo_cached(coeffs: tuple, const: int, facts: tuple, depth: int) -> bool:
    return _combination(dict(coeffs), const, facts, depth)


def _combination(coeffs: dict, const: int, facts: tuple, depth: int) -> bool:
    coeffs = {k: v for k, v in coeffs.items() if v}
    if not coeffs:
        return const >= 0
    if depth == 0:
        return False
    for n, f in enumerate(facts):
        fc = f.as_dict()
        if not fc:
            continue
        # f alone closes the gap: solve lambda from one shared coefficient
        name, c = next(iter(fc.items()))
        lam, rem = divmod(coeffs.get(name, 0), c)
        if rem == 0 and 1 <= lam <= MAX_MULTIPLIER:
            if all(coeffs.get(k, 0) == lam * fc.get(k, 0) for k in set(coeffs) | set(fc)):
                if const - lam * f.const >= 0:
                    return True
        if depth > 1:
            rest = facts[n + 1 :]
            if not rest:
                continue
            for lam in range(1, MAX_MULTIPLIER + 1):
                nxt = dict(coeffs)
                for k, v in fc.items():
                    nxt[k] = nxt.get(k, 0) - lam * v
                if _combo_cached(tuple(sorted(nxt.items())), const - lam * f.const, rest, depth - 1):
                    return True
    return False


def _simplify_and(items, facts):
    flat = []
    for i in items:
        i = _simplify(i, facts)
        if isinstance(i, And):
            flat.extend(i.items)
        else:
            flat.append(i)

    out = []
    for i in flat:
        if i == TRUE or i in out:
            continue
        if i == FALSE:
            # the remaining conjuncts are never evaluated
            if all(is_safe(o) for o in out):
                return FALSE
            out.append(FALSE)
            break
        out.append(i)

    forms = [_ge_form(i) for i in out]
    # conjuncts implied by the assumptions alone
    keep = [f is None or not (facts and _nonneg_combination(f, facts)) for f in forms]
    out = [i for i, k in zip(out, keep) if k]
    forms = [f for f, k in zip(forms, keep) if k]

    changed = True
    while changed:
        changed = False
        for j, fj in enumerate(forms):
            if fj is None:
                continue
            for i, fi in enumerate(forms):
                if i == j or fi is None:
                    continue
                lo, hi = min(i, j), max(i, j)
                if not all(is_safe(o) for o in out[lo + 1 : hi]):
                    continue
                if _nonneg_combination(fj - fi, facts):
                    del out[j], forms[j]
                    changed = True
                    break
            if changed:
                break

    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def _simplify_or(items, facts):
    flat = []
    for i in items:
        i = _simplify(i, facts)
        if isinstance(i, Or):
            flat.extend(i.items)
        else:
            flat.append(i)
    out = []
    for i in flat:
        if i == FALSE or i in out:
            continue
        if i == TRUE:
            if all(is_safe(o) for o in out):
                return TRUE
            out.append(TRUE)
            break
        out.append(i)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def _simplify(p, facts):
    if isinstance(p, BoolLit):
        return BoolLit(p.value)
    if isinstance(p, Cmp):
        return _simplify_cmp(p)
    if isinstance(p, And):
        return _simplify_and(p.items, facts)
    if isinstance(p, Or):
        return _simplify_or(p.items, facts)
    raise TypeError(f"not a predicate: {p!r}")


def simplify(p, assumptions: AssumptionSet | Iterable = ()):
    """Equivalent predicate under ``assumptions``, in canonical form.

    Linear comparisons become ``lhs op rhs`` with non-negative coefficients on
    both sides; duplicate and trivially true conjuncts disappear, and a linear
    conjunct is dropped when another one implies it given the assumptions.
    Non-linear comparisons are only constant-folded. Equivalence is over
    mathematical integers; a rewritten comparison may overflow differently.
    """
    if not isinstance(assumptions, AssumptionSet):
        assumptions = AssumptionSet.of(assumptions)
    facts = assumptions.forms()
    result = _simplify(p, facts)
    # later passes settle conjuncts exposed by flattening
    for _ in range(8):
        again = _simplify(result, facts)
        if again == result:
            break
        result = again
    return result
