"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class LoopUnrollError(Exception):
    """Root of all errors raised by this package."""


def _fmt_pos(pos) -> str:
    if pos is None:
        return "?"
    return f"{pos[0]}:{pos[1]}"


# -- source level ----------------------------------------------------------


class ParseError(LoopUnrollError):
    """Malformed or ill-scoped source text.

    ``line`` and ``column`` are 1-based. ``expected`` is the set of token
    spellings that would have been accepted at that point (may be empty for
    semantic rejections such as duplicate declarations).
    """

    def __init__(self, message: str, line: int, column: int, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = f"{line}:{column}: {message}"
        if self.expected:
            detail += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class DuplicateDeclaration(ParseError):
    pass


class UndeclaredIdentifier(ParseError):
    pass


class CounterMutatedInBody(ParseError):
    pass


class DuplicateLabel(ParseError):
    pass


# -- transformations -------------------------------------------------------


class TransformError(LoopUnrollError):
    pass


class LoopNotFound(TransformError):
    pass


class NotCountedFor(TransformError):
    pass


class NotAWhileLoop(TransformError):
    pass


class UnsupportedBody(TransformError):
    """A loop body falls outside the straight-line scalar-assignment fragment."""

    def __init__(self, kind: str, pos=None, reason: str = ""):
        self.kind = kind
        self.pos = pos
        msg = f"unsupported {kind} at {_fmt_pos(pos)}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class GuardTooLarge(TransformError):
    """The unrolled WHILE guard would exceed the plan's node budget.

    Substitution can duplicate variables at every copy of the body, so the
    guard may grow exponentially with the unroll factor.
    """

    def __init__(self, pos, copies: int, nodes: int, limit: int):
        self.pos = pos
        self.copies = copies
        self.nodes = nodes
        self.limit = limit
        super().__init__(
            f"unrolled guard for loop at {_fmt_pos(pos)} reaches {nodes} nodes after {copies} "
            f"body copies (limit {limit})"
        )


# -- execution -------------------------------------------------------------


class ExecutionError(LoopUnrollError):
    """Runtime fault of an interpreted program."""

    kind = "runtime"

    def __init__(self, message: str, pos=None):
        self.pos = pos
        super().__init__(f"{_fmt_pos(pos)}: {message}")


class DivisionByZero(ExecutionError):
    kind = "division-by-zero"

    def __init__(self, pos=None):
        super().__init__("division by zero", pos)


class Overflow(ExecutionError):
    kind = "overflow"

    def __init__(self, pos=None):
        super().__init__("64-bit signed overflow", pos)


class IndexOutOfBounds(ExecutionError):
    kind = "index-out-of-bounds"

    def __init__(self, array: str, index: int, pos=None):
        self.array = array
        self.index = index
        super().__init__(f"index {index} out of bounds for array {array}", pos)


class OracleMismatch(LoopUnrollError):
    def __init__(self, variant: str, n: int, got: int, expected: int):
        self.variant = variant
        self.n = n
        self.got = got
        self.expected = expected
        super().__init__(f"{variant} on n={n}: counted {got}, expected {expected}")
