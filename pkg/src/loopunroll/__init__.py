"""Loop unrolling for a small C-like language, with an interpreter and an ILP cost model."""

from .errors import (
    CounterMutatedInBody,
    DivisionByZero,
    DuplicateDeclaration,
    DuplicateLabel,
    ExecutionError,
    IndexOutOfBounds,
    LoopNotFound,
    LoopUnrollError,
    NotAWhileLoop,
    NotCountedFor,
    OracleMismatch,
    Overflow,
    ParseError,
    TransformError,
    UndeclaredIdentifier,
    GuardTooLarge,
    UnsupportedBody,
)
from .ilp import build_dag, cost, critical_path, schedule_block, schedule_trace, speedup, split_blocks
from .interp import check_equiv, execute, run, trace
from .listlab import VariantId, count_oracle, encode_list, gen_list_program, traversal_report
from .parser import parse, parse_expr, parse_pred, pretty
from .syntax import free_vars
from .unroll import UnrollPlan, static_trip_count, unroll, unroll_for, unroll_while
from .wp import AssumptionSet, simplify, substitute, wp_power, wp_seq

__version__ = "0.1.0"

__all__ = [
    "AssumptionSet",
    "CounterMutatedInBody",
    "DivisionByZero",
    "DuplicateDeclaration",
    "DuplicateLabel",
    "ExecutionError",
    "IndexOutOfBounds",
    "LoopNotFound",
    "LoopUnrollError",
    "NotAWhileLoop",
    "NotCountedFor",
    "OracleMismatch",
    "Overflow",
    "ParseError",
    "TransformError",
    "UndeclaredIdentifier",
    "UnrollPlan",
    "GuardTooLarge",
    "UnsupportedBody",
    "VariantId",
    "build_dag",
    "check_equiv",
    "cost",
    "count_oracle",
    "critical_path",
    "encode_list",
    "execute",
    "free_vars",
    "gen_list_program",
    "parse",
    "parse_expr",
    "parse_pred",
    "pretty",
    "run",
    "schedule_block",
    "schedule_trace",
    "simplify",
    "speedup",
    "split_blocks",
    "static_trip_count",
    "substitute",
    "trace",
    "traversal_report",
    "unroll",
    "unroll_for",
    "unroll_while",
    "wp_power",
    "wp_seq",
]
