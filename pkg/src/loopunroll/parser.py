"""Recursive-descent parser and canonical pretty-printer for the mini language.

Grammar (C-flavoured; ``//`` starts a line comment)::

    program  := decl* stmt*
    decl     := "var" IDENT ("=" INT)? ";"
              | "array" IDENT "[" INT "]" ("=" "{" INT ("," INT)* "}")? ";"
              | "assume" pred ";"
    stmt     := IDENT "=" expr ";"
              | IDENT "[" expr "]" "=" expr ";"
              | ("label" IDENT ":")? "while" "(" pred ")" block
              | ("label" IDENT ":")? "for" "(" IDENT "=" expr ";" IDENT "<" expr ";"
                                               IDENT "+=" INT ")" block
              | "if" "(" pred ")" block ("else" block)?
    block    := "{" stmt* "}"
    pred     := conj ("||" conj)*
    conj     := cmp ("&&" cmp)*
    cmp      := expr CMPOP expr | "true" | "false" | "(" pred ")"
    expr     := term (("+"|"-") term)*
    term     := factor (("*"|"/") factor)*
    factor   := INT | IDENT | IDENT "[" expr "]" | "(" expr ")" | "-" factor
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, fields

from .errors import ParseError
from .syntax import (
    CMP_OPS,
    INT_MAX,
    INT_MIN,
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
    validate,
)

KEYWORDS = frozenset(
    {"var", "array", "assume", "label", "while", "for", "if", "else", "true", "false"}
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||\+=|[<>=+\-*/()\[\]{};,:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def tokenize(source: str) -> list:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "int":
            tokens.append(Token("int", m.group(), line, col))
        elif kind == "ident":
            text = m.group()
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind == "op":
            tokens.append(Token("op", m.group(), line, col))
        i = m.end()
    tokens.append(Token("eof", "<end of input>", line, len(source) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        # farthest failure seen, used to report the most informative error
        self._far: ParseError | None = None

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def error(self, expected, message: str | None = None) -> ParseError:
        t = self.tok
        msg = message or f"unexpected {t.text!r}"
        err = ParseError(msg, t.line, t.col, expected)
        if self._far is None or (err.line, err.column) > (self._far.line, self._far.column):
            self._far = err
        return err

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error({text})
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            raise self.error({"identifier"})
        self.i += 1
        return t

    def integer(self) -> int:
        neg = False
        if self.at("-") and self.peek().kind == "int":
            neg = True
            self.i += 1
        t = self.tok
        if t.kind != "int":
            raise self.error({"integer"})
        value = -int(t.text) if neg else int(t.text)
        if not INT_MIN <= value <= INT_MAX:
            raise self.error(set(), f"integer literal {value} out of 64-bit range")
        self.i += 1
        return value

    # -- program

    def program(self) -> Program:
        decls = []
        while self.at("var") or self.at("array") or self.at("assume"):
            decls.append(self.decl())
        body = []
        while self.tok.kind != "eof":
            body.append(self.stmt())
        return Program(tuple(decls), tuple(body))

    def decl(self):
        start = self.tok
        if self.at("var"):
            self.i += 1
            name = self.ident().text
            init = None
            if self.at("="):
                self.i += 1
                init = self.integer()
            elif not self.at(";"):
                raise self.error({"=", ";"})
            self.expect(";")
            return VarDecl(name, init, pos=start.pos)
        if self.at("array"):
            self.i += 1
            name = self.ident().text
            self.expect("[")
            length = self.integer()
            self.expect("]")
            init = None
            if self.at("="):
                self.i += 1
                self.expect("{")
                values = [self.integer()]
                while self.at(","):
                    self.i += 1
                    values.append(self.integer())
                self.expect("}")
                init = tuple(values)
            elif not self.at(";"):
                raise self.error({"=", ";"})
            self.expect(";")
            return ArrayDecl(name, length, init, pos=start.pos)
        self.expect("assume")
        pred = self.pred()
        self.expect(";")
        return Assume(pred, pos=start.pos)

    # -- statements

    def block(self) -> tuple:
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error({"}"})
            out.append(self.stmt())
        self.expect("}")
        return tuple(out)

    def stmt(self):
        start = self.tok
        if start.kind == "ident":
            name = start.text
            self.i += 1
            if self.at("["):
                self.i += 1
                index = self.expr()
                self.expect("]")
                self.expect("=")
                value = self.expr()
                self.expect(";")
                return ArrayAssign(name, index, value, pos=start.pos)
            if not self.at("="):
                raise self.error({"=", "["})
            self.i += 1
            value = self.expr()
            self.expect(";")
            return Assign(name, value, pos=start.pos)
        label = None
        if self.at("label"):
            self.i += 1
            label = self.ident().text
            self.expect(":")
            if not (self.at("while") or self.at("for")):
                raise self.error({"while", "for"})
        if self.at("while"):
            loop_tok = self.tok
            self.i += 1
            self.expect("(")
            guard = self.pred()
            self.expect(")")
            body = self.block()
            return While(guard, body, label, pos=(start if label else loop_tok).pos)
        if self.at("for"):
            return self.for_stmt(label, start)
        if self.at("if"):
            self.i += 1
            self.expect("(")
            guard = self.pred()
            self.expect(")")
            then = self.block()
            orelse = ()
            if self.at("else"):
                self.i += 1
                orelse = self.block()
            return If(guard, then, orelse, pos=start.pos)
        raise self.error({"identifier", "while", "for", "if", "label"})

    def for_stmt(self, label, start: Token) -> For:
        self.expect("for")
        self.expect("(")
        counter = self.ident().text
        self.expect("=")
        init = self.expr()
        self.expect(";")
        if self.ident().text != counter:
            self.i -= 1
            raise self.error({counter}, f"for-loop condition must test counter {counter!r}")
        self.expect("<")
        limit = self.expr()
        self.expect(";")
        if self.ident().text != counter:
            self.i -= 1
            raise self.error({counter}, f"for-loop increment must update counter {counter!r}")
        self.expect("+=")
        step_tok = self.tok
        step = self.integer()
        if step <= 0:
            raise ParseError(
                "for-loop step must be a positive literal",
                step_tok.line,
                step_tok.col,
                {"positive integer"},
            )
        self.expect(")")
        body = self.block()
        return For(counter, init, limit, step, body, label, pos=start.pos)

    # -- predicates

    def pred(self):
        start = self.tok
        items = [self.conj()]
        while self.at("||"):
            self.i += 1
            items.append(self.conj())
        return items[0] if len(items) == 1 else Or(tuple(items), pos=start.pos)

    def conj(self):
        start = self.tok
        items = [self.cmp()]
        while self.at("&&"):
            self.i += 1
            items.append(self.cmp())
        return items[0] if len(items) == 1 else And(tuple(items), pos=start.pos)

    def cmp(self):
        start = self.tok
        if self.at("true") or self.at("false"):
            self.i += 1
            return BoolLit(start.text == "true", pos=start.pos)
        if self.at("("):
            saved = self.i
            try:
                return self.comparison()
            except ParseError as first:
                self.i = saved
                try:
                    self.expect("(")
                    inner = self.pred()
                    self.expect(")")
                    return inner
                except ParseError as second:
                    a, b = (first.line, first.column), (second.line, second.column)
                    raise first if a > b else second
        return self.comparison()

    def comparison(self) -> Cmp:
        start = self.tok
        left = self.expr()
        t = self.tok
        if not (t.kind == "op" and t.text in CMP_OPS):
            raise self.error(set(CMP_OPS))
        self.i += 1
        right = self.expr()
        return Cmp(t.text, left, right, pos=start.pos)

    # -- expressions

    def expr(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok
            self.i += 1
            left = BinOp(op.text, left, self.term(), pos=op.pos)
        return left

    def term(self):
        left = self.factor()
        while self.at("*") or self.at("/"):
            op = self.tok
            self.i += 1
            left = BinOp(op.text, left, self.factor(), pos=op.pos)
        return left

    def factor(self):
        t = self.tok
        if t.kind == "int" or (self.at("-") and self.peek().kind == "int"):
            return Int(self.integer(), pos=t.pos)
        if self.at("-"):
            self.i += 1
            inner = self.factor()
            return BinOp("-", Int(0, pos=t.pos), inner, pos=t.pos)
        if t.kind == "ident":
            self.i += 1
            if self.at("["):
                self.i += 1
                index = self.expr()
                self.expect("]")
                return ArrayRead(t.text, index, pos=t.pos)
            return Var(t.text, pos=t.pos)
        if self.at("("):
            self.i += 1
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error({"integer", "identifier", "(", "-"})


def parse(source: str) -> Program:
    """Parse and statically validate a program."""
    p = _Parser(source)
    program = p.program()
    return validate(program)


def parse_pred(source: str):
    """Parse a standalone predicate (no scoping checks)."""
    p = _Parser(source)
    pred = p.pred()
    if p.tok.kind != "eof":
        raise p.error({"&&", "||", "<end of input>"})
    return pred


def parse_expr(source: str):
    """Parse a standalone expression (no scoping checks)."""
    p = _Parser(source)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error({"+", "-", "*", "/", "<end of input>"})
    return e


# -------------------------------------------------------------- pretty-print

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
INDENT = "    "


def pretty_expr(e) -> str:
    if isinstance(e, Int):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrayRead):
        return f"{e.array}[{pretty_expr(e.index)}]"
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        left = pretty_expr(e.left)
        if isinstance(e.left, BinOp) and _PREC[e.left.op] < prec:
            left = f"({left})"
        right = pretty_expr(e.right)
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= prec:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def pretty_pred(p) -> str:
    if isinstance(p, BoolLit):
        return "true" if p.value else "false"
    if isinstance(p, Cmp):
        return f"{pretty_expr(p.left)} {p.op} {pretty_expr(p.right)}"
    if isinstance(p, And):
        return " && ".join(
            f"({pretty_pred(i)})" if isinstance(i, (And, Or)) else pretty_pred(i) for i in p.items
        )
    if isinstance(p, Or):
        return " || ".join(
            f"({pretty_pred(i)})" if isinstance(i, Or) else pretty_pred(i) for i in p.items
        )
    raise TypeError(f"not a predicate: {p!r}")


def _pretty_block(stmts, depth: int, out: list) -> None:
    for s in stmts:
        _pretty_stmt(s, depth, out)


def _pretty_stmt(s, depth: int, out: list) -> None:
    pad = INDENT * depth
    if isinstance(s, Assign):
        out.append(f"{pad}{s.target} = {pretty_expr(s.value)};")
    elif isinstance(s, ArrayAssign):
        out.append(f"{pad}{s.array}[{pretty_expr(s.index)}] = {pretty_expr(s.value)};")
    elif isinstance(s, (While, For)):
        head = f"label {s.label}: " if s.label else ""
        if isinstance(s, While):
            head += f"while ({pretty_pred(s.guard)}) {{"
        else:
            i = s.counter
            head += (
                f"for ({i} = {pretty_expr(s.init)}; {i} < {pretty_expr(s.limit)}; "
                f"{i} += {s.step}) {{"
            )
        out.append(pad + head)
        _pretty_block(s.body, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(s, If):
        out.append(f"{pad}if ({pretty_pred(s.guard)}) {{")
        _pretty_block(s.then, depth + 1, out)
        if s.orelse:
            out.append(pad + "} else {")
            _pretty_block(s.orelse, depth + 1, out)
        out.append(pad + "}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def pretty(program: Program) -> str:
    """Deterministic canonical source text; empty programs print as ``""``."""
    lines = []
    for d in program.decls:
        if isinstance(d, VarDecl):
            init = "" if d.init is None else f" = {d.init}"
            lines.append(f"var {d.name}{init};")
        elif isinstance(d, ArrayDecl):
            init = "" if d.init is None else " = {" + ", ".join(map(str, d.init)) + "}"
            lines.append(f"array {d.name}[{d.length}]{init};")
        else:
            lines.append(f"assume {pretty_pred(d.pred)};")
    if program.decls and program.body:
        lines.append("")
    _pretty_block(program.body, 0, lines)
    return "\n".join(lines) + "\n" if lines else ""


# ------------------------------------------------------------------- AST dump


def to_json_obj(node):
    """Position-free, JSON-serialisable view of any AST node."""
    if isinstance(node, tuple):
        return [to_json_obj(n) for n in node]
    if hasattr(node, "__dataclass_fields__"):
        obj = {"node": type(node).__name__}
        for f in fields(node):
            if f.name == "pos":
                continue
            obj[f.name] = to_json_obj(getattr(node, f.name))
        return obj
    return node


def dump_ast(program: Program) -> str:
    return json.dumps(to_json_obj(program), indent=2, sort_keys=True) + "\n"
