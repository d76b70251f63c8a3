"""Abstract syntax, concrete grammar, parser, and well-formedness checks.

The language is a small imperative language with shared locations tagged
by memory orders: writes ``x @ord := e``, reads ``x @ord``, fences,
atomic read-modify-writes, local (register-like) variables, sequencing,
conditionals, while loops, and parallel threads separated by ``|||``.

Whether an identifier is atomic or non-atomic is not declared; it is
inferred from the order tags it is used with.  Mixing ``na`` and atomic
tags on one identifier is a static error reported by ``check_static``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .actions import ACQ, AR, NA, RLX, MemOrder, mo_lt

# ---------------------------------------------------------------------------
# Read-modify-write functions


@dataclass(frozen=True)
class AddFun:
    """v maps to v + k, total on the value domain."""

    k: int

    def graph_over(self, values: Iterable[int]):
        return tuple((v, v + self.k) for v in values)

    def pp(self) -> str:
        return f"add {self.k}"


@dataclass(frozen=True)
class XchgFun:
    """v maps to k, total on the value domain."""

    k: int

    def graph_over(self, values: Iterable[int]):
        return tuple((v, self.k) for v in values)

    def pp(self) -> str:
        return f"xchg {self.k}"


@dataclass(frozen=True)
class CasFun:
    """Partial: defined only at ``expected``, where it yields ``replacement``."""

    expected: int
    replacement: int

    def graph_over(self, values: Iterable[int]):
        return tuple(
            (v, self.replacement) for v in values if v == self.expected
        )

    def pp(self) -> str:
        return f"cas {self.expected} {self.replacement}"


RmwFun = Union[AddFun, XchgFun, CasFun]

# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class ReadExp:
    ident: str
    order: MemOrder


@dataclass(frozen=True)
class RmwExp:
    ident: str
    order: MemOrder
    fun: RmwFun


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "IntExpr"
    right: "IntExpr"


IntExpr = Union[IntLit, ReadExp, RmwExp, BinOp]


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class NotExp:
    arg: "BoolExpr"


@dataclass(frozen=True)
class OrExp:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class CmpExp:
    op: str  # one of < ==
    left: IntExpr
    right: IntExpr


BoolExpr = Union[BoolLit, NotExp, OrExp, CmpExp]

# ---------------------------------------------------------------------------
# Commands and programs


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    ident: str
    order: MemOrder
    expr: IntExpr


@dataclass(frozen=True)
class FenceCmd:
    order: MemOrder


@dataclass(frozen=True)
class RmwCmd:
    ident: str
    order: MemOrder
    fun: RmwFun


@dataclass(frozen=True)
class Local:
    ident: str
    init: int
    body: "Cmd"


@dataclass(frozen=True)
class Seq:
    first: "Cmd"
    second: "Cmd"


@dataclass(frozen=True)
class If:
    guard: BoolExpr
    then: "Cmd"
    orelse: "Cmd"


@dataclass(frozen=True)
class While:
    guard: BoolExpr
    body: "Cmd"


Cmd = Union[Skip, Assign, FenceCmd, RmwCmd, Local, Seq, If, While]


@dataclass(frozen=True)
class Prog:
    threads: tuple

    def __post_init__(self):
        if not self.threads:
            raise ValueError("a program needs at least one thread")


# ---------------------------------------------------------------------------
# Lexer


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = frozenset(
    """skip fence rmw local in if then else while do true false
       add xchg cas na rlx rel acq ar sc""".split()
)

_ORDERS = {m.value: m for m in MemOrder}

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<INT>[0-9]+)
  | (?P<IDENT>[a-z][a-zA-Z0-9_]*)
  | (?P<OP>:=|\|\|\||\|\||==|[@;{}()+\-*<=!])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # INT | IDENT | KW | OP | EOF
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "WS":
            if kind == "IDENT" and lexeme in KEYWORDS:
                kind = "KW"
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("OP", "KW")

    def eat(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return self.advance()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # -- leaves

    def parse_int(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        tok = self.peek()
        if tok.kind != "INT":
            self.fail(f"expected an integer, found {tok.text!r}")
        self.advance()
        value = int(tok.text)
        return -value if neg else value

    def parse_ident(self) -> str:
        tok = self.peek()
        if tok.kind != "IDENT":
            self.fail(f"expected an identifier, found {tok.text!r}")
        self.advance()
        return tok.text

    def parse_order(self) -> MemOrder:
        tok = self.peek()
        if tok.kind == "KW" and tok.text in _ORDERS:
            self.advance()
            return _ORDERS[tok.text]
        self.fail(f"expected a memory order, found {tok.text!r}")

    def parse_fun(self) -> RmwFun:
        tok = self.peek()
        if self.at("add"):
            self.advance()
            return AddFun(self.parse_int())
        if self.at("xchg"):
            self.advance()
            return XchgFun(self.parse_int())
        if self.at("cas"):
            self.advance()
            expected = self.parse_int()
            return CasFun(expected, self.parse_int())
        raise ParseError(f"expected add/xchg/cas, found {tok.text!r}", tok.line, tok.col)

    def parse_rmw_parts(self):
        tok = self.eat("rmw")
        self.eat("(")
        ident = self.parse_ident()
        self.eat("@")
        order = self.parse_order()
        if order is NA:
            raise ParseError("rmw requires an atomic order", tok.line, tok.col)
        fun = self.parse_fun()
        self.eat(")")
        return ident, order, fun

    # -- integer expressions (precedence: * over + -)

    def parse_iexp(self) -> IntExpr:
        left = self.parse_iterm()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = BinOp(op, left, self.parse_iterm())
        return left

    def parse_iterm(self) -> IntExpr:
        left = self.parse_iprimary()
        while self.at("*"):
            self.advance()
            left = BinOp("*", left, self.parse_iprimary())
        return left

    def parse_iprimary(self) -> IntExpr:
        tok = self.peek()
        if tok.kind == "INT" or self.at("-"):
            return IntLit(self.parse_int())
        if self.at("rmw"):
            ident, order, fun = self.parse_rmw_parts()
            return RmwExp(ident, order, fun)
        if tok.kind == "IDENT":
            ident = self.parse_ident()
            self.eat("@")
            order = self.parse_order()
            if order in (AR, MemOrder.REL):
                raise ParseError(f"read order {order} forbidden", tok.line, tok.col)
            return ReadExp(ident, order)
        if self.at("("):
            self.advance()
            inner = self.parse_iexp()
            self.eat(")")
            return inner
        self.fail(f"expected an integer expression, found {tok.text!r}")

    # -- boolean expressions
    #
    # A leading "(" is ambiguous between a parenthesized boolean and a
    # parenthesized integer starting a comparison; we try the boolean
    # reading and backtrack.

    def parse_bexp(self) -> BoolExpr:
        left = self.parse_batom()
        while self.at("||"):
            self.advance()
            left = OrExp(left, self.parse_batom())
        return left

    def parse_batom(self) -> BoolExpr:
        tok = self.peek()
        if self.at("true"):
            self.advance()
            return BoolLit(True)
        if self.at("false"):
            self.advance()
            return BoolLit(False)
        if self.at("!"):
            self.advance()
            return NotExp(self.parse_batom())
        if self.at("("):
            saved = self.pos
            try:
                self.advance()
                inner = self.parse_bexp()
                self.eat(")")
            except ParseError:
                self.pos = saved
            else:
                if not (self.at("<") or self.at("==") or self.at("+")
                        or self.at("-") or self.at("*")):
                    return inner
                self.pos = saved
        return self.parse_comparison()

    def parse_comparison(self) -> BoolExpr:
        left = self.parse_iexp()
        if self.at("<"):
            self.advance()
            return CmpExp("<", left, self.parse_iexp())
        if self.at("=="):
            self.advance()
            return CmpExp("==", left, self.parse_iexp())
        self.fail("expected '<' or '==' in comparison")

    # -- commands

    def parse_cmd(self) -> Cmd:
        first = self.parse_cmd_base()
        if self.at(";"):
            self.advance()
            return Seq(first, self.parse_cmd())
        return first

    def parse_block(self) -> Cmd:
        self.eat("{")
        body = self.parse_cmd()
        self.eat("}")
        return body

    def parse_cmd_base(self) -> Cmd:
        tok = self.peek()
        if self.at("skip"):
            self.advance()
            return Skip()
        if self.at("fence"):
            self.advance()
            self.eat("@")
            order = self.parse_order()
            if not mo_lt(RLX, order):
                raise ParseError("fence order must exceed rlx", tok.line, tok.col)
            return FenceCmd(order)
        if self.at("rmw"):
            ident, order, fun = self.parse_rmw_parts()
            return RmwCmd(ident, order, fun)
        if self.at("local"):
            self.advance()
            ident = self.parse_ident()
            self.eat("=")
            init = self.parse_int()
            self.eat("in")
            return Local(ident, init, self.parse_block())
        if self.at("if"):
            self.advance()
            self.eat("(")
            guard = self.parse_bexp()
            self.eat(")")
            self.eat("then")
            then = self.parse_block()
            self.eat("else")
            orelse = self.parse_block()
            return If(guard, then, orelse)
        if self.at("while"):
            self.advance()
            self.eat("(")
            guard = self.parse_bexp()
            self.eat(")")
            self.eat("do")
            return While(guard, self.parse_block())
        if tok.kind == "IDENT":
            ident = self.parse_ident()
            self.eat("@")
            order = self.parse_order()
            if order in (ACQ, AR):
                raise ParseError(f"write order {order} forbidden", tok.line, tok.col)
            self.eat(":=")
            return Assign(ident, order, self.parse_iexp())
        self.fail(f"expected a command, found {tok.text!r}")

    def parse_program(self) -> Prog:
        threads = [self.parse_cmd()]
        while self.at("|||"):
            self.advance()
            threads.append(self.parse_cmd())
        tok = self.peek()
        if tok.kind != "EOF":
            self.fail(f"unexpected trailing input {tok.text!r}")
        return Prog(tuple(threads))


def parse_program(text: str) -> Prog:
    """Parse a whole program; raises ParseError with line/column on failure."""
    return _Parser(tokenize(text)).parse_program()


def parse_command(text: str) -> Cmd:
    prog = parse_program(text)
    if len(prog.threads) != 1:
        raise ParseError("expected a single command, found '|||'", 1, 1)
    return prog.threads[0]


# ---------------------------------------------------------------------------
# Pretty printer
#
# Sequencing is printed flat (it reparses right-nested); nested arithmetic
# and boolean operands are parenthesized so every expression round-trips
# exactly.


def _pp_iexp(e: IntExpr, nested: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, ReadExp):
        return f"{e.ident} @{e.order}"
    if isinstance(e, RmwExp):
        return f"rmw({e.ident} @{e.order}, {e.fun.pp()})"
    if isinstance(e, BinOp):
        body = f"{_pp_iexp(e.left, True)} {e.op} {_pp_iexp(e.right, True)}"
        return f"({body})" if nested else body
    raise TypeError(f"not an integer expression: {e!r}")


def _pp_bexp(b: BoolExpr, nested: bool = False) -> str:
    if isinstance(b, BoolLit):
        return "true" if b.value else "false"
    if isinstance(b, NotExp):
        return f"!({_pp_bexp(b.arg)})"
    if isinstance(b, OrExp):
        body = f"{_pp_bexp(b.left, True)} || {_pp_bexp(b.right, True)}"
        return f"({body})" if nested else body
    if isinstance(b, CmpExp):
        body = f"{_pp_iexp(b.left, True)} {b.op} {_pp_iexp(b.right, True)}"
        return f"({body})" if nested else body
    raise TypeError(f"not a boolean expression: {b!r}")


def _pp_cmd(c: Cmd) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Assign):
        return f"{c.ident} @{c.order} := {_pp_iexp(c.expr)}"
    if isinstance(c, FenceCmd):
        return f"fence @{c.order}"
    if isinstance(c, RmwCmd):
        return f"rmw({c.ident} @{c.order}, {c.fun.pp()})"
    if isinstance(c, Local):
        return f"local {c.ident} = {c.init} in {{ {_pp_cmd(c.body)} }}"
    if isinstance(c, Seq):
        return f"{_pp_cmd(c.first)} ; {_pp_cmd(c.second)}"
    if isinstance(c, If):
        return (
            f"if ({_pp_bexp(c.guard)}) then {{ {_pp_cmd(c.then)} }}"
            f" else {{ {_pp_cmd(c.orelse)} }}"
        )
    if isinstance(c, While):
        return f"while ({_pp_bexp(c.guard)}) do {{ {_pp_cmd(c.body)} }}"
    raise TypeError(f"not a command: {c!r}")


def pretty_print(node) -> str:
    if isinstance(node, Prog):
        return " ||| ".join(_pp_cmd(t) for t in node.threads)
    return _pp_cmd(node)


# ---------------------------------------------------------------------------
# Static checks


def _iexp_uses(e: IntExpr, out: list):
    if isinstance(e, ReadExp):
        out.append(("read", e.ident, e.order))
    elif isinstance(e, RmwExp):
        out.append(("rmw", e.ident, e.order))
    elif isinstance(e, BinOp):
        _iexp_uses(e.left, out)
        _iexp_uses(e.right, out)


def _bexp_uses(b: BoolExpr, out: list):
    if isinstance(b, NotExp):
        _bexp_uses(b.arg, out)
    elif isinstance(b, OrExp):
        _bexp_uses(b.left, out)
        _bexp_uses(b.right, out)
    elif isinstance(b, CmpExp):
        _iexp_uses(b.left, out)
        _iexp_uses(b.right, out)


def _cmd_uses(c: Cmd, out: list, locals_seen: list):
    if isinstance(c, Assign):
        out.append(("write", c.ident, c.order))
        _iexp_uses(c.expr, out)
    elif isinstance(c, FenceCmd):
        out.append(("fence", None, c.order))
    elif isinstance(c, RmwCmd):
        out.append(("rmw", c.ident, c.order))
    elif isinstance(c, Local):
        locals_seen.append(c.ident)
        _cmd_uses(c.body, out, locals_seen)
    elif isinstance(c, Seq):
        _cmd_uses(c.first, out, locals_seen)
        _cmd_uses(c.second, out, locals_seen)
    elif isinstance(c, If):
        _bexp_uses(c.guard, out)
        _cmd_uses(c.then, out, locals_seen)
        _cmd_uses(c.orelse, out, locals_seen)
    elif isinstance(c, While):
        _bexp_uses(c.guard, out)
        _cmd_uses(c.body, out, locals_seen)


def check_static(p: Prog) -> list:
    """Well-formedness diagnostics; an empty list means the program is fine.

    Checks that every identifier sticks to one class (non-atomic or
    atomic), that order restrictions on reads/writes/fences/rmws hold,
    and that local variables are non-atomic.
    """
    uses: list = []
    locals_seen: list = []
    for t in p.threads:
        _cmd_uses(t, uses, locals_seen)

    diagnostics = []
    classes: dict = {}
    for kind, ident, order in uses:
        if kind == "fence":
            if not mo_lt(RLX, order):
                diagnostics.append("fence order must exceed rlx")
            continue
        if kind == "read" and order in (MemOrder.REL, AR):
            diagnostics.append(f"read of '{ident}' cannot use order {order}")
        if kind == "write" and order in (ACQ, AR):
            diagnostics.append(f"write to '{ident}' cannot use order {order}")
        if kind == "rmw" and order is NA:
            diagnostics.append(f"rmw on '{ident}' requires an atomic order")
            continue
        cls = "na" if (kind != "rmw" and order is NA) else "atomic"
        prev = classes.setdefault(ident, cls)
        if prev != cls:
            diagnostics.append(
                f"identifier '{ident}' is used both non-atomically and atomically"
            )
            classes[ident] = cls  # report each flip once
    for name in locals_seen:
        if classes.get(name) == "atomic":
            diagnostics.append(f"local '{name}' must be non-atomic")
    return diagnostics


# ---------------------------------------------------------------------------
# Identifier utilities


def _iexp_idents(e: IntExpr) -> set:
    if isinstance(e, (ReadExp, RmwExp)):
        return {e.ident}
    if isinstance(e, BinOp):
        return _iexp_idents(e.left) | _iexp_idents(e.right)
    return set()


def _bexp_idents(b: BoolExpr) -> set:
    if isinstance(b, NotExp):
        return _bexp_idents(b.arg)
    if isinstance(b, OrExp):
        return _bexp_idents(b.left) | _bexp_idents(b.right)
    if isinstance(b, CmpExp):
        return _iexp_idents(b.left) | _iexp_idents(b.right)
    return set()


def _cmd_free_idents(c: Cmd) -> set:
    if isinstance(c, Assign):
        return {c.ident} | _iexp_idents(c.expr)
    if isinstance(c, RmwCmd):
        return {c.ident}
    if isinstance(c, Local):
        return _cmd_free_idents(c.body) - {c.ident}
    if isinstance(c, Seq):
        return _cmd_free_idents(c.first) | _cmd_free_idents(c.second)
    if isinstance(c, If):
        return (
            _bexp_idents(c.guard)
            | _cmd_free_idents(c.then)
            | _cmd_free_idents(c.orelse)
        )
    if isinstance(c, While):
        return _bexp_idents(c.guard) | _cmd_free_idents(c.body)
    return set()


def free_idents(p: Prog) -> set:
    """Identifiers a program reads or writes, excluding local-bound ones."""
    out: set = set()
    for t in p.threads:
        out |= _cmd_free_idents(t)
    return out
