"""Polynomial expression grammar shared by the library and the CLI.

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := 'x' | 'y' | 'z' | rational | '(' expr ')'

A rational literal is ``digits`` or ``digits/digits``.  Implicit
multiplication is rejected.  A single leading minus is accepted at the start
of an expression so that printed series parse back.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from gmpy2 import mpq

from .series import DEFAULT_ORDER, Series


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at offset {position}: {text!r}")
        self.position = position
        self.text = text


@dataclass(frozen=True)
class Num:
    value: mpq


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Neg, BinOp, Pow]

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([xyz])|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    text = text.replace("−", "-")
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("var", m.group(2), m.start(2)))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*^()":
                raise ExpressionSyntaxError(f"unexpected character {ch!r}", m.start(3), text)
            tokens.append((ch, ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "end" else repr(kind)
            raise ExpressionSyntaxError(f"expected {want}", tok[2], self.text)
        self.i += 1
        return tok

    def expr(self) -> Node:
        negate = False
        if self.peek()[0] == "-":
            self.take()
            negate = True
        node = self.term()
        if negate:
            node = Neg(node)
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "*":
            self.take()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[0] == "^":
            self.take()
            kind, val, pos = self.peek()
            if kind != "num" or "/" in val:
                raise ExpressionSyntaxError("exponent must be a non-negative integer", pos, self.text)
            self.take()
            node = Pow(node, int(val))
        return node

    def base(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            if "/" in val and int(val.split("/")[1]) == 0:
                raise ExpressionSyntaxError("zero denominator", pos, self.text)
            return Num(mpq(val) if "/" not in val else mpq(*map(int, val.split("/"))))
        if kind == "var":
            self.take()
            return Var(val)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {what}", pos, self.text)


def parse_expression(text: str) -> Node:
    p = _Parser(text)
    node = p.expr()
    p.take("end")
    return node


def lower(node: Node, order: int = DEFAULT_ORDER) -> Series:
    """Evaluate a parse tree to a series modulo ``m^order``."""
    if isinstance(node, Num):
        return Series.const(node.value, order)
    if isinstance(node, Var):
        return Series.var(node.name, order)
    if isinstance(node, Neg):
        return -lower(node.operand, order)
    if isinstance(node, Pow):
        return lower(node.base, order) ** node.exponent
    a, b = lower(node.left, order), lower(node.right, order)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    return a * b


def parse_series(text: str, order: int = DEFAULT_ORDER) -> Series:
    return lower(parse_expression(text), order)


def parse_tuple(text: str, order: int = DEFAULT_ORDER) -> list[Series]:
    """Parse ``"(expr, expr, ...)"`` into a list of series."""
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ExpressionSyntaxError("expected a parenthesised generator list", 0, text)
    parts, depth, start = [], 0, 1
    for pos, ch in enumerate(s[1:-1], start=1):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(s[start:pos])
            start = pos + 1
    parts.append(s[start:-1])
    if any(not p.strip() for p in parts):
        raise ExpressionSyntaxError("empty generator", 0, text)
    return [parse_series(p, order) for p in parts]


def _monomial_text(i: int, j: int, k: int) -> str:
    bits = []
    for name, e in zip("xyz", (i, j, k)):
        if e == 1:
            bits.append(name)
        elif e > 1:
            bits.append(f"{name}^{e}")
    return "*".join(bits)


def format_series(s: Series) -> str:
    if s.is_zero():
        return "0"
    out = []
    for (i, j, k), c in s.terms():
        mono = _monomial_text(i, j, k)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)
