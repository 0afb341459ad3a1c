"""Recursive-descent parser for the job expression grammar.

::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' uint)?
    base   := int | name | '(' expr ')' | '-' base

Unary minus sits inside ``base`` and therefore binds tighter than ``^``:
``-x^2`` means ``(-x)^2``.  The printer never emits that shape.
"""

from __future__ import annotations

import re
from typing import Sequence

from .domain import Domain
from .polynomial import PolyRing
from .rational import RationalFunction


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}" + (f" in {text!r}" if text else ""))


class UnknownVariableError(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            toks.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", text, m.start(3))
            toks.append(("op", ch, m.start(3)))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, ring: PolyRing):
        self.text = text
        self.ring = ring
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.text, tok[2])

    def expr(self) -> RationalFunction:
        acc = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> RationalFunction:
        acc = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            tok = self.take()
            rhs = self.factor()
            if tok[1] == "*":
                acc = acc * rhs
            else:
                if rhs.is_zero():
                    raise ZeroDivisionError(
                        f"division by the zero polynomial at position {tok[2]} in {self.text!r}"
                    )
                acc = acc / rhs
        return acc

    def factor(self) -> RationalFunction:
        base = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise self.error("expected unsigned integer exponent", tok)
            return base ** int(tok[1])
        return base

    def base(self) -> RationalFunction:
        tok = self.take()
        kind, val, pos = tok
        if kind == "int":
            return RationalFunction.const(self.ring, int(val))
        if kind == "name":
            if val not in self.ring.index:
                raise UnknownVariableError(f"unknown variable {val!r}", self.text, pos)
            return RationalFunction.gen(self.ring, val)
        if kind == "op" and val == "(":
            inner = self.expr()
            close = self.take()
            if close[:2] != ("op", ")"):
                raise self.error("expected ')'", close)
            return inner
        if kind == "op" and val == "-":
            return -self.base()
        if kind == "end":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected token {val!r}", tok)


def parse_in_ring(text: str, ring: PolyRing) -> RationalFunction:
    if not isinstance(text, str):
        raise ParseError(f"expected a string expression, got {type(text).__name__}")
    p = _Parser(text, ring)
    result = p.expr()
    if p.peek()[0] != "end":
        raise p.error(f"unexpected token {p.peek()[1]!r}")
    return result


def parse_expression(text: str, variables: Sequence[str], domain: Domain) -> RationalFunction:
    """Parse ``text`` into a normalised rational function over ``domain``."""
    return parse_in_ring(text, PolyRing(domain, variables))
