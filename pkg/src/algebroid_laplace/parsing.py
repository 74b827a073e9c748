"""Recursive-descent parser for the scenario expression language.

Grammar (ASCII)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := NUMBER | 'i' | IDENT | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'exp' | 'log' | 'conj'
    IDENT  := ('z' | 'u') positive-int

``^`` binds tighter than unary minus, so ``-z1^2`` is ``-(z1^2)``.
"""
from __future__ import annotations

import re

from . import expr as ex

__all__ = ["ExprSyntaxError", "UnknownIdentifierError", "IndexOutOfRangeError",
           "NonIntegerExponentError", "parse_expr"]


class ExprSyntaxError(ValueError):
    """Malformed expression text.  ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class IndexOutOfRangeError(ExprSyntaxError):
    pass


class NonIntegerExponentError(ExprSyntaxError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_FUNCS = {"exp": ex.exp, "log": ex.log, "conj": ex.conj}
_VAR = re.compile(r"([zu])(\d+)")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, n: int, m: int):
        self.text = text
        self.n, self.m = n, m
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.advance()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self) -> ex.Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.term()
            e = ex.add(e, rhs) if op == "+" else ex.sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.unary()
            e = ex.mul(e, rhs) if op == "*" else ex.div(e, rhs)
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.advance()
            return ex.neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.advance()
        sign = 1
        if self.peek()[1] in ("-", "+"):
            sign = -1 if self.advance()[1] == "-" else 1
        kind, val, pos = self.peek()
        if kind != "num" or not val.isdigit():
            if kind == "end":
                raise ExprSyntaxError("expected integer exponent, found end of input", pos, self.text)
            raise NonIntegerExponentError(f"exponent must be an integer literal, found {val!r}",
                                          pos, self.text)
        self.advance()
        return ex.power(base, sign * int(val))

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "num":
            return ex.const(float(val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if val == "i":
                return ex.I
            if val in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _FUNCS[val](arg)
            m = _VAR.fullmatch(val)
            if m is None:
                raise UnknownIdentifierError(f"unknown identifier {val!r}", pos, self.text)
            kind_, idx = m.group(1), int(m.group(2))
            limit = self.n if kind_ == "z" else self.m
            if not 1 <= idx <= limit:
                raise IndexOutOfRangeError(
                    f"{val!r} out of range ({kind_}1..{kind_}{limit})", pos, self.text)
            return ex.var(ex.Var(kind_, idx - 1))
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos, self.text)
        raise ExprSyntaxError(f"unexpected {val!r}", pos, self.text)


def parse_expr(text: str, n: int, m: int) -> ex.Expr:
    """Parse ``text`` into an expression over ``n`` base and ``m`` fiber coordinates."""
    return _Parser(text, n, m).parse()
