"""Exact evaluation of coefficient expressions.

Grammar (no exponentiation on purpose)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | atom
    atom   := NUMBER | NAME | '(' expr ')'

Numbers are integer or decimal literals (``3``, ``0.25``, ``1e-3``); all
arithmetic is carried out in :class:`fractions.Fraction`.
"""

import re
from fractions import Fraction

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/()^]))"
)


class ExpressionError(ValueError):
    """Raised for malformed expressions; ``position`` is a 0-based column."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, params):
        self.tokens = _tokenize(text)
        self.i = 0
        self.params = params

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        value = self.expr()
        kind, val, pos = self.peek()
        if kind == "op" and val in ("^", "**"):
            raise ExpressionError("exponentiation is not supported; write products", pos)
        if kind != "end":
            raise ExpressionError(f"unexpected token {val!r}", pos)
        return value

    def expr(self):
        value = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs == 0:
                    raise ExpressionError("division by zero", pos)
                value = value / rhs
        return value

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if val == "+" else -inner
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Fraction(val)
        if kind == "name":
            if val not in self.params:
                raise ExpressionError(f"unknown parameter {val!r}", pos)
            return Fraction(self.params[val])
        if kind == "op" and val == "(":
            value = self.expr()
            kind2, val2, pos2 = self.take()
            if not (kind2 == "op" and val2 == ")"):
                raise ExpressionError("expected ')'", pos2)
            return value
        if kind == "op" and val in ("^", "**"):
            raise ExpressionError("exponentiation is not supported; write products", pos)
        if kind == "end":
            raise ExpressionError("unexpected end of expression", pos)
        raise ExpressionError(f"unexpected token {val!r}", pos)


def parse_coefficient_expression(text, params=None):
    """Evaluate ``text`` exactly, substituting ``params`` (name -> rational)."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ExpressionError(f"expected a string, got {type(text).__name__}", 0)
    params = {k: Fraction(v) if not isinstance(v, Fraction) else v
              for k, v in (params or {}).items()}
    return _Parser(text, params).parse()
