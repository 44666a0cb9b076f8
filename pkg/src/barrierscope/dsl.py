"""Parser for the potential definition text format.

The format is line oriented.  A source is either a single builtin
invocation, e.g.

    parabola height=10 width=2

or a list of piecewise clauses with optional exterior levels:

    left = 0
    right = 0
    on [0,1): 5
    on [1,2): 10*(x-1)^2

Clause expressions support + - * / ^, parentheses, decimal literals with
optional exponent, the position variable ``x`` and the function whitelist
sin, cos, exp, sqrt, abs.  ``#`` starts a comment.  Deliberately tiny so the
whole grammar stays auditable.
"""

import math
import re

import numpy as np

from .errors import PotentialParseError

FUNCTIONS = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "exp": (math.exp, np.exp),
    "sqrt": (math.sqrt, np.sqrt),
    "abs": (abs, np.abs),
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()\[\),:=]))"
)


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize_line(text, line_no):
    text = text.split("#", 1)[0]
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise PotentialParseError(
                f"unexpected character {rest[0]!r}", line_no, pos + 1 + (len(text[pos:]) - len(rest))
            )
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), line_no, m.start(kind) + 1))
        pos = m.end()
    return tokens


class _ExprParser:
    """Recursive descent over a token list; produces tuple-based trees."""

    def __init__(self, tokens, line_no):
        self.tokens = tokens
        self.line = line_no
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def fail(self, message, tok=None):
        col = tok.column if tok is not None else (self.tokens[-1].column + len(self.tokens[-1].text) if self.tokens else 1)
        raise PotentialParseError(message, self.line, col)

    def expect_op(self, op):
        tok = self.next()
        if tok is None or tok.kind != "op" or tok.text != op:
            self.fail(f"expected {op!r}" + (f", found {tok.text!r}" if tok else ""), tok)
        return tok

    def parse_expr(self):
        node = self.parse_term()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "op" and tok.text in "+-":
                self.next()
                node = (tok.text, node, self.parse_term())
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "op" and tok.text in "*/":
                self.next()
                node = (tok.text, node, self.parse_factor())
            else:
                return node

    def parse_factor(self):
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "-":
            self.next()
            return ("neg", self.parse_factor())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "^":
            self.next()
            return ("^", base, self.parse_factor())  # right associative
        return base

    def parse_atom(self):
        tok = self.next()
        if tok is None:
            self.fail("unexpected end of expression")
        if tok.kind == "number":
            return ("num", float(tok.text))
        if tok.kind == "ident":
            if tok.text == "x":
                return ("x",)
            if tok.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return ("fn", tok.text, arg)
            self.fail(f"unknown name {tok.text!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        self.fail(f"unexpected token {tok.text!r}", tok)


def parse_expression(text, line_no=1):
    """Parse a standalone arithmetic expression in x; returns the tree."""
    parser = _ExprParser(_tokenize_line(text, line_no), line_no)
    tree = parser.parse_expr()
    extra = parser.peek()
    if extra is not None:
        parser.fail(f"unexpected token {extra.text!r} after expression", extra)
    return tree


def eval_tree(tree, x):
    """Evaluate a tree at scalar x or an ndarray of x values."""
    op = tree[0]
    if op == "num":
        return tree[1]
    if op == "x":
        return x
    if op == "neg":
        return -eval_tree(tree[1], x)
    if op == "fn":
        fn = FUNCTIONS[tree[1]][1 if isinstance(x, np.ndarray) else 0]
        return fn(eval_tree(tree[2], x))
    a = eval_tree(tree[1], x)
    b = eval_tree(tree[2], x)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "^":
        return a**b
    raise AssertionError(f"bad tree node {op!r}")


def _signed_number(parser):
    tok = parser.peek()
    sign = 1.0
    if tok is not None and tok.kind == "op" and tok.text == "-":
        parser.next()
        sign = -1.0
        tok = parser.peek()
    if tok is None or tok.kind != "number":
        parser.fail("expected a number", tok)
    parser.next()
    return sign * float(tok.text)


def parse_source(text):
    """Parse full potential source text.

    Returns either ``("builtin", name, params, line)`` or
    ``("clauses", left, right, clauses)`` where each clause is
    ``(a, b, tree, expr_text, line)``.  Validation of coverage and
    finiteness happens at the Potential level, not here.
    """
    left = None
    right = None
    clauses = []
    builtin = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, line_no)
        if not tokens:
            continue
        head = tokens[0]
        parser = _ExprParser(tokens, line_no)
        if head.kind == "ident" and head.text == "on":
            parser.next()
            parser.expect_op("[")
            a = _signed_number(parser)
            parser.expect_op(",")
            b = _signed_number(parser)
            parser.expect_op(")")
            colon = parser.expect_op(":")
            tree = parser.parse_expr()
            extra = parser.peek()
            if extra is not None:
                parser.fail(f"unexpected token {extra.text!r} after expression", extra)
            expr_text = raw.split("#", 1)[0][colon.column:].strip()
            clauses.append((a, b, tree, expr_text, line_no))
        elif head.kind == "ident" and head.text in ("left", "right"):
            parser.next()
            parser.expect_op("=")
            value = _signed_number(parser)
            if parser.peek() is not None:
                parser.fail("unexpected trailing tokens", parser.peek())
            if head.text == "left":
                if left is not None:
                    raise PotentialParseError("duplicate 'left' line", line_no, head.column)
                left = value
            else:
                if right is not None:
                    raise PotentialParseError("duplicate 'right' line", line_no, head.column)
                right = value
        elif head.kind == "ident":
            name = head.text
            parser.next()
            params = {}
            while parser.peek() is not None:
                key = parser.next()
                if key.kind != "ident":
                    parser.fail(f"expected parameter name, found {key.text!r}", key)
                parser.expect_op("=")
                params[key.text] = _signed_number(parser)
            if builtin is not None:
                raise PotentialParseError("multiple builtin lines", line_no, head.column)
            builtin = (name, params, line_no)
        else:
            raise PotentialParseError(f"unexpected token {head.text!r}", line_no, head.column)

    if builtin is not None:
        if clauses or left is not None or right is not None:
            raise PotentialParseError(
                "a builtin invocation cannot be mixed with other lines", builtin[2], 1
            )
        return ("builtin", builtin[0], builtin[1], builtin[2])
    if not clauses:
        raise PotentialParseError("no potential defined (no 'on' clauses found)")
    return ("clauses", left, right, clauses)
