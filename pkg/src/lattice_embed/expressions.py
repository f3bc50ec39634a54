"""Tiny expression language for user-supplied parametric charts.

Grammar: ``+ - * / ^`` with usual precedence, parentheses, the functions
``sin``, ``cos``, ``exp``, numeric literals, the constant ``pi``, and the
chart variables ``u1 .. ud``.  Expressions evaluate vectorized over numpy
arrays and differentiate symbolically, which gives parametric charts an
analytic Jacobian without pulling in a CAS.

Exponents must be numeric constants (polynomial/trigonometric charts only);
that keeps differentiation closed under the grammar.
"""
from __future__ import annotations

import math
import re
from typing import Callable

import numpy as np

from .errors import ExpressionError

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


class Expr:
    def evaluate(self, env):
        raise NotImplementedError

    def derivative(self, name: str) -> "Expr":
        raise NotImplementedError


class Const(Expr):
    def __init__(self, value: float):
        self.value = float(value)

    def evaluate(self, env):
        return self.value

    def derivative(self, name):
        return Const(0.0)

    def __repr__(self):
        return repr(self.value)


class Var(Expr):
    def __init__(self, name: str):
        self.name = name

    def evaluate(self, env):
        return env[self.name]

    def derivative(self, name):
        return Const(1.0 if name == self.name else 0.0)

    def __repr__(self):
        return self.name


class Call(Expr):
    def __init__(self, fname: str, arg: Expr):
        self.fname = fname
        self.arg = arg

    def evaluate(self, env):
        return _FUNCTIONS[self.fname](self.arg.evaluate(env))

    def derivative(self, name):
        inner = self.arg.derivative(name)
        if self.fname == "sin":
            outer: Expr = Call("cos", self.arg)
        elif self.fname == "cos":
            outer = _neg(Call("sin", self.arg))
        else:  # exp
            outer = Call("exp", self.arg)
        return _mul(outer, inner)

    def __repr__(self):
        return f"{self.fname}({self.arg!r})"


class Binary(Expr):
    op = "?"

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


class Add(Binary):
    op = "+"

    def evaluate(self, env):
        return self.left.evaluate(env) + self.right.evaluate(env)

    def derivative(self, name):
        return _add(self.left.derivative(name), self.right.derivative(name))


class Sub(Binary):
    op = "-"

    def evaluate(self, env):
        return self.left.evaluate(env) - self.right.evaluate(env)

    def derivative(self, name):
        return _sub(self.left.derivative(name), self.right.derivative(name))


class Mul(Binary):
    op = "*"

    def evaluate(self, env):
        return self.left.evaluate(env) * self.right.evaluate(env)

    def derivative(self, name):
        return _add(
            _mul(self.left.derivative(name), self.right),
            _mul(self.left, self.right.derivative(name)),
        )


class Div(Binary):
    op = "/"

    def evaluate(self, env):
        return self.left.evaluate(env) / self.right.evaluate(env)

    def derivative(self, name):
        num = _sub(
            _mul(self.left.derivative(name), self.right),
            _mul(self.left, self.right.derivative(name)),
        )
        return Div(num, Mul(self.right, self.right))


class Pow(Expr):
    def __init__(self, base: Expr, exponent: float):
        self.base = base
        self.exponent = float(exponent)

    def evaluate(self, env):
        return self.base.evaluate(env) ** self.exponent

    def derivative(self, name):
        e = self.exponent
        if e == 0.0:
            return Const(0.0)
        return _mul(
            _mul(Const(e), Pow(self.base, e - 1.0)), self.base.derivative(name)
        )

    def __repr__(self):
        return f"({self.base!r} ^ {self.exponent!r})"


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0.0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1.0


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def _sub(a, b):
    if _is_zero(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return Const(0.0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    return _sub(Const(0.0), a)


class _Parser:
    def __init__(self, text: str, variables: set[str]):
        self.text = text
        self.variables = variables
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise ExpressionError(
                    f"unexpected character {text[pos]!r} in expression {text!r}"
                )
            if m.group("num") is not None:
                tokens.append(("num", float(m.group(0))))
            elif m.group("name") is not None:
                tokens.append(("name", m.group("name")))
            else:
                tokens.append(("op", m.group("op")))
            pos = m.end()
        return tokens

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def _next(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _expect(self, op):
        kind, val = self._next()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r} in expression {self.text!r}")

    def parse(self) -> Expr:
        expr = self._expr()
        if self.pos != len(self.tokens):
            raise ExpressionError(f"trailing tokens in expression {self.text!r}")
        return expr

    def _expr(self):
        node = self._term()
        while self._peek() == ("op", "+") or self._peek() == ("op", "-"):
            _, op = self._next()
            rhs = self._term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def _term(self):
        node = self._unary()
        while self._peek() == ("op", "*") or self._peek() == ("op", "/"):
            _, op = self._next()
            rhs = self._unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def _unary(self):
        if self._peek() == ("op", "-"):
            self._next()
            return _neg(self._unary())
        if self._peek() == ("op", "+"):
            self._next()
            return self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        if self._peek() == ("op", "^"):
            self._next()
            exponent = self._constant_exponent()
            return Pow(base, exponent)
        return base

    def _constant_exponent(self) -> float:
        # sign then literal; symbolic exponents are out of the grammar
        sign = 1.0
        while self._peek() in (("op", "-"), ("op", "+")):
            _, op = self._next()
            if op == "-":
                sign = -sign
        kind, val = self._next()
        if kind != "num":
            raise ExpressionError(
                f"exponent must be a numeric constant in {self.text!r}"
            )
        return sign * val

    def _atom(self):
        kind, val = self._next()
        if kind == "num":
            return Const(val)
        if kind == "name":
            if val in _FUNCTIONS:
                self._expect("(")
                arg = self._expr()
                self._expect(")")
                return Call(val, arg)
            if val == "pi":
                return Const(math.pi)
            if val in self.variables:
                return Var(val)
            raise ExpressionError(f"unknown identifier {val!r} in {self.text!r}")
        if (kind, val) == ("op", "("):
            node = self._expr()
            self._expect(")")
            return node
        raise ExpressionError(f"malformed expression {self.text!r}")


def parse_expression(text: str, intrinsic_dim: int) -> Expr:
    """Parse one chart component over variables u1..u<d>."""
    variables = {f"u{k + 1}" for k in range(intrinsic_dim)}
    return _Parser(text, variables).parse()


def compile_chart(
    expressions: list[str], intrinsic_dim: int
) -> tuple[Callable, Callable]:
    """Build vectorized chart and analytic Jacobian callables.

    The chart maps arrays of shape (..., d) to (..., n); the Jacobian maps a
    single parameter point (d,) to the (n, d) matrix of partials.
    """
    trees = [parse_expression(text, intrinsic_dim) for text in expressions]
    names = [f"u{k + 1}" for k in range(intrinsic_dim)]
    partials = [[t.derivative(name) for name in names] for t in trees]

    def chart(u):
        u = np.asarray(u, dtype=float)
        env = {name: u[..., k] for k, name in enumerate(names)}
        base = np.zeros(u.shape[:-1])
        out = [np.asarray(t.evaluate(env), dtype=float) + base for t in trees]
        return np.stack(out, axis=-1)

    def jacobian(u):
        u = np.asarray(u, dtype=float)
        env = {name: u[..., k] for k, name in enumerate(names)}
        rows = [[float(p.evaluate(env)) for p in row] for row in partials]
        return np.array(rows, dtype=float)

    return chart, jacobian
