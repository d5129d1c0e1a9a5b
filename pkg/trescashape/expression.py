"""Arithmetic expressions in x and y for body forces and friction thresholds.

Grammar (lowest to highest precedence)::

    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary | power)*      # a bare product term only after a number: 2pi, 3(x+1)
    unary   := "-" unary | power
    power   := atom ["^" exponent]
    exponent:= ["-"] INTEGER | "(" ["-"] INTEGER ")"
    atom    := NUMBER | "x" | "y" | "pi" | FUNC "(" sum ")" | "(" sum ")"

FUNC is one of sin, cos, exp, sqrt, abs. Evaluation is vectorized over numpy arrays.
"""
import math
import re
from dataclasses import dataclass

import numpy as np
from typing import FrozenSet, List, NamedTuple, Optional, Union

from trescashape.exceptions import DataEvaluationException, ExpressionSyntaxException

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}
VARIABLES = ("x", "y")
CONSTANTS = {"pi": math.pi}

_TOKEN_RE = re.compile(r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Power:
    base: "Expression"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Number, Variable, Constant, Unary, Binary, Power, Call]


class _Token(NamedTuple):
    kind: str  # number, ident, op, end
    text: str
    offset: int  # byte offset in the UTF-8 text


_ATOM_START = frozenset({"number", "x", "y", "pi", "function", "("})


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _byte_offset(self, char_index: int) -> int:
        return len(self.text[:char_index].encode("utf-8"))

    def _tokenize(self, text: str) -> List[_Token]:
        tokens, i = [], 0
        while True:
            while i < len(text) and text[i].isspace():
                i += 1
            if i == len(text):
                tokens.append(_Token("end", "", self._byte_offset(i)))
                return tokens
            m = _TOKEN_RE.match(text, i)
            if m is None or m.end() == i:
                raise ExpressionSyntaxException(
                    f"unexpected character {text[i]!r}", self._byte_offset(i), _ATOM_START | {"-", "+", "*", "/", "^", ")"}, text
                )
            kind = m.lastgroup
            tokens.append(_Token(kind, m.group(kind), self._byte_offset(m.start(kind))))
            i = m.end()

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _error(self, message: str, expected: FrozenSet[str]):
        tok = self.current
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxException(f"{message}, found {found}", tok.offset, expected, self.text)

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.pos += 1
            return True
        return False

    def parse(self) -> Expression:
        expr = self._sum()
        if self.current.kind != "end":
            self._error("unexpected token", frozenset({"+", "-", "*", "/", "^", "end of input"}))
        return expr

    def _sum(self) -> Expression:
        left = self._product()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.current.text
            self.pos += 1
            left = Binary(op, left, self._product())
        return left

    def _product(self) -> Expression:
        left = self._unary()
        while True:
            tok = self.current
            if tok.kind == "op" and tok.text in "*/":
                self.pos += 1
                left = Binary(tok.text, left, self._unary())
            elif isinstance(left, Number) and (tok.kind == "ident" or (tok.kind == "op" and tok.text == "(")):
                left = Binary("*", left, self._power())
            else:
                return left

    def _unary(self) -> Expression:
        if self._accept("-"):
            return Unary("-", self._unary())
        return self._power()

    def _power(self) -> Expression:
        base = self._atom()
        if self._accept("^"):
            return Power(base, self._exponent())
        return base

    def _exponent(self) -> int:
        parenthesized = self._accept("(")
        sign = -1 if self._accept("-") else 1
        tok = self.current
        if tok.kind != "number" or not re.fullmatch(r"\d+", tok.text):
            self._error("exponent must be an integer literal", frozenset({"integer", "-", "("}))
        self.pos += 1
        if parenthesized and not self._accept(")"):
            self._error("unclosed exponent", frozenset({")"}))
        return sign * int(tok.text)

    def _atom(self) -> Expression:
        tok = self.current
        if tok.kind == "number":
            value = float(tok.text)
            if not math.isfinite(value):
                self._error("number out of range", frozenset({"finite number"}))
            self.pos += 1
            return Number(value)
        if tok.kind == "ident":
            self.pos += 1
            if tok.text in VARIABLES:
                return Variable(tok.text)
            if tok.text in CONSTANTS:
                return Constant(tok.text)
            if tok.text in FUNCTIONS:
                if not self._accept("("):
                    self._error(f"function {tok.text} needs an argument", frozenset({"("}))
                arg = self._sum()
                if not self._accept(")"):
                    self._error("unclosed function call", frozenset({")", "+", "-", "*", "/", "^"}))
                return Call(tok.text, arg)
            self.pos -= 1
            self._error(f"unknown identifier {tok.text!r}", frozenset(VARIABLES) | frozenset(CONSTANTS) | frozenset(FUNCTIONS))
        if self._accept("("):
            inner = self._sum()
            if not self._accept(")"):
                self._error("unclosed parenthesis", frozenset({")", "+", "-", "*", "/", "^"}))
            return inner
        self._error("expected an operand", _ATOM_START | {"-"})


def parse_expression(text: str) -> Expression:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


def print_expression(expr: Expression) -> str:
    """Fully parenthesized text that parses back to the same tree."""
    if isinstance(expr, Number):
        return repr(float(expr.value))
    if isinstance(expr, (Variable, Constant)):
        return expr.name
    if isinstance(expr, Unary):
        return f"({expr.op}{print_expression(expr.operand)})"
    if isinstance(expr, Binary):
        return f"({print_expression(expr.left)} {expr.op} {print_expression(expr.right)})"
    if isinstance(expr, Power):
        exponent = str(expr.exponent) if expr.exponent >= 0 else f"({expr.exponent})"
        return f"({print_expression(expr.base)}^{exponent})"
    if isinstance(expr, Call):
        return f"{expr.func}({print_expression(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


def evaluate(expr: Expression, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    with np.errstate(over="ignore", invalid="ignore"):
        return np.broadcast_to(_eval(expr, x, y), shape).astype(float)


def _eval(expr: Expression, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if isinstance(expr, Number):
        return np.asarray(expr.value)
    if isinstance(expr, Variable):
        return x if expr.name == "x" else y
    if isinstance(expr, Constant):
        return np.asarray(CONSTANTS[expr.name])
    if isinstance(expr, Unary):
        return -_eval(expr.operand, x, y)
    if isinstance(expr, Binary):
        a, b = _eval(expr.left, x, y), _eval(expr.right, x, y)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if np.any(b == 0):
            raise DataEvaluationException(f"division by zero in {print_expression(expr)}")
        return a / b
    if isinstance(expr, Power):
        base = _eval(expr.base, x, y)
        if expr.exponent < 0 and np.any(base == 0):
            raise DataEvaluationException(f"division by zero in {print_expression(expr)}")
        return np.power(base.astype(float), expr.exponent)
    if isinstance(expr, Call):
        arg = _eval(expr.arg, x, y)
        if expr.func == "sqrt" and np.any(arg < 0):
            raise DataEvaluationException(f"square root of a negative number in {print_expression(expr)}")
        return FUNCTIONS[expr.func](arg)
    raise TypeError(f"not an expression node: {expr!r}")


def _window(x: np.ndarray, y: np.ndarray, radius: Optional[float]):
    """Project points outside the window circle radially onto it."""
    if radius is None:
        return x, y
    r = np.hypot(x, y)
    scale = np.where(r > radius, radius / np.where(r > 0, r, 1.0), 1.0)
    return x * scale, y * scale


class ExpressionScalarField:
    """Callable g(x, y) built from expression text."""

    def __init__(self, text: str, window_radius: Optional[float] = None):
        self.text = text
        self.expr = parse_expression(text)
        self.window_radius = window_radius

    def __call__(self, x, y) -> np.ndarray:
        x, y = _window(np.asarray(x, dtype=float), np.asarray(y, dtype=float), self.window_radius)
        return evaluate(self.expr, x, y)

    def __repr__(self):
        return f"ExpressionScalarField({self.text!r})"


class ExpressionVectorField:
    """Callable f(x, y) -> (..., 2) built from two expression texts."""

    def __init__(self, text_x: str, text_y: str, window_radius: Optional[float] = None):
        self.components = (ExpressionScalarField(text_x, window_radius), ExpressionScalarField(text_y, window_radius))

    def __call__(self, x, y) -> np.ndarray:
        return np.stack([c(x, y) for c in self.components], axis=-1)

    def __repr__(self):
        return f"ExpressionVectorField({self.components[0].text!r}, {self.components[1].text!r})"
