"""
Expression Language for Form Families
A small language for functions C^d -> C:

    literals      1.5   2e-3   3i   i
    variables     x1 ... xd
    functions     conj(e)  abs(e)  re(e)  im(e)
                  abspow(e, s)    |e|^s, 0 at e = 0 for s > 0, 1 for s = 0, error for s < 0
                  abspow0(e, s)   |e|^s with value 0 at e = 0 for every s
                  phase(theta)    e^{i theta}
    operators     + - * /  and parentheses

s and theta are signed real literals. Parsing is a Pratt (top-down operator
precedence) parser; to_text() prints a fully parenthesised canonical form that
parses back to an expression with the same canonical text.
"""

import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import ExpressionError, ParseError


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written


@dataclass(frozen=True)
class Unary:
    op: str  # neg, conj, abs, re, im
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class AbsPow:
    arg: "Expr"
    exponent: float
    vanish_at_zero: bool = False


@dataclass(frozen=True)
class Phase:
    theta: float


Expr = Union[Literal, Var, Unary, Binary, AbsPow, Phase]

UNARY_FUNCTIONS = ("conj", "abs", "re", "im")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # number, name, op, end
    text: str
    position: int


_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?:i(?![A-Za-z0-9_]))?"
token_pat = re.compile(rf"\s*(?:(?P<number>{_NUMBER})|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/(),]))")


def tokenize(text: str) -> Iterator[Token]:
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            yield Token("end", "", pos)
            return
        match = token_pat.match(text, pos)
        if match is None or match.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = match.lastgroup
        start = match.start(kind)
        yield Token(kind, match.group(kind), start)
        pos = match.end()


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

# left binding powers
BINDING = {"+": 10, "-": 10, "*": 20, "/": 20}
PREFIX_BINDING = 30


class Parser:
    """Pratt parser over the token stream; d bounds the variable indices."""

    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.tokens = list(tokenize(text))
        self.pos = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "end":
            self.pos += 1
        return t

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.token
        return ParseError(message, token.position, self.text)

    def expect(self, text: str) -> Token:
        if self.token.text != text or self.token.kind != "op":
            found = self.token.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Expr:
        expr = self.expression()
        if self.token.kind != "end":
            raise self.error(f"unexpected {self.token.text!r}")
        return expr

    def expression(self, rbp: int = 0) -> Expr:
        left = self.nud(self.advance())
        while self.token.kind == "op" and rbp < BINDING.get(self.token.text, 0):
            op = self.advance().text
            left = Binary(op, left, self.expression(BINDING[op]))
        return left

    def nud(self, t: Token) -> Expr:
        if t.kind == "number":
            return Literal(_number_value(t, self.text))
        if t.kind == "op":
            if t.text == "(":
                inner = self.expression()
                self.expect(")")
                return inner
            if t.text == "-":
                return Unary("neg", self.expression(PREFIX_BINDING))
            if t.text == "+":
                return self.expression(PREFIX_BINDING)
            raise self.error(f"unexpected {t.text!r}", t)
        if t.kind == "name":
            return self.name(t)
        raise self.error("unexpected end of input", t)

    def name(self, t: Token) -> Expr:
        var = re.fullmatch(r"x(\d+)", t.text)
        if var:
            k = int(var.group(1))
            if k < 1 or k > self.d:
                raise self.error(f"variable {t.text} out of range for d={self.d}", t)
            return Var(k)
        if t.text == "i":
            return Literal(1j)
        if t.text in UNARY_FUNCTIONS:
            self.expect("(")
            arg = self.expression()
            self.expect(")")
            return Unary(t.text, arg)
        if t.text in ("abspow", "abspow0"):
            self.expect("(")
            arg = self.expression()
            self.expect(",")
            s = self.signed_real()
            self.expect(")")
            return AbsPow(arg, s, vanish_at_zero=t.text == "abspow0")
        if t.text == "phase":
            self.expect("(")
            theta = self.signed_real()
            self.expect(")")
            return Phase(theta)
        raise self.error(f"unknown name {t.text!r}", t)

    def signed_real(self) -> float:
        sign = 1.0
        while self.token.kind == "op" and self.token.text in "+-":
            if self.advance().text == "-":
                sign = -sign
        t = self.advance()
        if t.kind != "number" or t.text.endswith("i"):
            raise self.error("expected a real number", t)
        return sign * _number_value(t, self.text).real


def _number_value(t: Token, text: str) -> complex:
    imaginary = t.text.endswith("i")
    value = float(t.text[:-1] if imaginary else t.text)
    if not np.isfinite(value):
        raise ParseError(f"literal {t.text} is not finite", t.position, text)
    return complex(0.0, value) if imaginary else complex(value, 0.0)


def parse_expr(text: str, d: int) -> Expr:
    """
    Parse one expression over variables x1..xd

    Raises:
        ParseError: syntax error or variable out of range, with the character position
    """
    if d < 1:
        raise ParseError("arity d must be at least 1", 0, text)
    return Parser(text, d).parse()


# ---------------------------------------------------------------------------
# Canonical printer
# ---------------------------------------------------------------------------

def _real_text(x: float) -> str:
    return repr(float(x))


def _literal_text(c: complex) -> str:
    re_, im_ = c.real, c.imag
    if im_ == 0.0:
        return _real_text(re_) if re_ >= 0 else f"(-{_real_text(-re_)})"
    if re_ == 0.0:
        return f"{_real_text(im_)}i" if im_ > 0 else f"(-{_real_text(-im_)}i)"
    sign = "+" if im_ > 0 else "-"
    return f"({_real_text(re_)} {sign} {_real_text(abs(im_))}i)"


def to_text(expr: Expr) -> str:
    """Fully parenthesised canonical text"""
    if isinstance(expr, Literal):
        return _literal_text(expr.value)
    if isinstance(expr, Var):
        return f"x{expr.index}"
    if isinstance(expr, Unary):
        if expr.op == "neg":
            return f"(-{to_text(expr.arg)})"
        return f"{expr.op}({to_text(expr.arg)})"
    if isinstance(expr, Binary):
        return f"({to_text(expr.left)} {expr.op} {to_text(expr.right)})"
    if isinstance(expr, AbsPow):
        name = "abspow0" if expr.vanish_at_zero else "abspow"
        return f"{name}({to_text(expr.arg)}, {_real_text(expr.exponent)})"
    if isinstance(expr, Phase):
        return f"phase({_real_text(expr.theta)})"
    raise TypeError(f"not an expression: {expr!r}")


def max_variable(expr: Expr) -> int:
    """Largest variable index used (0 for constant expressions)"""
    if isinstance(expr, Var):
        return expr.index
    if isinstance(expr, Unary):
        return max_variable(expr.arg)
    if isinstance(expr, AbsPow):
        return max_variable(expr.arg)
    if isinstance(expr, Binary):
        return max(max_variable(expr.left), max_variable(expr.right))
    return 0


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _eval(expr: Expr, X: np.ndarray, invalid: np.ndarray, reasons: List[str]) -> np.ndarray:
    k = X.shape[1]
    if isinstance(expr, Literal):
        return np.full(k, expr.value, dtype=complex)
    if isinstance(expr, Var):
        return X[expr.index - 1]
    if isinstance(expr, Phase):
        return np.full(k, np.exp(1j * expr.theta), dtype=complex)
    if isinstance(expr, Unary):
        v = _eval(expr.arg, X, invalid, reasons)
        if expr.op == "neg":
            return -v
        if expr.op == "conj":
            return np.conj(v)
        if expr.op == "abs":
            return np.abs(v) + 0j
        if expr.op == "re":
            return v.real + 0j
        return v.imag + 0j
    if isinstance(expr, Binary):
        a = _eval(expr.left, X, invalid, reasons)
        b = _eval(expr.right, X, invalid, reasons)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        zero = b == 0
        if zero.any():
            invalid |= zero
            reasons.append("division by zero")
        return a / np.where(zero, 1.0, b)
    if isinstance(expr, AbsPow):
        mag = np.abs(_eval(expr.arg, X, invalid, reasons))
        at_zero = mag == 0
        s = expr.exponent
        out = np.power(np.where(at_zero, 1.0, mag), s) + 0j
        if expr.vanish_at_zero or s > 0:
            out[at_zero] = 0.0
        elif s < 0 and at_zero.any():
            invalid |= at_zero
            reasons.append(f"abspow with exponent {s} at zero")
        return out
    raise TypeError(f"not an expression: {expr!r}")


def eval_batch(expr: Expr, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate at many points at once

    Args:
        expr: parsed expression
        X: complex array of shape (d, k), one column per point

    Returns:
        Tuple of (values shape (k,), valid mask shape (k,)); invalid entries hold 0
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if max_variable(expr) > X.shape[0]:
        raise ExpressionError(f"expression uses x{max_variable(expr)} but points have {X.shape[0]} coordinates")
    invalid = np.zeros(X.shape[1], dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.array(_eval(expr, X, invalid, []), dtype=complex)
    invalid |= ~np.isfinite(values)
    values[invalid] = 0.0
    return values, ~invalid


def eval_expr(expr: Expr, x: Sequence[complex]) -> complex:
    """
    Evaluate at one point

    Raises:
        ExpressionError: zero denominator, singular abspow, or a non-finite value
    """
    X = np.asarray(x, dtype=complex).reshape(-1, 1)
    invalid = np.zeros(1, dtype=bool)
    reasons: List[str] = []
    if max_variable(expr) > X.shape[0]:
        raise ExpressionError(f"expression uses x{max_variable(expr)} but the point has {X.shape[0]} coordinates")
    with np.errstate(over="ignore", invalid="ignore"):
        value = complex(_eval(expr, X, invalid, reasons)[0])
    if invalid[0]:
        raise ExpressionError(f"{reasons[0] if reasons else 'invalid value'} at {to_text(expr)}")
    if not np.isfinite(value):
        raise ExpressionError(f"non-finite value at {to_text(expr)}")
    return value
