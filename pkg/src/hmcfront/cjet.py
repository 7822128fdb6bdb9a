"""Order-3 complex jets and the holomorphic expression language.

A :class:`ComplexJet` carries a value and its first three complex
derivatives.  Jets may hold numpy arrays, in which case every operation is
applied elementwise; this is how grids are evaluated in one pass.

Grammar (whitespace insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?            # right associative
    atom    := NUMBER ["i"] | "z" | "i" | "pi"
             | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := "exp" | "log" | "sqrt" | "sin" | "cos"

All multivalued functions use the principal branch.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ComplexJet",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "JetDomainError",
    "Expr",
    "Num",
    "Var",
    "Const",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "parse_expr",
    "to_source",
    "eval_jet",
    "eval_jet_array",
    "reparam_in_h",
    "compose",
    "schwarzian",
]

FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos")
CONSTANTS = {"i": 1j, "pi": complex(math.pi)}


class ExprError(ValueError):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at byte offset {offset}")
        self.name = name
        self.offset = offset


class JetDomainError(ArithmeticError):
    """Evaluation hit a pole or branch point."""


# ---------------------------------------------------------------------------
# jets


Scalar = Union[complex, np.ndarray]


@dataclass(frozen=True)
class ComplexJet:
    """Value and first three derivatives of a holomorphic function."""

    c0: Scalar
    c1: Scalar = 0j
    c2: Scalar = 0j
    c3: Scalar = 0j

    @classmethod
    def constant(cls, value) -> "ComplexJet":
        zero = np.zeros_like(value, dtype=complex) if np.ndim(value) else 0j
        return cls(value, zero, zero, zero)

    @classmethod
    def variable(cls, z) -> "ComplexJet":
        z = as_complex_array(z) if np.ndim(z) else complex(z)
        one = np.ones_like(z) if np.ndim(z) else 1 + 0j
        zero = np.zeros_like(z) if np.ndim(z) else 0j
        return cls(z, one, zero, zero)

    def as_tuple(self) -> tuple:
        return (self.c0, self.c1, self.c2, self.c3)

    def is_constant(self) -> bool:
        return all(np.all(c == 0) for c in (self.c1, self.c2, self.c3))

    def _lift(self, other) -> "ComplexJet":
        if isinstance(other, ComplexJet):
            return other
        return ComplexJet.constant(other)

    def __neg__(self) -> "ComplexJet":
        return ComplexJet(-self.c0, -self.c1, -self.c2, -self.c3)

    def __add__(self, other) -> "ComplexJet":
        o = self._lift(other)
        return ComplexJet(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2, self.c3 + o.c3)

    __radd__ = __add__

    def __sub__(self, other) -> "ComplexJet":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "ComplexJet":
        return self._lift(other) - self

    def __mul__(self, other) -> "ComplexJet":
        o = self._lift(other)
        u0, u1, u2, u3 = self.as_tuple()
        v0, v1, v2, v3 = o.as_tuple()
        return ComplexJet(
            u0 * v0,
            u1 * v0 + u0 * v1,
            u2 * v0 + 2 * u1 * v1 + u0 * v2,
            u3 * v0 + 3 * u2 * v1 + 3 * u1 * v2 + u0 * v3,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ComplexJet":
        return self * reciprocal(self._lift(other))

    def __rtruediv__(self, other) -> "ComplexJet":
        return self._lift(other) * reciprocal(self)

    def __pow__(self, other) -> "ComplexJet":
        return power(self, self._lift(other))


def compose(outer: tuple, inner: ComplexJet) -> ComplexJet:
    """Chain rule to order 3: ``outer`` holds (f, f', f'', f''') at inner.c0."""
    f0, f1, f2, f3 = outer
    g1, g2, g3 = inner.c1, inner.c2, inner.c3
    return ComplexJet(
        f0,
        f1 * g1,
        f2 * g1 * g1 + f1 * g2,
        f3 * g1 ** 3 + 3 * f2 * g1 * g2 + f1 * g3,
    )


def reciprocal(u: ComplexJet) -> ComplexJet:
    x = u.c0
    r = 1 / x
    return compose((r, -r * r, 2 * r ** 3, -6 * r ** 4), u)


def exp(u: ComplexJet) -> ComplexJet:
    e = np.exp(u.c0)
    return compose((e, e, e, e), u)


def log(u: ComplexJet) -> ComplexJet:
    x = u.c0
    r = 1 / x
    return compose((np.log(x), r, -r * r, 2 * r ** 3), u)


def sqrt(u: ComplexJet) -> ComplexJet:
    x = u.c0
    s = np.sqrt(x)
    return compose((s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)), u)


def sin(u: ComplexJet) -> ComplexJet:
    s, c = np.sin(u.c0), np.cos(u.c0)
    return compose((s, c, -s, -c), u)


def cos(u: ComplexJet) -> ComplexJet:
    s, c = np.sin(u.c0), np.cos(u.c0)
    return compose((c, -s, -c, s), u)


def as_complex_array(z) -> np.ndarray:
    """``z`` as a complex array, keeping clongdouble when given."""
    z = np.asarray(z)
    return z if z.dtype == np.clongdouble else z.astype(complex)


def _const_power(u: ComplexJet, p: complex) -> ComplexJet:
    if p.imag == 0 and p.real == int(p.real) and 0 <= p.real <= 64:
        n = int(p.real)
        result = ComplexJet.constant(np.ones_like(u.c0) if np.ndim(u.c0) else 1 + 0j)
        for _ in range(n):
            result = result * u
        return result
    x = u.c0
    xp = np.power(x, p)
    return compose(
        (xp, p * xp / x, p * (p - 1) * xp / x ** 2, p * (p - 1) * (p - 2) * xp / x ** 3),
        u,
    )


def power(u: ComplexJet, w: ComplexJet) -> ComplexJet:
    if w.is_constant() and np.ndim(w.c0) == 0:
        return _const_power(u, complex(w.c0))
    return exp(w * log(u))


_UNARY = {"exp": exp, "log": log, "sqrt": sqrt, "sin": sin, "cos": cos}


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base class of expression nodes."""

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: complex


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", _offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _offset(source, pos)))
        pos = m.end()
    tokens.append(("end", "", _offset(source, len(source))))
    return tokens


def _offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.advance()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", offset)

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {value!r}", offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, value, offset = self.advance()
        if kind == "num":
            if value.endswith("i"):
                return Num(complex(0, float(value[:-1])))
            return Num(complex(float(value)))
        if kind == "name":
            if value == "z":
                return Var()
            if value in CONSTANTS:
                return Const(value)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise UnknownIdentifierError(value, offset)
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", offset)


def parse_expr(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def _fmt_real(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") and "e" not in s else s


def to_source(e: Expr) -> str:
    """Print ``e`` with the fewest parentheses that reparse to the same tree.

    Literals print exactly only when purely real or purely imaginary and
    nonnegative; other values are written as a parenthesized sum.
    """
    if isinstance(e, Num):
        v = complex(e.value)
        if v.imag == 0 and v.real >= 0 and not math.copysign(1, v.real) < 0:
            return _fmt_real(v.real)
        if v.real == 0 and v.imag >= 0:
            return _fmt_real(v.imag) + "i"
        sign = "+" if v.imag >= 0 else "-"
        return f"({_fmt_real(v.real)}{sign}{_fmt_real(abs(v.imag))}i)"
    if isinstance(e, Var):
        return "z"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        if _prec(e.arg) < _prec(e):
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) <= _prec(e):
            base = f"({base})"
        exponent = to_source(e.exponent)
        if _prec(e.exponent) < _PREC[Neg]:
            exponent = f"({exponent})"
        return f"{base}^{exponent}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _prec(e)
    left = to_source(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_source(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {op} {right}"


# ---------------------------------------------------------------------------
# evaluation


def _eval(e: Expr, z) -> ComplexJet:
    if isinstance(e, Var):
        return ComplexJet.variable(z)
    if isinstance(e, Num):
        return _constant_like(e.value, z)
    if isinstance(e, Const):
        return _constant_like(CONSTANTS[e.name], z)
    if isinstance(e, Neg):
        return -_eval(e.arg, z)
    if isinstance(e, Call):
        return _UNARY[e.func](_eval(e.arg, z))
    if isinstance(e, Pow):
        base = _eval(e.base, z)
        exponent = _eval(e.exponent, z)
        if exponent.is_constant():
            flat = np.ravel(exponent.c0)
            if flat.size and np.all(flat == flat[0]):
                return _const_power(base, complex(flat[0]))
        return exp(exponent * log(base))
    left, right = _eval(e.left, z), _eval(e.right, z)
    if isinstance(e, Add):
        return left + right
    if isinstance(e, Sub):
        return left - right
    if isinstance(e, Mul):
        return left * right
    if isinstance(e, Div):
        return left / right
    raise TypeError(f"not an expression node: {e!r}")


def _constant_like(value: complex, z) -> ComplexJet:
    if np.ndim(z):
        return ComplexJet.constant(np.full(np.shape(z), value, dtype=np.result_type(z, complex)))
    return ComplexJet.constant(complex(value))


def eval_jet_array(e: Expr, z) -> ComplexJet:
    """Evaluate over an array of points; poles show up as inf/nan entries.

    Extended-precision (clongdouble) input is evaluated in that precision.
    """
    z = as_complex_array(z)
    with np.errstate(all="ignore"):
        return _eval(e, z)


def eval_jet(e: Expr, z: complex) -> ComplexJet:
    """Jet of ``e`` at the single point ``z``.

    Raises :class:`JetDomainError` at poles and branch points.
    """
    z = complex(z)
    try:
        with np.errstate(all="raise", under="ignore"):
            jet = _eval(e, np.complex128(z))
    except (ZeroDivisionError, FloatingPointError) as exc:
        raise JetDomainError(f"{to_source(e)} is singular at z={z}: {exc}") from None
    values = tuple(complex(c) for c in jet.as_tuple())
    if not all(np.isfinite(v) for v in values):
        raise JetDomainError(f"{to_source(e)} is singular at z={z}")
    return ComplexJet(*values)


def reparam_in_h(Gz: ComplexJet, hz: ComplexJet) -> ComplexJet:
    """Convert z-derivatives of G into derivatives with respect to h."""
    h1, h2, h3 = hz.c1, hz.c2, hz.c3
    if np.ndim(h1) == 0 and h1 == 0:
        raise JetDomainError("dh/dz vanishes; h is critical here")
    g1 = Gz.c1 / h1
    g2 = (Gz.c2 - g1 * h2) / h1 ** 2
    g3 = (Gz.c3 - 3 * g2 * h1 * h2 - g1 * h3) / h1 ** 3
    return ComplexJet(Gz.c0, g1, g2, g3)


def schwarzian(Gh: ComplexJet):
    """Schwarzian derivative from a jet taken in its own variable."""
    g1 = Gh.c1
    if np.ndim(g1) == 0 and g1 == 0:
        raise JetDomainError("first derivative vanishes; Schwarzian undefined")
    r = Gh.c2 / g1
    return Gh.c3 / g1 - 1.5 * r * r
