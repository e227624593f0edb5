"""Closed-form scalar functions of one variable ``t`` with exact symbolic derivatives.

Grammar (ASCII)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | 't' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'

Operator precedence is power > unary minus > mul/div > add/sub, so ``-t^2``
evaluates to ``-(t^2)``.  Function application requires parentheses.  Numbers
are decimal with an optional exponent part (``1.5e-3``).

Trees are immutable after parsing; evaluation is reentrant and deterministic
(same input, bit-identical output).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


FUNCTIONS = (
    "exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt", "abs",
    "sign",
)

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


class ExprError(ValueError):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int, source: str):
        super().__init__(f"syntax error at position {position}: {message}")
        self.position = position
        self.source = source


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, position: int, source: str):
        ExprError.__init__(
            self, f"unknown identifier '{name}' at position {position}"
        )
        self.position = position
        self.source = source


class DomainError(ExprError):
    """Evaluation hit a point outside the function's domain."""

    def __init__(self, message: str, subexpr: "Node", t: float):
        super().__init__(f"{message} in '{subexpr}' at t={t!r}")
        self.subexpr = subexpr
        self.t = t


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _cosh(x: float) -> float:
    try:
        return math.cosh(x)
    except OverflowError:
        return math.inf


def _sinh(x: float) -> float:
    try:
        return math.sinh(x)
    except OverflowError:
        return math.copysign(math.inf, x)


def _sign(x: float) -> float:
    if x == 0.0:
        raise ValueError("sign undefined at 0")
    return 1.0 if x > 0.0 else -1.0


# Shared by tree evaluation and compiled callables so both produce identical
# IEEE values.  math.pow already rejects 0^negative and neg^non-integer.
_EVAL_NAMESPACE = {
    "math": math,
    "_exp": _exp,
    "_cosh": _cosh,
    "_sinh": _sinh,
    "_sign": _sign,
}


class Node:
    __slots__ = ()

    def eval(self, t: float) -> float:
        raise NotImplementedError

    def deriv(self) -> "Node":
        raise NotImplementedError

    def fmt(self) -> str:
        raise NotImplementedError

    def prec(self) -> int:
        return _PREC_ATOM

    def pysrc(self) -> str:
        """Python source fragment mirroring eval() operation for operation."""
        raise NotImplementedError

    def __str__(self) -> str:
        return self.fmt()

    def _wrap(self, minimum: int) -> str:
        text = self.fmt()
        return f"({text})" if self.prec() < minimum else text


class Num(Node):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def eval(self, t: float) -> float:
        return self.value

    def deriv(self) -> Node:
        return Num(0.0)

    def fmt(self) -> str:
        if self.value == math.floor(self.value) and abs(self.value) < 1e15:
            return str(int(self.value))
        return repr(self.value)

    def pysrc(self) -> str:
        return repr(self.value)


class Const(Node):
    __slots__ = ("name",)
    _VALUES = {"pi": math.pi, "e": math.e}

    def __init__(self, name: str):
        self.name = name

    def eval(self, t: float) -> float:
        return self._VALUES[self.name]

    def deriv(self) -> Node:
        return Num(0.0)

    def fmt(self) -> str:
        return self.name

    def pysrc(self) -> str:
        return repr(self._VALUES[self.name])


class Var(Node):
    __slots__ = ()

    def eval(self, t: float) -> float:
        return t

    def deriv(self) -> Node:
        return Num(1.0)

    def fmt(self) -> str:
        return "t"

    def pysrc(self) -> str:
        return "t"


class Neg(Node):
    __slots__ = ("a",)

    def __init__(self, a: Node):
        self.a = a

    def eval(self, t: float) -> float:
        return -self.a.eval(t)

    def deriv(self) -> Node:
        return _neg(self.a.deriv())

    def prec(self) -> int:
        return _PREC_NEG

    def fmt(self) -> str:
        return "-" + self.a._wrap(_PREC_POW)

    def pysrc(self) -> str:
        return f"(-{self.a.pysrc()})"


class _Binary(Node):
    __slots__ = ("a", "b")
    op = "?"

    def __init__(self, a: Node, b: Node):
        self.a = a
        self.b = b

    def fmt(self) -> str:
        p = self.prec()
        return f"{self.a._wrap(p)}{self.op}{self.b._wrap(p + 1)}"


class Add(_Binary):
    __slots__ = ()
    op = "+"

    def eval(self, t: float) -> float:
        return self.a.eval(t) + self.b.eval(t)

    def deriv(self) -> Node:
        return _add(self.a.deriv(), self.b.deriv())

    def prec(self) -> int:
        return _PREC_ADD

    def pysrc(self) -> str:
        return f"({self.a.pysrc()}+{self.b.pysrc()})"


class Sub(_Binary):
    __slots__ = ()
    op = "-"

    def eval(self, t: float) -> float:
        return self.a.eval(t) - self.b.eval(t)

    def deriv(self) -> Node:
        return _sub(self.a.deriv(), self.b.deriv())

    def prec(self) -> int:
        return _PREC_ADD

    def pysrc(self) -> str:
        return f"({self.a.pysrc()}-{self.b.pysrc()})"


class Mul(_Binary):
    __slots__ = ()
    op = "*"

    def eval(self, t: float) -> float:
        return self.a.eval(t) * self.b.eval(t)

    def deriv(self) -> Node:
        return _add(_mul(self.a.deriv(), self.b), _mul(self.a, self.b.deriv()))

    def prec(self) -> int:
        return _PREC_MUL

    def pysrc(self) -> str:
        return f"({self.a.pysrc()}*{self.b.pysrc()})"


class Div(_Binary):
    __slots__ = ()
    op = "/"

    def eval(self, t: float) -> float:
        den = self.b.eval(t)
        if den == 0.0:
            raise DomainError("division by zero", self, t)
        return self.a.eval(t) / den

    def deriv(self) -> Node:
        num = _sub(_mul(self.a.deriv(), self.b), _mul(self.a, self.b.deriv()))
        return _div(num, _pow(self.b, Num(2.0)))

    def prec(self) -> int:
        return _PREC_MUL

    def pysrc(self) -> str:
        return f"({self.a.pysrc()}/{self.b.pysrc()})"


class Pow(_Binary):
    __slots__ = ()
    op = "^"

    def eval(self, t: float) -> float:
        base = self.a.eval(t)
        expo = self.b.eval(t)
        try:
            return math.pow(base, expo)
        except ValueError:
            raise DomainError("power outside real domain", self, t) from None
        except OverflowError:
            return math.inf

    def deriv(self) -> Node:
        if isinstance(self.b, Num):
            # v constant: d(u^v) = v*u^(v-1)*u'
            return _mul(
                _mul(self.b, _pow(self.a, Num(self.b.value - 1.0))),
                self.a.deriv(),
            )
        if isinstance(self.a, (Num, Const)):
            # u constant: d(u^v) = u^v*log(u)*v'
            return _mul(_mul(self, _call("log", self.a)), self.b.deriv())
        # general: u^v*(v'*log(u) + v*u'/u)
        inner = _add(
            _mul(self.b.deriv(), _call("log", self.a)),
            _mul(self.b, _div(self.a.deriv(), self.a)),
        )
        return _mul(self, inner)

    def prec(self) -> int:
        return _PREC_POW

    def fmt(self) -> str:
        # right-associative; exponent may be a factor (e.g. a^-b)
        return f"{self.a._wrap(_PREC_POW + 1)}^{self.b._wrap(_PREC_NEG)}"

    def pysrc(self) -> str:
        return f"math.pow({self.a.pysrc()},{self.b.pysrc()})"


class Call(Node):
    __slots__ = ("name", "a")

    def __init__(self, name: str, a: Node):
        self.name = name
        self.a = a

    def eval(self, t: float) -> float:
        u = self.a.eval(t)
        name = self.name
        if name == "exp":
            return _exp(u)
        if name == "log":
            if u <= 0.0:
                raise DomainError("log of nonpositive value", self, t)
            return math.log(u)
        if name == "sin":
            return math.sin(u)
        if name == "cos":
            return math.cos(u)
        if name == "tan":
            return math.tan(u)
        if name == "sinh":
            return _sinh(u)
        if name == "cosh":
            return _cosh(u)
        if name == "tanh":
            return math.tanh(u)
        if name == "sqrt":
            if u < 0.0:
                raise DomainError("sqrt of negative value", self, t)
            return math.sqrt(u)
        if name == "abs":
            return abs(u)
        if name == "sign":
            if u == 0.0:
                raise DomainError("sign undefined at 0", self, t)
            return 1.0 if u > 0.0 else -1.0
        raise AssertionError(name)

    def deriv(self) -> Node:
        u = self.a
        du = u.deriv()
        name = self.name
        if name == "exp":
            return _mul(self, du)
        if name == "log":
            return _div(du, u)
        if name == "sin":
            return _mul(_call("cos", u), du)
        if name == "cos":
            return _neg(_mul(_call("sin", u), du))
        if name == "tan":
            return _div(du, _pow(_call("cos", u), Num(2.0)))
        if name == "sinh":
            return _mul(_call("cosh", u), du)
        if name == "cosh":
            return _mul(_call("sinh", u), du)
        if name == "tanh":
            return _div(du, _pow(_call("cosh", u), Num(2.0)))
        if name == "sqrt":
            return _div(du, _mul(Num(2.0), self))
        if name == "abs":
            return _mul(_call("sign", u), du)
        if name == "sign":
            return Num(0.0)
        raise AssertionError(name)

    def fmt(self) -> str:
        return f"{self.name}({self.a.fmt()})"

    def pysrc(self) -> str:
        inner = self.a.pysrc()
        name = self.name
        if name == "exp":
            return f"_exp({inner})"
        if name == "sinh":
            return f"_sinh({inner})"
        if name == "cosh":
            return f"_cosh({inner})"
        if name == "sign":
            return f"_sign({inner})"
        if name == "abs":
            return f"abs({inner})"
        return f"math.{name}({inner})"


def _is_num(node: Node, value: float) -> bool:
    return isinstance(node, Num) and node.value == value


def _neg(a: Node) -> Node:
    if isinstance(a, Num):
        return Num(-a.value)
    return Neg(a)


def _add(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Sub(a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) and not _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Div(a, b)


def _pow(a: Node, b: Node) -> Node:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return Num(1.0)
    return Pow(a, b)


def _call(name: str, a: Node) -> Node:
    return Call(name, a)


@dataclass(frozen=True)
class FnExpr:
    """A parsed scalar function of ``t``.

    Immutable after construction; safe to evaluate from many threads.
    """

    root: Node

    def eval(self, t: float) -> float:
        return self.root.eval(t)

    __call__ = eval

    def deriv(self) -> "FnExpr":
        return FnExpr(self.root.deriv())

    def compiled(self):
        """Fast scalar callable producing bit-identical values to eval().

        Domain violations raise bare ValueError/ZeroDivisionError instead of
        DomainError; use eval() when positioned error reporting matters.
        """
        src = f"lambda t: {self.root.pysrc()}"
        return eval(src, dict(_EVAL_NAMESPACE))

    def __str__(self) -> str:
        return self.root.fmt()


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            m = _TOKEN_RE.match(source, pos)
            if m is None or m.end() == pos:
                at = pos + len(source[pos:]) - len(source[pos:].lstrip())
                raise ParseError(
                    f"unexpected character {source[at]!r}", at, source
                )
            if m.group("num"):
                self.tokens.append(("num", m.group("num"), m.start("num")))
            elif m.group("ident"):
                self.tokens.append(("ident", m.group("ident"), m.start("ident")))
            else:
                self.tokens.append(("op", m.group("op"), m.start("op")))
            pos = m.end()
        self.tokens.append(("end", "", len(source)))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"expected '{op}'", pos, self.source)
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos, self.source)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if text == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.factor()
                node = Mul(node, rhs) if text == "*" else Div(node, rhs)
            else:
                return node

    def factor(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Pow(node, self.factor())
        return node

    def base(self) -> Node:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            nxt_kind, nxt_text, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in FUNCTIONS:
                    raise UnknownIdentifierError(text, pos, self.source)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text == "t":
                return Var()
            if text in ("pi", "e"):
                return Const(text)
            raise UnknownIdentifierError(text, pos, self.source)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and text == "-":
            return Neg(self.base())
        raise ParseError("expected expression", pos, self.source)


def parse(source: str) -> FnExpr:
    """Parse an expression in the module grammar.

    Raises ParseError (with position) on malformed input and
    UnknownIdentifierError for names outside {t, pi, e} and the function set.
    """
    return FnExpr(_Parser(source).parse())


def constant(value: float) -> FnExpr:
    return FnExpr(Num(value))
