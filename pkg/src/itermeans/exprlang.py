"""A tiny expression language for single-variable generator functions.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | base ("^" factor)?
    base   := NUMBER | "x" | "(" expr ")" | FUNC "(" expr ")"
    FUNC   := "exp" | "log" | "sqrt"

``^`` is right associative and binds tighter than unary minus, so ``-x^2``
means ``-(x^2)``.  Constant subexpressions are folded while parsing, using
exact rationals whenever the arithmetic allows it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .errors import DomainError, ParseError

__all__ = [
    "Const",
    "Var",
    "BinOp",
    "Func",
    "Compose",
    "Expr",
    "X",
    "parse",
    "unparse",
    "fold",
    "evaluate",
    "compile_expr",
    "invert_expr",
    "substitute",
    "contains_var",
    "power_exponent",
    "to_monotone",
]

Number = Union[Fraction, float]

FUNCS = ("exp", "log", "sqrt")
BINOPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True, eq=False)
class Const:
    value: Number

    def __eq__(self, other):
        return isinstance(other, Const) and float(self.value) == float(other.value)

    def __hash__(self):
        return hash(("const", float(self.value)))


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class Compose:
    """``outer`` evaluated at ``inner``; removed by :func:`fold`."""

    outer: "Expr"
    inner: "Expr"


Expr = Union[Const, Var, BinOp, Func, Compose]

X = Var()


# ---------------------------------------------------------------------------
# floating point primitives with IEEE-style limits instead of exceptions


def _pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except OverflowError:
        if a < 0 and float(b).is_integer() and int(b) % 2 == 1:
            return -math.inf
        return math.inf
    except ValueError:
        if a == 0:
            return math.inf
        return math.nan


def _div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0 or a != a:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _log(a: float) -> float:
    if a > 0:
        return math.log(a)
    if a == 0:
        return -math.inf
    return math.nan


def _sqrt(a: float) -> float:
    return math.sqrt(a) if a >= 0 else math.nan


_BIN_FLOAT = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}
_FUNC_FLOAT = {"exp": _exp, "log": _log, "sqrt": _sqrt}


# ---------------------------------------------------------------------------
# constant folding


class _FoldError(DomainError):
    pass


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def _fold_binop(op: str, a: Number, b: Number) -> Number:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                raise _FoldError("division by zero in constant expression")
            return a / b
        if b.denominator == 1 and abs(b.numerator) <= 64:
            if a == 0 and b < 0:
                raise _FoldError("zero raised to a negative power")
            return a ** int(b)
    value = _BIN_FLOAT[op](float(a), float(b))
    if not math.isfinite(value):
        raise _FoldError("constant expression is not a finite real number")
    return value


def _fold_func(name: str, a: Number) -> Number:
    if isinstance(a, Fraction):
        if name == "exp" and a == 0:
            return Fraction(1)
        if name == "log" and a == 1:
            return Fraction(0)
        if name == "sqrt" and _is_square(a.numerator) and _is_square(a.denominator):
            return Fraction(math.isqrt(a.numerator), math.isqrt(a.denominator))
    value = _FUNC_FLOAT[name](float(a))
    if not math.isfinite(value):
        raise _FoldError(f"{name}({float(a)!r}) is not a finite real number")
    return value


def make_binop(op: str, left: Expr, right: Expr) -> Expr:
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(_fold_binop(op, left.value, right.value))
    return BinOp(op, left, right)


def make_func(name: str, arg: Expr) -> Expr:
    if isinstance(arg, Const):
        return Const(_fold_func(name, arg.value))
    if name == "exp" and isinstance(arg, Func) and arg.name == "log":
        return arg.arg
    if name == "log" and isinstance(arg, Func) and arg.name == "exp":
        return arg.arg
    return Func(name, arg)


def make_neg(arg: Expr) -> Expr:
    if isinstance(arg, Const):
        return Const(-arg.value)
    return BinOp("*", Const(Fraction(-1)), arg)


def substitute(expr: Expr, inner: Expr) -> Expr:
    """Replace every occurrence of ``x`` in ``expr`` by ``inner`` and fold."""
    if isinstance(expr, Var):
        return inner
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, BinOp):
        return make_binop(expr.op, substitute(expr.left, inner), substitute(expr.right, inner))
    if isinstance(expr, Func):
        return make_func(expr.name, substitute(expr.arg, inner))
    if isinstance(expr, Compose):
        return substitute(fold(expr), inner)
    raise TypeError(f"not an expression node: {expr!r}")


def fold(expr: Expr) -> Expr:
    """Constant-fold ``expr`` and resolve :class:`Compose` nodes."""
    if isinstance(expr, (Var, Const)):
        return expr
    if isinstance(expr, BinOp):
        return make_binop(expr.op, fold(expr.left), fold(expr.right))
    if isinstance(expr, Func):
        return make_func(expr.name, fold(expr.arg))
    if isinstance(expr, Compose):
        return substitute(fold(expr.outer), fold(expr.inner))
    raise TypeError(f"not an expression node: {expr!r}")


def contains_var(expr: Expr) -> bool:
    if isinstance(expr, Var):
        return True
    if isinstance(expr, Const):
        return False
    if isinstance(expr, BinOp):
        return contains_var(expr.left) or contains_var(expr.right)
    if isinstance(expr, Func):
        return contains_var(expr.arg)
    return contains_var(expr.outer) or contains_var(expr.inner)


def _count_var(expr: Expr) -> int:
    if isinstance(expr, Var):
        return 1
    if isinstance(expr, Const):
        return 0
    if isinstance(expr, BinOp):
        return _count_var(expr.left) + _count_var(expr.right)
    if isinstance(expr, Func):
        return _count_var(expr.arg)
    return _count_var(fold(expr))


def power_exponent(expr: Expr) -> float | None:
    """Return ``a`` when ``expr`` is literally ``x`` or ``x^a``."""
    expr = fold(expr)
    if isinstance(expr, Var):
        return 1.0
    if (
        isinstance(expr, BinOp)
        and expr.op == "^"
        and isinstance(expr.left, Var)
        and isinstance(expr.right, Const)
    ):
        return float(expr.right.value)
    return None


# ---------------------------------------------------------------------------
# tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, ("NUMBER", "x", "(", "-"))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> _Token:
        t = self.tok
        if t.kind != "op" or t.text != op:
            found = t.text or "end of input"
            raise ParseError(f"expected {op!r}, found {found!r}", t.pos, (op,))
        return self.advance()

    def _fold(self, build, pos):
        try:
            return build()
        except _FoldError as exc:
            raise ParseError(str(exc), pos) from None

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(
                f"unexpected token {self.tok.text!r}", self.tok.pos, ("+", "-", "*", "/", "^", "end")
            )
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.advance()
            rhs = self.term()
            node = self._fold(lambda: make_binop(t.text, node, rhs), t.pos)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.advance()
            rhs = self.factor()
            node = self._fold(lambda: make_binop(t.text, node, rhs), t.pos)
        return node

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return make_neg(self.factor())
        node = self.base()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.advance()
            exponent = self.factor()
            if not isinstance(exponent, Const):
                raise ParseError("exponent must be a constant expression", t.pos, ("NUMBER",))
            node = self._fold(lambda: make_binop("^", node, exponent), t.pos)
        return node

    def base(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(Fraction(t.text))
        if t.kind == "name":
            self.advance()
            if t.text == "x":
                return X
            if t.text in FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return self._fold(lambda: make_func(t.text, arg), t.pos)
            raise ParseError(f"unknown identifier {t.text!r}", t.pos, ("x",) + FUNCS)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        found = t.text or "end of input"
        raise ParseError(f"unexpected {found!r}", t.pos, ("NUMBER", "x", "(", "-") + FUNCS)


def parse(text: str) -> Expr:
    """Parse ``text`` into a constant-folded expression tree.

    >>> unparse(parse("x^(1/0.5)"))
    'x^2'
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0, ("NUMBER", "x", "(", "-"))
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# unparse

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_ATOM = 9


def _format_const(value: Number) -> tuple[str, int]:
    if isinstance(value, Fraction):
        den = value.denominator
        if den == 1:
            text = str(value.numerator)
        else:
            d = den
            while d % 2 == 0:
                d //= 2
            while d % 5 == 0:
                d //= 5
            if d == 1:
                # terminating decimal: print it exactly
                digits = 0
                scaled = value
                while scaled.denominator != 1:
                    scaled *= 10
                    digits += 1
                sign = "-" if scaled < 0 else ""
                s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
                text = f"{sign}{s[:-digits]}.{s[-digits:]}"
            else:
                return f"({value.numerator}/{den})", _ATOM
    else:
        text = repr(float(value))
    if text.startswith("-"):
        return text, 0
    return text, _ATOM


def _unparse(expr: Expr) -> tuple[str, int]:
    if isinstance(expr, Var):
        return "x", _ATOM
    if isinstance(expr, Const):
        return _format_const(expr.value)
    if isinstance(expr, Func):
        inner, _ = _unparse(expr.arg)
        return f"{expr.name}({inner})", _ATOM
    if isinstance(expr, Compose):
        return _unparse(fold(expr))
    prec = _PREC[expr.op]
    left, lp = _unparse(expr.left)
    right, rp = _unparse(expr.right)
    if expr.op == "^":
        if lp <= prec:
            left = f"({left})"
        if rp < _ATOM:
            right = f"({right})"
        return f"{left}^{right}", prec
    if lp < prec and lp != 0:
        left = f"({left})"
    if rp <= prec:
        right = f"({right})"
    return f"{left}{expr.op}{right}", prec


def unparse(expr: Expr) -> str:
    """Canonical text for ``expr``; ``parse(unparse(e))`` reproduces ``fold(e)``."""
    return _unparse(fold(expr))[0]


# ---------------------------------------------------------------------------
# evaluation


def evaluate(expr: Expr, x: float) -> float:
    """Evaluate by walking the tree (reference path for :func:`compile_expr`)."""
    if isinstance(expr, Var):
        return float(x)
    if isinstance(expr, Const):
        return float(expr.value)
    if isinstance(expr, BinOp):
        return _BIN_FLOAT[expr.op](evaluate(expr.left, x), evaluate(expr.right, x))
    if isinstance(expr, Func):
        return _FUNC_FLOAT[expr.name](evaluate(expr.arg, x))
    return evaluate(expr.outer, evaluate(expr.inner, x))


def compile_expr(expr: Expr) -> Callable[[float], float]:
    """Turn ``expr`` into a nest of closures."""
    expr = fold(expr)
    if isinstance(expr, Var):
        return float
    if isinstance(expr, Const):
        c = float(expr.value)
        return lambda x: c
    if isinstance(expr, Func):
        fn = _FUNC_FLOAT[expr.name]
        arg = compile_expr(expr.arg)
        return lambda x: fn(arg(x))
    op = _BIN_FLOAT[expr.op]
    if isinstance(expr.right, Const):
        c = float(expr.right.value)
        left = compile_expr(expr.left)
        if expr.op == "^":
            return lambda x: _pow(left(x), c)
        return lambda x: op(left(x), c)
    left = compile_expr(expr.left)
    right = compile_expr(expr.right)
    return lambda x: op(left(x), right(x))


# ---------------------------------------------------------------------------
# symbolic inversion


def invert_expr(expr: Expr) -> Expr | None:
    """Closed-form inverse when ``x`` occurs exactly once along a single path.

    The result is an expression in ``x`` standing for the output value.  Branch
    correctness (e.g. ``x^2`` on negative inputs) is not checked here.
    """
    expr = fold(expr)
    if _count_var(expr) != 1:
        return None
    try:
        return fold(_invert_path(expr, X))
    except (_FoldError, ZeroDivisionError):
        return None


def _invert_path(expr: Expr, y: Expr) -> Expr:
    if isinstance(expr, Var):
        return y
    if isinstance(expr, Func):
        undo = {"exp": "log", "log": "exp"}
        if expr.name == "sqrt":
            return _invert_path(expr.arg, make_binop("^", y, Const(Fraction(2))))
        return _invert_path(expr.arg, make_func(undo[expr.name], y))
    assert isinstance(expr, BinOp)
    a, b, op = expr.left, expr.right, expr.op
    in_left = contains_var(a)
    if op == "+":
        return _invert_path(a, make_binop("-", y, b)) if in_left else _invert_path(b, make_binop("-", y, a))
    if op == "-":
        return _invert_path(a, make_binop("+", y, b)) if in_left else _invert_path(b, make_binop("-", a, y))
    if op == "*":
        k = b if in_left else a
        if isinstance(k, Const) and k.value == 0:
            raise _FoldError("multiplication by zero is not invertible")
        return _invert_path(a if in_left else b, make_binop("/", y, k))
    if op == "/":
        if in_left:
            return _invert_path(a, make_binop("*", y, b))
        return _invert_path(b, make_binop("/", a, y))
    # "^" with constant exponent
    if isinstance(b, Const) and b.value != 0:
        return _invert_path(a, make_binop("^", y, make_binop("/", Const(Fraction(1)), b)))
    raise _FoldError("power with zero exponent is not invertible")


# ---------------------------------------------------------------------------
# bridge to MonotoneFn


def to_monotone(ast: Expr, domain, *, positive: bool = False, label: str | None = None, points: int = 257):
    """Build a validated :class:`~itermeans.monofunc.MonotoneFn` from ``ast``.

    Direction is read off a sampling grid; a symbolic inverse is attached when
    :func:`invert_expr` finds one and it round-trips on that grid.  With
    ``positive=True`` the values must stay inside ``(0, inf)``.
    """
    from .monofunc import MonotoneFn, check_monotone, image_of

    if isinstance(ast, str):
        ast = parse(ast)
    ast = fold(ast)
    func = compile_expr(ast)
    direction, grid, values = check_monotone(func, domain, points=points, positive=positive)

    inverse_ast = invert_expr(ast)
    inverse_func = None
    if inverse_ast is not None:
        candidate = compile_expr(inverse_ast)
        ok = True
        for x, y in zip(grid, values):
            back = candidate(y)
            if not (abs(back - x) <= 1e-8 * max(1.0, abs(x))):
                ok = False
                break
        if ok:
            inverse_func = candidate
        else:
            inverse_ast = None

    codomain = image_of(func, domain, direction, grid, values)
    return MonotoneFn(
        func=func,
        domain=domain,
        codomain=codomain,
        direction=direction,
        inverse_func=inverse_func,
        label=label or unparse(ast),
        expr=ast,
        inverse_expr=inverse_ast,
        power=power_exponent(ast),
    )
