"""Expression language for coordinate functions on a trivialized bundle patch.

Grammar (EBNF)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" integer)?
    atom   := number | "pi" | ident | func "(" expr ")" | "(" expr ")"
    func   := "sin" | "cos" | "exp" | "log" | "sqrt"
    ident  := ("x" | "f" | "v") positive-integer

``x<i>`` are base coordinates and ``f<i>`` fiber coordinates; ``v<i>`` is an
accepted alias for ``f<i>`` (handy when the fiber is a vector space).  ``^``
binds tighter than unary minus, which binds tighter than ``*`` and ``/``,
which bind tighter than ``+`` and ``-``.  Binary operators of equal precedence
associate to the left.  Exponents are literal integers (negative allowed).
There is no implicit multiplication: ``2x1`` is a syntax error.

Expression trees are immutable, hashable, and compare structurally, so they
are safe to share across threads and to use as cache keys.  ``unparse``
produces source that reparses to a structurally identical tree; the parser
never produces negative ``Const`` nodes (a leading minus becomes a ``neg``
node), and programmatic trees should follow the same normal form if they need
the round-trip property.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ExprSyntaxError, IndexOutOfRange, UnknownIdentifier

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Power",
    "FUNCTIONS",
    "parse",
    "unparse",
    "max_indices",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class Expression:
    """Base class for expression tree nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return unparse(self)


@dataclass(frozen=True, slots=True)
class Const(Expression):
    """Numeric literal (also produced by the ``pi`` keyword)."""

    value: float


@dataclass(frozen=True, slots=True)
class Var(Expression):
    """Coordinate variable; ``kind`` is ``"x"`` (base) or ``"f"`` (fiber),
    ``index`` is 1-based."""

    kind: str
    index: int


@dataclass(frozen=True, slots=True)
class Unary(Expression):
    """Unary operation: ``"neg"`` or one of :data:`FUNCTIONS`."""

    op: str
    operand: Expression


@dataclass(frozen=True, slots=True)
class Binary(Expression):
    """Binary operation, ``op`` in ``+ - * /``."""

    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Power(Expression):
    """Integer power of a subexpression."""

    base: Expression
    exponent: int


_TOKEN = re.compile(
    r"(?P<num>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<name>[A-Za-z]+[0-9]*)"
    r"|(?P<sym>[-+*/^()])"
)

_IDENT = re.compile(r"([xfv])([0-9]+)\Z")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    length = len(source)
    while pos < length:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        match = _TOKEN.match(source, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {ch!r}", pos)
        kind = match.lastgroup
        tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", length))
    return tokens


class _Parser:
    """Recursive-descent parser over the token stream."""

    def __init__(self, tokens: list[tuple[str, str, int]], base_dim: int, fiber_dim: int):
        self._tokens = tokens
        self._i = 0
        self._m = base_dim
        self._n = fiber_dim

    def _peek(self) -> tuple[str, str, int]:
        return self._tokens[self._i]

    def _advance(self) -> tuple[str, str, int]:
        token = self._tokens[self._i]
        self._i += 1
        return token

    def _match_sym(self, *symbols: str) -> str | None:
        kind, text, _ = self._peek()
        if kind == "sym" and text in symbols:
            self._i += 1
            return text
        return None

    def parse(self) -> Expression:
        node = self._expr()
        kind, text, pos = self._peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r} after a complete expression", pos)
        return node

    def _expr(self) -> Expression:
        node = self._term()
        while True:
            op = self._match_sym("+", "-")
            if op is None:
                return node
            node = Binary(op, node, self._term())

    def _term(self) -> Expression:
        node = self._factor()
        while True:
            op = self._match_sym("*", "/")
            if op is None:
                return node
            node = Binary(op, node, self._factor())

    def _factor(self) -> Expression:
        if self._match_sym("-"):
            return Unary("neg", self._factor())
        return self._power()

    def _power(self) -> Expression:
        base = self._atom()
        if self._match_sym("^"):
            return Power(base, self._exponent())
        return base

    def _exponent(self) -> int:
        sign = -1 if self._match_sym("-") else 1
        kind, text, pos = self._advance()
        if kind != "num" or not text.isdigit():
            raise ExprSyntaxError("expected a literal integer exponent", pos)
        return sign * int(text)

    def _atom(self) -> Expression:
        kind, text, pos = self._advance()
        if kind == "num":
            return Const(float(text))
        if kind == "sym" and text == "(":
            node = self._expr()
            if not self._match_sym(")"):
                _, _, closepos = self._peek()
                raise ExprSyntaxError("expected ')'", closepos)
            return node
        if kind == "name":
            return self._name(text, pos)
        raise ExprSyntaxError("expected a number, identifier, or '('", pos)

    def _name(self, text: str, pos: int) -> Expression:
        if text == "pi":
            return Const(math.pi)
        if text in FUNCTIONS:
            if not self._match_sym("("):
                _, _, argpos = self._peek()
                raise ExprSyntaxError(f"expected '(' after function {text!r}", argpos)
            node = self._expr()
            if not self._match_sym(")"):
                _, _, closepos = self._peek()
                raise ExprSyntaxError("expected ')'", closepos)
            return Unary(text, node)
        ident = _IDENT.match(text)
        if ident is None:
            raise UnknownIdentifier(f"unknown identifier {text!r} at offset {pos}")
        letter, digits = ident.groups()
        index = int(digits)
        if index == 0:
            raise UnknownIdentifier(f"variable indices are 1-based: {text!r} at offset {pos}")
        if letter == "x":
            if index > self._m:
                raise IndexOutOfRange(
                    f"base index {index} exceeds base dimension {self._m}: {text!r}"
                )
            return Var("x", index)
        if index > self._n:
            raise IndexOutOfRange(
                f"fiber index {index} exceeds fiber dimension {self._n}: {text!r}"
            )
        return Var("f", index)


def parse(source: str, dims: tuple[int, int]) -> Expression:
    """Parse ``source`` into an expression tree.

    ``dims = (m, n)`` declares the base and fiber dimensions; variable indices
    are validated against them (raising :class:`IndexOutOfRange`).  Raises
    :class:`ExprSyntaxError` with the failing offset on malformed input and
    :class:`UnknownIdentifier` for names outside the grammar.
    """
    m, n = dims
    if m < 1 or n < 1:
        raise ValueError(f"dims must be positive, got {dims}")
    return _Parser(_tokenize(source), m, n).parse()


# Printing precedence levels; higher binds tighter.
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(e: Expression) -> int:
    if isinstance(e, Binary):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Unary):
        return _PREC_NEG if e.op == "neg" else _PREC_ATOM
    if isinstance(e, Power):
        return _PREC_POW
    if isinstance(e, Const) and e.value < 0:
        # prints with a leading minus, so it binds like a negation
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(e: Expression, minimum: int) -> str:
    text = unparse(e)
    if _prec(e) < minimum:
        return f"({text})"
    return text


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def unparse(e: Expression) -> str:
    """Render a tree back to source with minimal parentheses.

    Reparsing the result yields a structurally identical tree for any tree the
    parser can produce.
    """
    if isinstance(e, Const):
        return _format_number(e.value)
    if isinstance(e, Var):
        return f"{e.kind}{e.index}"
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.operand, _PREC_NEG)
        return f"{e.op}({unparse(e.operand)})"
    if isinstance(e, Binary):
        if e.op in "+-":
            return f"{_wrap(e.left, _PREC_ADD)} {e.op} {_wrap(e.right, _PREC_ADD + 1)}"
        return f"{_wrap(e.left, _PREC_MUL)}{e.op}{_wrap(e.right, _PREC_MUL + 1)}"
    if isinstance(e, Power):
        return f"{_wrap(e.base, _PREC_ATOM)}^{e.exponent}"
    raise TypeError(f"not an expression node: {e!r}")


def max_indices(e: Expression) -> tuple[int, int]:
    """Largest base and fiber variable indices referenced by ``e`` (0 if none).

    Containers use this to validate expressions against their own dimensions
    at bind time.
    """
    max_x = 0
    max_f = 0
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            if node.kind == "x":
                max_x = max(max_x, node.index)
            else:
                max_f = max(max_f, node.index)
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Power):
            stack.append(node.base)
    return max_x, max_f
