"""Internal structural manipulation of expression trees.

Not part of the public API.  The only symbolic differentiation in the package
lives here: the prolongation of a connection to the vertical bundle needs the
fiber partials of Christoffel expressions as expressions, and the linearity
detector needs coefficient expressions.  Everything else differentiates
numerically via forward-mode jets.

The smart constructors fold trivial algebra (zeros, ones, constant
arithmetic) so that derivative trees stay small.  Folding changes only tree
shape, never the function represented.
"""

from __future__ import annotations

from .errors import DifferentiationUnsupported
from .exprdsl import Binary, Const, Expression, Power, Unary, Var

_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(e: Expression, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def add(a: Expression, b: Expression) -> Expression:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("/", a, b)


def neg(a: Expression) -> Expression:
    if isinstance(a, Unary) and a.op == "neg":
        return a.operand
    if _is_const(a, 0.0):
        return _ZERO
    return Unary("neg", a)


def power(a: Expression, k: int) -> Expression:
    if k == 0:
        return _ONE
    if k == 1:
        return a
    return Power(a, k)


def const(value: float) -> Expression:
    """A constant in parser normal form (negative values wrapped in ``neg``)."""
    if value < 0:
        return Unary("neg", Const(-value))
    return Const(float(value))


def derivative(e: Expression, kind: str, index: int) -> Expression:
    """Structural partial derivative of ``e`` with respect to the variable
    ``(kind, index)``, folded."""
    if isinstance(e, Const):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if (e.kind, e.index) == (kind, index) else _ZERO
    if isinstance(e, Binary):
        da = derivative(e.left, kind, index)
        db = derivative(e.right, kind, index)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, e.right), mul(e.left, db))
        # quotient rule; keeps the denominator as an explicit square
        return div(sub(mul(da, e.right), mul(e.left, db)), Power(e.right, 2))
    if isinstance(e, Power):
        inner = derivative(e.base, kind, index)
        return mul(mul(const(e.exponent), power(e.base, e.exponent - 1)), inner)
    if isinstance(e, Unary):
        inner = derivative(e.operand, kind, index)
        if e.op == "neg":
            return neg(inner)
        if e.op == "sin":
            return mul(Unary("cos", e.operand), inner)
        if e.op == "cos":
            return neg(mul(Unary("sin", e.operand), inner))
        if e.op == "exp":
            return mul(e, inner)
        if e.op == "log":
            return div(inner, e.operand)
        if e.op == "sqrt":
            return div(inner, mul(Const(2.0), e))
        raise DifferentiationUnsupported(f"no differentiation rule for {e.op!r}")
    raise DifferentiationUnsupported(f"no differentiation rule for {e!r}")


def substitute_fiber(e: Expression, replacements: tuple[Expression, ...]) -> Expression:
    """Replace every fiber variable ``f<i>`` by ``replacements[i-1]``, folding
    as it goes.  Base variables are left alone."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        if e.kind == "f":
            return replacements[e.index - 1]
        return e
    if isinstance(e, Binary):
        a = substitute_fiber(e.left, replacements)
        b = substitute_fiber(e.right, replacements)
        if e.op == "+":
            return add(a, b)
        if e.op == "-":
            return sub(a, b)
        if e.op == "*":
            return mul(a, b)
        return div(a, b)
    if isinstance(e, Unary):
        inner = substitute_fiber(e.operand, replacements)
        if e.op == "neg":
            return neg(inner)
        return Unary(e.op, inner)
    if isinstance(e, Power):
        return power(substitute_fiber(e.base, replacements), e.exponent)
    raise TypeError(f"not an expression node: {e!r}")


def fiber_to_zero(e: Expression, fiber_dim: int) -> Expression:
    """Substitute 0 for every fiber variable and fold."""
    return substitute_fiber(e, (_ZERO,) * fiber_dim)
