"""Evaluation and forward-mode differentiation of expression trees.

Three evaluators share the same primitive domain rules and all memoize on
node identity within a single call, so DAG-shaped trees (shared subtrees)
cost what their unique nodes cost:

* :func:`evaluate` -- plain IEEE double recursion.
* :func:`gradient` -- value plus first partials with respect to every
  coordinate of the evaluation point, in the order ``x1..xm, f1..fn``.
* :func:`mixed_second` -- a two-direction second-order jet
  (:class:`Jet2`) carrying ``value, d1, d2, d12``; ``d12`` is the mixed
  second derivative.  No general Hessians are kept anywhere.

Domain failures (``log`` of a non-positive value, ``sqrt`` of a negative
value, division by zero, ``0`` raised to a negative power) raise
:class:`~curvcheck.errors.DomainError`.  ``sqrt`` at exactly zero evaluates
fine but has no finite derivative, so the derivative evaluators refuse it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .exprdsl import Binary, Const, Expression, Power, Unary, Var

__all__ = [
    "EvalPoint",
    "Coordinate",
    "Jet2",
    "evaluate",
    "gradient",
    "partial",
    "mixed_second",
    "jet_sin",
    "jet_cos",
    "jet_exp",
    "jet_log",
    "jet_sqrt",
    "jet_pow",
]

#: A coordinate direction, e.g. ``("x", 1)`` or ``("f", 2)``; indices 1-based.
Coordinate = tuple[str, int]


@dataclass(frozen=True)
class EvalPoint:
    """A point of the trivialized patch: base coordinates ``x``, fiber
    coordinates ``f`` (possibly empty for base-only expressions)."""

    x: tuple[float, ...]
    f: tuple[float, ...] = ()

    @classmethod
    def of(cls, x, f=()) -> "EvalPoint":
        return cls(tuple(float(v) for v in x), tuple(float(v) for v in f))


# ---------------------------------------------------------------------------
# second-order two-direction jets


@dataclass(frozen=True, slots=True)
class Jet2:
    """Truncated second-order jet in two directions.

    ``d1`` and ``d2`` are directional first derivatives, ``d12`` the mixed
    second derivative.  The arithmetic implements the usual Leibniz and chain
    rules; e.g. for a product, ``d12 = a.d12*b.value + a.d1*b.d2 + a.d2*b.d1
    + a.value*b.d12``.
    """

    value: float
    d1: float = 0.0
    d2: float = 0.0
    d12: float = 0.0

    @classmethod
    def constant(cls, value: float) -> "Jet2":
        return cls(float(value), 0.0, 0.0, 0.0)

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(
            self.value + other.value,
            self.d1 + other.d1,
            self.d2 + other.d2,
            self.d12 + other.d12,
        )

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(
            self.value - other.value,
            self.d1 - other.d1,
            self.d2 - other.d2,
            self.d12 - other.d12,
        )

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.d1, -self.d2, -self.d12)

    def __mul__(self, other: "Jet2") -> "Jet2":
        # The cross terms are summed as a group so that swapping the two
        # tagged directions gives a bit-identical d12 (floating addition is
        # commutative but not associative).
        return Jet2(
            self.value * other.value,
            self.d1 * other.value + self.value * other.d1,
            self.d2 * other.value + self.value * other.d2,
            self.d12 * other.value
            + (self.d1 * other.d2 + self.d2 * other.d1)
            + self.value * other.d12,
        )

    def __truediv__(self, other: "Jet2") -> "Jet2":
        if other.value == 0.0:
            raise DomainError("division by zero")
        q = self.value / other.value
        d1 = (self.d1 - q * other.d1) / other.value
        d2 = (self.d2 - q * other.d2) / other.value
        # Cross terms grouped for direction-swap symmetry, as in __mul__.
        d12 = (self.d12 - (d1 * other.d2 + d2 * other.d1) - q * other.d12) / other.value
        return Jet2(q, d1, d2, d12)


def _jet_chain(a: Jet2, value: float, first: float, second: float) -> Jet2:
    # d1*d2 is computed as its own product so the chain rule, too, is
    # bit-identical under swapping the tagged directions.
    return Jet2(
        value,
        first * a.d1,
        first * a.d2,
        second * (a.d1 * a.d2) + first * a.d12,
    )


def jet_sin(a: Jet2) -> Jet2:
    s = math.sin(a.value)
    return _jet_chain(a, s, math.cos(a.value), -s)


def jet_cos(a: Jet2) -> Jet2:
    c = math.cos(a.value)
    return _jet_chain(a, c, -math.sin(a.value), -c)


def jet_exp(a: Jet2) -> Jet2:
    try:
        e = math.exp(a.value)
    except OverflowError as exc:
        raise DomainError(f"exp overflow at {a.value}") from exc
    return _jet_chain(a, e, e, e)


def jet_log(a: Jet2) -> Jet2:
    if a.value <= 0.0:
        raise DomainError(f"log of non-positive value {a.value}")
    inv = 1.0 / a.value
    return _jet_chain(a, math.log(a.value), inv, -inv * inv)


def jet_sqrt(a: Jet2) -> Jet2:
    if a.value < 0.0:
        raise DomainError(f"sqrt of negative value {a.value}")
    if a.value == 0.0:
        raise DomainError("sqrt has no finite derivative at zero")
    root = math.sqrt(a.value)
    first = 0.5 / root
    return _jet_chain(a, root, first, -0.25 / (a.value * root))


def jet_pow(a: Jet2, k: int) -> Jet2:
    if k < 0 and a.value == 0.0:
        raise DomainError("zero raised to a negative power")
    value = a.value**k
    first = 0.0 if k == 0 else k * a.value ** (k - 1)
    second = 0.0 if k in (0, 1) else k * (k - 1) * a.value ** (k - 2)
    return _jet_chain(a, value, first, second)


# ---------------------------------------------------------------------------
# plain value evaluation


def _var_value(node: Var, point: EvalPoint) -> float:
    seq = point.x if node.kind == "x" else point.f
    try:
        return seq[node.index - 1]
    except IndexError:
        raise ValueError(
            f"expression references {node.kind}{node.index} but the point has "
            f"dims ({len(point.x)}, {len(point.f)})"
        ) from None


def _value(e: Expression, point: EvalPoint, memo: dict) -> float:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = e.value
    elif isinstance(e, Var):
        out = _var_value(e, point)
    elif isinstance(e, Binary):
        left = _value(e.left, point, memo)
        right = _value(e.right, point, memo)
        if e.op == "+":
            out = left + right
        elif e.op == "-":
            out = left - right
        elif e.op == "*":
            out = left * right
        else:
            if right == 0.0:
                raise DomainError("division by zero")
            out = left / right
    elif isinstance(e, Unary):
        v = _value(e.operand, point, memo)
        if e.op == "neg":
            out = -v
        elif e.op == "sin":
            out = math.sin(v)
        elif e.op == "cos":
            out = math.cos(v)
        elif e.op == "exp":
            try:
                out = math.exp(v)
            except OverflowError as exc:
                raise DomainError(f"exp overflow at {v}") from exc
        elif e.op == "log":
            if v <= 0.0:
                raise DomainError(f"log of non-positive value {v}")
            out = math.log(v)
        else:
            if v < 0.0:
                raise DomainError(f"sqrt of negative value {v}")
            out = math.sqrt(v)
    elif isinstance(e, Power):
        base = _value(e.base, point, memo)
        if e.exponent < 0 and base == 0.0:
            raise DomainError("zero raised to a negative power")
        out = base**e.exponent
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = out
    return out


def evaluate(e: Expression, point: EvalPoint) -> float:
    """Evaluate ``e`` at ``point`` in IEEE double precision."""
    return _value(e, point, {})


# ---------------------------------------------------------------------------
# value + full first-order gradient


def _grad(e: Expression, point: EvalPoint, width: int, memo: dict):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = (e.value, [0.0] * width)
    elif isinstance(e, Var):
        g = [0.0] * width
        if e.kind == "x":
            g[e.index - 1] = 1.0
        else:
            g[len(point.x) + e.index - 1] = 1.0
        out = (_var_value(e, point), g)
    elif isinstance(e, Binary):
        lv, lg = _grad(e.left, point, width, memo)
        rv, rg = _grad(e.right, point, width, memo)
        if e.op == "+":
            out = (lv + rv, [a + b for a, b in zip(lg, rg)])
        elif e.op == "-":
            out = (lv - rv, [a - b for a, b in zip(lg, rg)])
        elif e.op == "*":
            out = (lv * rv, [a * rv + lv * b for a, b in zip(lg, rg)])
        else:
            if rv == 0.0:
                raise DomainError("division by zero")
            q = lv / rv
            out = (q, [(a - q * b) / rv for a, b in zip(lg, rg)])
    elif isinstance(e, Unary):
        v, g = _grad(e.operand, point, width, memo)
        if e.op == "neg":
            out = (-v, [-a for a in g])
        elif e.op == "sin":
            c = math.cos(v)
            out = (math.sin(v), [c * a for a in g])
        elif e.op == "cos":
            s = -math.sin(v)
            out = (math.cos(v), [s * a for a in g])
        elif e.op == "exp":
            try:
                ev = math.exp(v)
            except OverflowError as exc:
                raise DomainError(f"exp overflow at {v}") from exc
            out = (ev, [ev * a for a in g])
        elif e.op == "log":
            if v <= 0.0:
                raise DomainError(f"log of non-positive value {v}")
            out = (math.log(v), [a / v for a in g])
        else:
            if v < 0.0:
                raise DomainError(f"sqrt of negative value {v}")
            if v == 0.0:
                raise DomainError("sqrt has no finite derivative at zero")
            root = math.sqrt(v)
            half = 0.5 / root
            out = (root, [half * a for a in g])
    elif isinstance(e, Power):
        v, g = _grad(e.base, point, width, memo)
        k = e.exponent
        if k < 0 and v == 0.0:
            raise DomainError("zero raised to a negative power")
        if k == 0:
            out = (1.0, [0.0] * width)
        else:
            coeff = k * v ** (k - 1)
            out = (v**k, [coeff * a for a in g])
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = out
    return out


def gradient(e: Expression, point: EvalPoint) -> tuple[float, tuple[float, ...]]:
    """Value and first partials of ``e`` at ``point``.

    The gradient covers every coordinate of the point, base before fiber:
    index ``i`` is the partial with respect to ``x{i+1}`` for ``i < m`` and
    with respect to ``f{i-m+1}`` otherwise.
    """
    width = len(point.x) + len(point.f)
    value, g = _grad(e, point, width, {})
    return value, tuple(g)


def partial(e: Expression, point: EvalPoint, direction: Coordinate) -> float:
    """First partial derivative of ``e`` at ``point`` along ``direction``."""
    kind, index = direction
    value, g = _grad(e, point, len(point.x) + len(point.f), {})
    offset = index - 1 if kind == "x" else len(point.x) + index - 1
    return g[offset]


# ---------------------------------------------------------------------------
# mixed second derivatives via two-direction jets


def _jet(e: Expression, point: EvalPoint, seed1, seed2, memo: dict) -> Jet2:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = Jet2.constant(e.value)
    elif isinstance(e, Var):
        ref = (e.kind, e.index)
        out = Jet2(
            _var_value(e, point),
            1.0 if ref == seed1 else 0.0,
            1.0 if ref == seed2 else 0.0,
            0.0,
        )
    elif isinstance(e, Binary):
        left = _jet(e.left, point, seed1, seed2, memo)
        right = _jet(e.right, point, seed1, seed2, memo)
        if e.op == "+":
            out = left + right
        elif e.op == "-":
            out = left - right
        elif e.op == "*":
            out = left * right
        else:
            out = left / right
    elif isinstance(e, Unary):
        a = _jet(e.operand, point, seed1, seed2, memo)
        if e.op == "neg":
            out = -a
        elif e.op == "sin":
            out = jet_sin(a)
        elif e.op == "cos":
            out = jet_cos(a)
        elif e.op == "exp":
            out = jet_exp(a)
        elif e.op == "log":
            out = jet_log(a)
        else:
            out = jet_sqrt(a)
    elif isinstance(e, Power):
        out = jet_pow(_jet(e.base, point, seed1, seed2, memo), e.exponent)
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = out
    return out


def mixed_second(
    e: Expression, point: EvalPoint, first: Coordinate, second: Coordinate
) -> float:
    """Mixed second derivative of ``e`` at ``point``.

    ``first`` and ``second`` may name the same coordinate, in which case this
    is the plain second derivative along it.  Symmetric in its directions by
    construction (the jet rules are symmetric under swapping the two seeds).
    """
    return _jet(e, point, first, second, {}).d12
