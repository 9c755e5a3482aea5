"""Tests for the expression language: parsing, printing, round-trips."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvcheck.errors import DomainError, ExprSyntaxError, IndexOutOfRange, UnknownIdentifier
from curvcheck.exprdsl import Binary, Const, Power, Unary, Var, max_indices, parse, unparse
from curvcheck.numcore import EvalPoint, evaluate

DIMS = (3, 3)


def test_parse_mixed_example():
    tree = parse("x1*sin(f1) + 2", (2, 1))
    assert tree == Binary(
        "+",
        Binary("*", Var("x", 1), Unary("sin", Var("f", 1))),
        Const(2.0),
    )


def test_parse_incomplete_input_reports_offset():
    with pytest.raises(ExprSyntaxError) as excinfo:
        parse("x1 +", (1, 1))
    assert excinfo.value.offset == 4


def test_parse_fiber_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        parse("f3", (2, 2))


def test_parse_base_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        parse("x3", (2, 2))


def test_parse_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("y1", DIMS)
    with pytest.raises(UnknownIdentifier):
        parse("banana", DIMS)
    with pytest.raises(UnknownIdentifier):
        parse("x0", DIMS)


def test_parse_rejects_implicit_multiplication():
    with pytest.raises(ExprSyntaxError):
        parse("2x1", DIMS)


def test_parse_function_requires_parentheses():
    with pytest.raises(ExprSyntaxError):
        parse("sin x1", DIMS)


def test_parse_unclosed_parenthesis():
    with pytest.raises(ExprSyntaxError):
        parse("(x1 + f1", DIMS)


def test_parse_rejects_fractional_exponent():
    with pytest.raises(ExprSyntaxError):
        parse("x1^2.5", DIMS)


def test_parse_rejects_nonpositive_dims():
    with pytest.raises(ValueError):
        parse("x1", (0, 1))
    with pytest.raises(ValueError):
        parse("x1", (1, 0))


def test_fiber_alias_normalizes_to_f():
    assert parse("v2", (1, 2)) == Var("f", 2)
    assert parse("v1 + f1", (1, 1)) == Binary("+", Var("f", 1), Var("f", 1))


def test_pi_is_a_constant():
    assert parse("pi", (1, 1)) == Const(math.pi)


def test_precedence_and_associativity():
    x1, x2, x3 = Var("x", 1), Var("x", 2), Var("x", 3)
    assert parse("2*x1^2", DIMS) == Binary("*", Const(2.0), Power(x1, 2))
    # Unary minus binds looser than ^.
    assert parse("-x1^2", DIMS) == Unary("neg", Power(x1, 2))
    assert parse("x1 - x2 - x3", DIMS) == Binary("-", Binary("-", x1, x2), x3)
    assert parse("x1/x2/x3", DIMS) == Binary("/", Binary("/", x1, x2), x3)
    assert parse("x1 + x2*x3", DIMS) == Binary("+", x1, Binary("*", x2, x3))
    assert parse("(x1 + x2)*x3", DIMS) == Binary("*", Binary("+", x1, x2), x3)


def test_parse_negative_exponent():
    assert parse("x1^-2", DIMS) == Power(Var("x", 1), -2)


def test_whitespace_insensitive():
    assert parse("x1+f1", (1, 1)) == parse("  x1 +   f1 ", (1, 1))


def test_parse_determinism():
    for source in ("x1*sin(f1) + 2", "(x1 + x2)^3/f1", "-sqrt(x1) - pi"):
        assert parse(source, DIMS) == parse(source, DIMS)


def test_unparse_examples():
    assert unparse(Const(2.0)) == "2"
    assert unparse(Binary("+", Var("x", 1), Var("f", 1))) == "x1 + f1"
    assert unparse(Power(Var("f", 1), 2)) == "f1^2"


def test_unparse_parenthesizes_only_when_needed():
    x1, x2, f1 = Var("x", 1), Var("x", 2), Var("f", 1)
    assert unparse(Binary("*", Binary("+", x1, x2), f1)) == "(x1 + x2)*f1"
    assert unparse(Binary("-", x1, Binary("-", x2, f1))) == "x1 - (x2 - f1)"
    assert unparse(Unary("neg", Binary("+", x1, x2))) == "-(x1 + x2)"
    assert unparse(Power(Binary("+", x1, x2), 2)) == "(x1 + x2)^2"
    assert unparse(Power(Const(2.0), -3)) == "2^-3"
    assert unparse(Unary("sin", Binary("+", x1, x2))) == "sin(x1 + x2)"


def test_str_is_unparse():
    tree = parse("x1 + f1^2", (1, 1))
    assert str(tree) == unparse(tree)


def test_nodes_are_hashable_and_compare_structurally():
    assert len({Const(2.0), Const(2.0)}) == 1
    table = {parse("x1 + f1", (1, 1)): "sum"}
    assert table[Binary("+", Var("x", 1), Var("f", 1))] == "sum"


def test_max_indices():
    assert max_indices(parse("x2*sin(f1) + v3", (2, 3))) == (2, 3)
    assert max_indices(Const(1.0)) == (0, 0)
    assert max_indices(parse("x1^2", (1, 1))) == (1, 0)


# --- generated round-trips -------------------------------------------------

# The parser never produces negative Const nodes, so the generator follows
# the same normal form (a leading minus becomes a neg node).
_consts = st.floats(
    min_value=0.0, max_value=1e3, allow_nan=False, allow_infinity=False
).map(Const)
_vars = st.one_of(
    st.integers(1, DIMS[0]).map(lambda i: Var("x", i)),
    st.integers(1, DIMS[1]).map(lambda i: Var("f", i)),
)
_trees = st.recursive(
    st.one_of(_consts, _vars),
    lambda children: st.one_of(
        st.tuples(st.sampled_from(["neg", "sin", "cos", "exp", "log", "sqrt"]), children).map(
            lambda t: Unary(*t)
        ),
        st.tuples(st.sampled_from(["+", "-", "*", "/"]), children, children).map(
            lambda t: Binary(*t)
        ),
        st.tuples(children, st.integers(-3, 3)).map(lambda t: Power(*t)),
    ),
    max_leaves=12,
)


@settings(max_examples=200)
@given(_trees)
def test_roundtrip_parse_unparse(tree):
    assert parse(unparse(tree), DIMS) == tree


@settings(max_examples=100)
@given(_trees)
def test_roundtrip_preserves_evaluation(tree):
    point = EvalPoint((0.7, -0.3, 1.1), (0.4, -1.2, 0.9))
    reparsed = parse(unparse(tree), DIMS)

    def run(e):
        try:
            return ("ok", evaluate(e, point))
        except DomainError:
            return ("domain", None)
        except OverflowError:
            return ("overflow", None)

    assert run(reparsed) == run(tree)
