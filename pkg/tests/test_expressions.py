"""
Tests for the form expression language: parsing, canonical text and evaluation.
"""

import cmath

import numpy as np
import pytest

from src.errors import ExpressionError, ParseError
from src.expressions import AbsPow, Binary, Literal, Phase, Unary, Var, eval_batch, eval_expr, max_variable, parse_expr, to_text


@pytest.mark.parametrize(
    "text, x, expected",
    [
        ("1 + 2 * 3", [], 7),
        ("x1 - x2 - 1", [5, 1], 3),
        ("-2 * 3", [], -6),
        ("--x1", [2j], 2j),
        ("3i", [], 3j),
        ("i * i", [], -1),
        ("1e-3 * x1", [1000], 1),
        ("conj(x1) * x1", [3 + 4j], 25),
        ("abs(x1)", [3 - 4j], 5),
        ("re(x1) + im(x1)", [2 + 7j], 9),
        ("x1 / x2", [1, 4], 0.25),
        ("abspow(x1, 2)", [3 + 4j], 25),
        ("abspow(x1, -1)", [0.5], 2),
        ("abspow(x1, 0)", [0], 1),
        ("abspow0(x1, 0)", [0], 0),
        ("abspow(x1, 1.5)", [0], 0),
    ],
)
def test_eval_examples(text, x, expected):
    d = max(len(x), 1)
    assert eval_expr(parse_expr(text, d), x) == pytest.approx(expected, abs=1e-15)


def test_phase_literal():
    value = eval_expr(parse_expr("phase(-0.5) * x1", 1), [2])
    assert value == pytest.approx(2 * cmath.exp(-0.5j), abs=1e-15)


def test_parse_tree_shape():
    assert parse_expr("x1 + x2 * 2", 2) == Binary("+", Var(1), Binary("*", Var(2), Literal(2 + 0j)))
    assert parse_expr("-conj(x1)", 1) == Unary("neg", Unary("conj", Var(1)))
    assert parse_expr("abspow0(x1, -2)", 1) == AbsPow(Var(1), -2.0, vanish_at_zero=True)
    assert parse_expr("phase(3)", 1) == Phase(3.0)
    assert max_variable(parse_expr("x3 * conj(x1)", 4)) == 3
    assert max_variable(parse_expr("2", 1)) == 0


@pytest.mark.parametrize(
    "text, position",
    [
        ("x1 + * x2", 5),
        ("x3", 0),
        ("(x1 + 1", 7),
        ("x1 $ 2", 3),
        ("foo(x1)", 0),
        ("abspow(x1, 2i)", 11),
        ("x1 x2", 3),
    ],
)
def test_parse_errors_report_position(text, position):
    with pytest.raises(ParseError) as info:
        parse_expr(text, 2)
    assert info.value.position == position


def test_arity_must_be_positive():
    with pytest.raises(ParseError):
        parse_expr("1", 0)


@pytest.mark.parametrize(
    "text",
    [
        "x1 * conj(x2) - (2 - 3i) / x1",
        "abspow(x1 - 1, -0.5) * phase(1.25)",
        "-(-1.5) + re(x2) * im(x1)",
        "abspow0(x2, 2.5e-3)",
    ],
)
def test_canonical_text_is_stable(text):
    once = to_text(parse_expr(text, 2))
    assert to_text(parse_expr(once, 2)) == once


@pytest.mark.parametrize("text, x", [("1 / x1", [0]), ("abspow(x1, -1)", [0]), ("x2", [1])])
def test_eval_errors(text, x):
    expr = parse_expr(text, 2)
    with pytest.raises(ExpressionError):
        eval_expr(expr, x)


def test_eval_batch_marks_invalid_points():
    expr = parse_expr("1 / x1 + abspow(x2, 2)", 2)
    X = np.array([[1, 0, 2j], [2, 1, 0]], dtype=complex)
    values, valid = eval_batch(expr, X)
    assert valid.tolist() == [True, False, True]
    assert values[1] == 0
    assert values[0] == pytest.approx(5)
    assert values[2] == pytest.approx(-0.5j)
