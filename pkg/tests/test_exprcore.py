from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from multdirac.errors import (
    DivisionByZeroPolynomial,
    ExpressionSyntaxError,
    IdenticallyZeroDenominator,
    PoleAtPoint,
    UnknownVariable,
)
from multdirac.exprcore import (
    RationalFunction,
    evaluate_at,
    is_identically_zero,
    parse_expression,
    partial_derivative,
    substitute,
)
from multdirac.geometry import Chart

from .conftest import polynomials, rational_functions, small_rationals

XY = ("x", "y")
C = Chart("C", XY)


def P(text, names=XY):
    return parse_expression(text, names)


class TestParse:
    def test_half_coefficient_is_normalised(self):
        f = P("x^2 - y/2")
        # stored with monic denominator, integer presentation on request
        assert str(f.den) == "1"
        num, den = f.integer_form()
        assert str(num) == "2*x^2 - y"
        assert str(den) == "2"

    def test_zero(self):
        assert P("0", ("x",)).is_zero()

    def test_difference_of_squares_cancels(self):
        assert P("(x+y)*(x-y) - x^2 + y^2").is_zero()

    def test_unary_minus_and_power(self):
        assert P("-x^2") == -(P("x") * P("x"))

    def test_rational_literal(self):
        assert P("3/4").constant_value() == Fraction(3, 4)

    def test_whitespace_is_insignificant(self):
        assert P(" x *  ( y+1 ) ") == P("x*(y+1)")

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            P("z + 1")

    def test_division_by_literal_zero(self):
        with pytest.raises(DivisionByZeroPolynomial):
            P("x / (y - y)")

    @pytest.mark.parametrize(
        "text, position",
        [("x +", 3), ("(x", 2), ("x ^ y", 4), ("x ^ -1", 4), ("2 3", 2), ("x $ y", 2)],
    )
    def test_syntax_errors_carry_position(self, text, position):
        with pytest.raises(ExpressionSyntaxError) as err:
            P(text)
        assert err.value.position == position


class TestDerivative:
    def test_power_rule(self):
        assert partial_derivative(P("x^2*y"), "x") == P("2*x*y")

    def test_constant(self):
        assert partial_derivative(P("1"), "x").is_zero()

    def test_quotient_rule(self):
        assert partial_derivative(P("x/(x+y)"), "x") == P("y/(x+y)^2")

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            partial_derivative(P("x"), "w")


class TestSubstitute:
    def test_collapse_to_one_variable(self):
        f = substitute(P("x+y"), {"x": P("u", ("u",)), "y": P("u", ("u",))})
        assert f == P("2*u", ("u",))

    def test_identity(self):
        f = P("x", ("x",))
        assert substitute(f, {"x": f}) == f

    def test_identically_zero_denominator(self):
        u = ("u",)
        with pytest.raises(IdenticallyZeroDenominator):
            substitute(P("1/x", ("x",)), {"x": P("u - u", u)})


class TestZeroAndEvaluate:
    def test_zero_tests(self):
        assert is_identically_zero(P("0"))
        assert is_identically_zero(P("x - x"))
        assert not is_identically_zero(P("x*y - y*x + 1"))

    def test_evaluate(self):
        assert evaluate_at(P("x/(x+y)"), {"x": 1, "y": 1}) == Fraction(1, 2)
        assert evaluate_at(P("(x^2-y)/3"), {"x": 2, "y": 1}) == 1

    def test_pole(self):
        with pytest.raises(PoleAtPoint):
            evaluate_at(P("x/(x+y)"), {"x": 1, "y": -1})


# -- properties ------------------------------------------------------------------


@given(polynomials(C))
def test_canonical_form_is_idempotent(f):
    again = RationalFunction.from_polynomials(f.num, f.den)
    assert again == f
    assert str(again) == str(f)
    assert parse_expression(str(f), XY) == f


@given(rational_functions(C), rational_functions(C), rational_functions(C))
def test_ring_axioms(f, g, h):
    assert is_identically_zero((f + g) + h - (f + (g + h)))
    assert is_identically_zero((f * g) * h - f * (g * h))
    assert is_identically_zero(f * (g + h) - (f * g + f * h))
    assert is_identically_zero(f * g - g * f)


@given(rational_functions(C), rational_functions(C), st.sampled_from(XY))
def test_leibniz_rule(f, g, v):
    lhs = partial_derivative(f * g, v)
    rhs = f * partial_derivative(g, v) + partial_derivative(f, v) * g
    assert is_identically_zero(lhs - rhs)


@given(rational_functions(C), polynomials(Chart("U", ("u", "w")), 1), polynomials(Chart("U", ("u", "w")), 2),
       small_rationals, small_rationals)
def test_evaluate_commutes_with_substitute(f, a, b, u0, w0):
    sigma = {"x": a, "y": b}
    try:
        composed = substitute(f, sigma)
    except IdenticallyZeroDenominator:
        return
    point = {"u": u0, "w": w0}
    try:
        lhs = evaluate_at(composed, point)
        inner = {"x": evaluate_at(a, point), "y": evaluate_at(b, point)}
        rhs = evaluate_at(f, inner)
    except PoleAtPoint:
        return
    assert lhs == rhs
