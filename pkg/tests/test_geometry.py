from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from multdirac.errors import ChartMismatch, DegreeOverflow, DegreeUnderflow, PoleAtPoint
from multdirac.geometry import (
    Chart,
    KForm,
    SmoothMap,
    VectorAlong,
    VectorField,
    exterior_derivative,
    interior_product,
    jacobian,
    lie_bracket,
    lie_derivative_components,
    lie_derivative_one_form,
    pullback_form,
    pushforward_at,
    restrict_along,
)

from .conftest import polynomials, rational_functions, small_rationals

R1 = Chart("R", ["x"])
R2 = Chart("R2", ["x", "y"])
R3 = Chart("R3", ["x", "y", "z"])
UV = Chart("U", ["u", "v"])


def vf(chart, *comps):
    return VectorField(chart, list(comps))


def one_form(chart, *comps):
    return KForm.from_one_form(chart, list(comps))


def mat(M):
    return [[str(e) for e in row] for row in M]


# -- examples --------------------------------------------------------------------


class TestJacobian:
    def test_identity(self):
        assert mat(jacobian(SmoothMap.identity(R2))) == [["1", "0"], ["0", "1"]]

    def test_pair_multiplication(self):
        m = SmoothMap(R3, R2, ["x", "z"])
        assert mat(jacobian(m)) == [["1", "0", "0"], ["0", "0", "1"]]

    def test_square(self):
        assert mat(jacobian(SmoothMap(R1, R1, ["x^2"]))) == [["2*x"]]


class TestPushforward:
    def test_identity(self):
        p = R2.point([3, -1])
        assert pushforward_at(SmoothMap.identity(R2), p, [5, Fraction(1, 2)]) == [5, Fraction(1, 2)]

    def test_pair_multiplication(self):
        # ((2,3),(3,5)) on the composable chart is (x,y,z) = (2,3,5)
        comp = Chart("G2", ["x", "y", "z"])
        m = SmoothMap(comp, R2, ["x", "z"])
        # composable tangent vector ((1,4),(4,7)) is (1,4,7)
        assert pushforward_at(m, comp.point([2, 3, 5]), [1, 4, 7]) == [1, 7]

    def test_constant_map(self):
        m = SmoothMap(R2, R2, ["1", "2"])
        assert pushforward_at(m, R2.point([0, 0]), [3, 4]) == [0, 0]

    def test_pole(self):
        m = SmoothMap(R2, R1, ["1/x"])
        with pytest.raises(PoleAtPoint):
            pushforward_at(m, R2.point([0, 1]), [1, 0])


class TestBracket:
    def test_coordinate_fields_commute(self):
        assert lie_bracket(vf(R2, 1, 0), vf(R2, 0, 1)).is_zero()

    def test_x_dy_with_dx(self):
        assert lie_bracket(vf(R2, 0, "x"), vf(R2, 1, 0)) == vf(R2, 0, -1)

    def test_chart_mismatch(self):
        with pytest.raises(ChartMismatch):
            lie_bracket(vf(R2, 1, 0), vf(UV, 1, 0))


class TestExteriorDerivative:
    def test_x_dy(self):
        assert exterior_derivative(one_form(R2, 0, "x")) == KForm(R2, 2, {(0, 1): 1})

    def test_x_dy_dz(self):
        w = KForm(R3, 2, {(1, 2): "x"})
        assert exterior_derivative(w) == KForm(R3, 3, {(0, 1, 2): 1})

    def test_overflow(self):
        with pytest.raises(DegreeOverflow):
            exterior_derivative(KForm(R3, 3, {(0, 1, 2): 1}))


class TestLieDerivative:
    def test_dx_of_x_dy(self):
        assert lie_derivative_one_form(vf(R2, 1, 0), one_form(R2, 0, "x")) == one_form(R2, 0, 1)

    def test_of_zero(self):
        assert lie_derivative_one_form(vf(R2, "x*y", "x^2"), one_form(R2, 0, 0)).is_zero()

    def test_x_dy_of_dy(self):
        assert lie_derivative_one_form(vf(R2, 0, "x"), one_form(R2, 0, 1)) == one_form(R2, 1, 0)


class TestInteriorProduct:
    def test_dx_into_area(self):
        assert interior_product(vf(R2, 1, 0), KForm(R2, 2, {(0, 1): 1})) == one_form(R2, 0, 1)

    def test_x_dy_into_area(self):
        assert interior_product(vf(R2, 0, "x"), KForm(R2, 2, {(0, 1): 1})) == one_form(R2, "-x", 0)

    def test_underflow(self):
        with pytest.raises(DegreeUnderflow):
            interior_product(vf(R2, 1, 0), KForm(R2, 0, {(): "x"}))


class TestPullback:
    def test_square(self):
        assert pullback_form(SmoothMap(R1, R1, ["x^2"]), one_form(R1, 1)) == one_form(R1, "2*x")

    def test_identity(self):
        w = KForm(R3, 2, {(0, 1): "y", (1, 2): "x*z"})
        assert pullback_form(SmoothMap.identity(R3), w) == w

    def test_pair_groupoid_form_is_multiplicative(self):
        # G = ℝ²×ℝ², ω_G = pr₁*ω − pr₂*ω with ω = dx∧dy
        G = Chart("G", ["x1", "y1", "x2", "y2"])
        comp = Chart("G2", ["a", "b", "c", "d", "e", "f"])  # (a,b) -> (c,d) -> (e,f)
        wG = KForm(G, 2, {(0, 1): 1, (2, 3): -1})
        m = SmoothMap(comp, G, ["a", "b", "e", "f"])
        pr1 = SmoothMap(comp, G, ["a", "b", "c", "d"])
        pr2 = SmoothMap(comp, G, ["c", "d", "e", "f"])
        assert pullback_form(m, wG) == pullback_form(pr1, wG) + pullback_form(pr2, wG)


class TestRestrict:
    M = Chart("M", ["m"])
    diag = SmoothMap(M, R2, ["m", "m"])

    def test_euler_field_along_diagonal(self):
        r = restrict_along(self.diag, vf(R2, "x", "y"))
        assert isinstance(r, VectorAlong)
        assert [str(c) for c in r.components] == ["m", "m"]

    def test_difference_form_vanishes(self):
        assert restrict_along(self.diag, one_form(R2, 1, -1)).is_zero()

    def test_identity(self):
        w = one_form(R2, "x*y", "1/(1+x^2)")
        assert restrict_along(SmoothMap.identity(R2), w) == w
        X = vf(R2, "y", "x")
        assert list(restrict_along(SmoothMap.identity(R2), X).components) == list(X.components)


# -- properties ------------------------------------------------------------------


def maps(source: Chart, target: Chart, degree: int = 2):
    return st.lists(polynomials(source, degree), min_size=target.dim, max_size=target.dim).map(
        lambda cs: SmoothMap(source, target, cs)
    )


def fields(chart: Chart):
    return st.lists(rational_functions(chart), min_size=chart.dim, max_size=chart.dim).map(
        lambda cs: VectorField(chart, cs)
    )


def forms(chart: Chart, degree: int):
    from itertools import combinations

    keys = list(combinations(range(chart.dim), degree))
    return st.lists(rational_functions(chart), min_size=len(keys), max_size=len(keys)).map(
        lambda cs: KForm(chart, degree, dict(zip(keys, cs)))
    )


@given(maps(R2, UV), maps(R3, R2))
def test_chain_rule(m, n):
    lhs = jacobian(m.compose(n))
    Jm = n.pull_matrix(jacobian(m))
    Jn = jacobian(n)
    for i in range(UV.dim):
        for j in range(R3.dim):
            acc = R3.zero()
            for k in range(R2.dim):
                acc = acc + Jm[i][k] * Jn[k][j]
            assert (lhs[i][j] - acc).is_zero()


@given(st.sampled_from([0, 1]), st.data())
def test_d_squared_vanishes(k, data):
    w = data.draw(forms(R3, k))
    assert exterior_derivative(exterior_derivative(w)).is_zero()


@given(fields(R2), forms(R2, 1))
def test_cartan_matches_algebraic_expansion(X, alpha):
    cartan = lie_derivative_one_form(X, alpha).one_form_components()
    algebraic = lie_derivative_components(list(X.components), alpha.one_form_components(), R2)
    assert all((a - b).is_zero() for a, b in zip(cartan, algebraic))


@given(maps(UV, R3), st.sampled_from([0, 1]), st.data())
def test_pullback_commutes_with_d(m, k, data):
    w = data.draw(forms(R3, k))
    assert pullback_form(m, exterior_derivative(w)) == exterior_derivative(pullback_form(m, w))


@given(fields(R3), forms(R3, 2))
def test_double_contraction_vanishes(X, w):
    assert interior_product(X, interior_product(X, w)).is_zero()


@given(fields(R2))
def test_bracket_is_antisymmetric(X):
    assert lie_bracket(X, X).is_zero()


@given(maps(R2, R2, 1), small_rationals, small_rationals)
def test_pushforward_matches_evaluated_jacobian(m, a, b):
    p = R2.point([a, b])
    J = [[e.evaluate(p.as_dict()) for e in row] for row in jacobian(m)]
    assert pushforward_at(m, p, [1, 2]) == [row[0] + 2 * row[1] for row in J]
