"""Shared strategies and fixtures."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from multdirac.dirac import Bivector, from_bivector, from_two_form
from multdirac.geometry import Chart, KForm
from multdirac.groupoid import abelian_group, cotangent_groupoid, pair_dirac

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

small_rationals = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


def monomials(n: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            out.append(tuple(combo))
    return out


@st.composite
def polynomial_text(draw, names: tuple[str, ...], degree: int = 2) -> str:
    """A random polynomial of the given degree, written in the input grammar."""
    terms = []
    for mono in monomials(len(names), degree):
        c = draw(small_rationals)
        if c == 0:
            continue
        factors = [f"({c})"] + [names[i] for i in mono]
        terms.append("*".join(factors))
    return " + ".join(terms) if terms else "0"


def polynomials(chart: Chart, degree: int = 2):
    return polynomial_text(chart.coordinates, degree).map(chart.parse)


@st.composite
def rational_functions(draw, chart: Chart, degree: int = 2):
    num = draw(polynomials(chart, degree))
    den = draw(polynomials(chart, 1).filter(lambda f: not f.is_zero()))
    return num / den


@pytest.fixture(scope="session")
def plane() -> Chart:
    return Chart("M", ["x", "y"])


@pytest.fixture(scope="session")
def space() -> Chart:
    return Chart("M", ["x", "y", "z"])


@pytest.fixture(scope="session")
def pair_pi(plane):
    """Pair groupoid of ℝ² with D_M = graph(x ∂x∧∂y)."""
    DM = from_bivector(Bivector(plane, {(0, 1): "x"}), "x∂x∧∂y")
    gd, frame = pair_dirac(DM)
    return DM, gd, frame


@pytest.fixture(scope="session")
def pair_omega(plane):
    """Pair groupoid of ℝ² with D_M = graph(y dx∧dy)."""
    DM = from_two_form(KForm(plane, 2, {(0, 1): "y"}), "y dx∧dy")
    gd, frame = pair_dirac(DM)
    return DM, gd, frame


@pytest.fixture(scope="session")
def pair_nonclosed(space):
    """Pair groupoid of ℝ³ with D_M = graph(x dy∧dz), which is not closed."""
    DM = from_two_form(KForm(space, 2, {(1, 2): "x"}), "x dy∧dz")
    gd, frame = pair_dirac(DM)
    return DM, gd, frame


@pytest.fixture(scope="session")
def poisson_plane():
    """(ℝ², +) over a point with π = x ∂x∧∂y."""
    G = Chart("R2", ["x", "y"])
    gd = abelian_group(G)
    return gd, from_bivector(Bivector(G, {(0, 1): "x"}), "x∂x∧∂y")


@pytest.fixture(scope="session")
def cotangent_line():
    """T*ℝ ⇉ ℝ with ω = dq∧dpq."""
    gd = cotangent_groupoid(Chart("R", ["q"]))
    return gd, from_two_form(KForm(gd.G, 2, {(0, 1): "1"}), "dq∧dp")
