import pytest

from multdirac.bcourant import build_b
from multdirac.dirac import Bivector, DiracFrame, PSection, from_bivector, from_two_form
from multdirac.geometry import Chart, KForm, SmoothMap
from multdirac.groupoid import Bisection, abelian_group, group_over_point, pair_dirac
from multdirac.homogeneous import (
    SubgroupoidData,
    UnitDirac,
    build_homogeneous,
    check_bisection_invariance,
    check_closed_equivalence,
    check_restriction,
    check_sandwich,
    check_structure,
    check_subgroupoid,
    check_uniqueness,
    closed_verdicts,
    drinfeld_classify,
    from_subalgebroid,
    g_itself,
    pair_unit_dirac,
    same_dirac,
    verdict_of,
)

R3 = Chart("M", ["x", "y", "z"])


def columns(P, rows):
    return [[P.lift(c) for c in row] for row in rows]


@pytest.fixture(scope="module")
def translation():
    """Pair groupoid of ℝ³ with x∂y∧∂z; H generated by x-translations."""
    DM = from_bivector(Bivector(R3, {(1, 2): "x"}), "x∂y∧∂z")
    gd, frame = pair_dirac(DM)
    G = gd.G
    K1 = Bisection(SmoothMap(R3, G, ["x", "y", "z", "x + 1", "y", "z"]), note="K1")
    K2 = Bisection(SmoothMap(R3, G, ["x", "y", "z", "x + y", "y", "z"]), note="K2")
    H = SubgroupoidData(columns(R3, [[0, 0, 0, 1, 0, 0]]), [K1, K2], "x-translations")
    return DM, gd, frame, H


def quotient_slot(coefficient: str) -> DiracFrame:
    """Graph of coefficient·dy∧dz: pulled back from the quotient by x-translations when x-free."""
    return from_two_form(KForm(R3, 2, {(1, 2): coefficient}), f"{coefficient} dy∧dz")


@pytest.fixture(scope="module")
def poisson3():
    G = Chart("R3", ["x", "y", "z"])
    gd = abelian_group(G)
    return gd, from_bivector(Bivector(G, {(0, 1): "x"}), "x∂x∧∂y")


def group_H(gd, direction):
    h = Bisection(SmoothMap(gd.P, gd.G, direction), note="h")
    return SubgroupoidData(columns(gd.P, [direction]), [h], "H")


def heisenberg():
    Hc = Chart("Heis", ["a", "b", "c"])
    gd = group_over_point(Hc, ["a_1 + a_2", "b_1 + b_2", "c_1 + c_2 + a_1*b_2"], ["-a", "-b", "-c + a*b"], [0, 0, 0])
    return gd, from_bivector(Bivector(Hc, {}), "T*G")


class TestGItself:
    @pytest.mark.parametrize("fixture", ["pair_pi", "pair_omega", "cotangent_line", "poisson_plane"])
    def test_recovers_frame(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        D = g_itself(gd, frame)
        assert check_sandwich(gd, frame, D).passed
        built = build_homogeneous(gd, frame, D)
        assert built.report.passed
        assert same_dirac(built.frame, frame) == []
        assert check_restriction(gd, frame, built.frame, D).passed

    def test_trivial_subgroupoid_classifies_g_itself(self, pair_pi):
        _, gd, frame = pair_pi
        H = SubgroupoidData([], [Bisection(gd.unit, note="ε")])
        rep = drinfeld_classify(gd, frame, H, g_itself(gd, frame), samples=2)
        assert rep.passed, rep.to_text()
        assert verdict_of(rep) == "homogeneous, closed"


class TestSandwich:
    def test_generator_outside_total_space(self, pair_pi):
        _, gd, frame = pair_pi
        P = gd.P
        D = g_itself(gd, frame)
        # (∂x_1, 0) along the units pairs nontrivially with Iˢ
        bad = UnitDirac(P, D.columns[:-1] + columns(P, [[1, 0, 0, 0, 0, 0, 0, 0]]), "forced")
        rep = check_sandwich(gd, frame, bad)
        assert not rep.passed
        assert any(c.witnesses for c in rep.failures)

    def test_translation_family(self, translation):
        DM, gd, frame, H = translation
        D = pair_unit_dirac(gd, DM, quotient_slot("y + 1"))
        assert check_sandwich(gd, frame, D, H).passed


class TestBuild:
    def test_pair_family_is_product(self, translation):
        DM, gd, frame, H = translation
        Dbar = quotient_slot("y + 1")
        built = build_homogeneous(gd, frame, pair_unit_dirac(gd, DM, Dbar))
        # D_M ⊕ D̄ on M × M
        G = gd.G
        first = SmoothMap(G, R3, G.coords()[:3])
        second = SmoothMap(G, R3, G.coords()[3:])
        z = G.zeros(3)
        oracle = [PSection(G, first.pull_column(s.vector) + z, first.pull_column(s.covector) + z) for s in DM.sections]
        oracle += [PSection(G, z + second.pull_column(s.vector), z + second.pull_column(s.covector)) for s in Dbar.sections]
        assert same_dirac(built.frame, DiracFrame(G, oracle)) == []

    def test_poisson_family_contains_core_block(self, poisson3):
        gd, frame = poisson3
        H = group_H(gd, [1, 0, 0])
        D = from_subalgebroid(gd, frame, H.AH)
        built = build_homogeneous(gd, frame, D)
        rep = check_structure(gd, frame, built.frame, H)
        assert rep.passed, rep.to_text()

    def test_corrupted_frame_fails_restriction(self, translation):
        DM, gd, frame, H = translation
        D = pair_unit_dirac(gd, DM, quotient_slot("y + 1"))
        wrong = build_homogeneous(gd, frame, pair_unit_dirac(gd, DM, quotient_slot("y + 2"))).frame
        rep = check_restriction(gd, frame, wrong, D)
        assert not rep.passed
        assert rep.get("𝔇 ⊆ D|_P").witnesses

    def test_uniqueness(self, translation):
        DM, gd, frame, H = translation
        D = pair_unit_dirac(gd, DM, quotient_slot("y + 1"))
        built = build_homogeneous(gd, frame, D)
        assert check_uniqueness(gd, frame, built.frame).passed


class TestInvariance:
    def test_g_itself_trivial_h(self, translation):
        DM, gd, frame, _ = translation
        bf, _ = build_b(gd, frame)
        H = SubgroupoidData([], [Bisection(gd.unit, note="ε")])
        assert check_bisection_invariance(gd, frame, bf, g_itself(gd, frame), H, samples=2).passed

    def test_g_itself_translations_of_tangent_structure(self):
        gd, frame = pair_dirac(from_two_form(KForm(R3, 2, {}), "TM"))
        G = gd.G
        K = Bisection(SmoothMap(R3, G, ["x", "y", "z", "x + y", "y", "z"]), note="K")
        H = SubgroupoidData(columns(R3, [[0, 0, 0, 1, 0, 0]]), [K])
        D = g_itself(gd, frame)
        assert check_sandwich(gd, frame, D, H).passed
        bf, _ = build_b(gd, frame)
        assert check_bisection_invariance(gd, frame, bf, D, H, samples=2).passed

    def test_g_itself_is_no_datum_for_translations_of_x_dependent_base(self, translation):
        DM, gd, frame, H = translation
        assert check_sandwich(gd, frame, g_itself(gd, frame), H).get("AH × 0 ⊆ 𝔇").status == "fail"

    def test_translation_invariant_family(self, translation):
        DM, gd, frame, H = translation
        bf, _ = build_b(gd, frame)
        D = pair_unit_dirac(gd, DM, quotient_slot("y + 1"))
        assert check_bisection_invariance(gd, frame, bf, D, H, samples=3).passed

    def test_x_dependent_family_fails_with_witness(self, translation):
        DM, gd, frame, H = translation
        bf, _ = build_b(gd, frame)
        D = pair_unit_dirac(gd, DM, quotient_slot("x"))
        assert check_sandwich(gd, frame, D, H).passed
        rep = check_bisection_invariance(gd, frame, bf, D, H, samples=3)
        check = rep.get("ℬ(H)-invariant")
        assert check.status == "fail"
        w = check.witnesses[0]
        assert {"point", "generator_bisection", "column", "image_point", "image"} <= set(w)


class TestClosedEquivalence:
    def test_poisson_plane_extremes(self, poisson_plane):
        gd, frame = poisson_plane
        bf, _ = build_b(gd, frame)
        AG = columns(gd.P, [[1, 0], [0, 1]])
        for D in (from_subalgebroid(gd, frame, AG), g_itself(gd, frame)):
            rep = check_closed_equivalence(gd, frame, bf, D)
            assert closed_verdicts(rep) == (True, True)

    def test_pair_non_closed_quotient(self, translation):
        DM, gd, frame, H = translation
        bf, _ = build_b(gd, frame)
        rep = check_closed_equivalence(gd, frame, bf, pair_unit_dirac(gd, DM, quotient_slot("x")))
        assert closed_verdicts(rep) == (False, False)
        assert rep.get("Courant tensor of D vanishes").witnesses

    def test_pair_closed_quotient(self, translation):
        DM, gd, frame, H = translation
        bf, _ = build_b(gd, frame)
        rep = check_closed_equivalence(gd, frame, bf, pair_unit_dirac(gd, DM, quotient_slot("y + 1")))
        assert closed_verdicts(rep) == (True, True)


# Double of the Poisson group (ℝ³, +) with π = x∂x∧∂y: 𝔤 abelian, 𝔤* with [dx, dy] = dx.
DUAL_BRACKET = {(0, 1): [1, 0, 0], (1, 0): [-1, 0, 0]}


def _double_bracket(a, b):
    X, xi, Y, eta = a[:3], a[3:], b[:3], b[3:]

    def star(u, v):
        out = [0, 0, 0]
        for (i, j), c in DUAL_BRACKET.items():
            for k in range(3):
                out[k] += u[i] * v[j] * c[k]
        return out

    def coad_star(u, Z):
        # (𝔏*_u Z)_k = −[u, e^k](Z)
        return [-sum(s * z for s, z in zip(star(u, [int(i == k) for i in range(3)]), Z)) for k in range(3)]

    vec = [p - q for p, q in zip(coad_star(xi, Y), coad_star(eta, X))]
    return vec + star(xi, eta)


def _is_subalgebra(direction):
    import itertools

    from multdirac import linalg

    AH = [list(direction)]
    ann = linalg.nullspace(AH, 3)
    basis = [list(u) + [0, 0, 0] for u in AH] + [[0, 0, 0] + list(a) for a in ann]
    for a, b in itertools.product(basis, repeat=2):
        if linalg.rank(basis + [_double_bracket(a, b)]) > len(basis):
            return False
    return True


@pytest.mark.parametrize(
    "direction, verdict",
    [
        ([1, 0, 0], "homogeneous, closed"),
        ([0, 0, 1], "homogeneous, closed"),
        ([1, 0, 1], "not homogeneous: 𝔇/Iˢ is not invariant under ℬ(H)"),
    ],
)
def test_poisson_group_descends_iff_subalgebra(poisson3, direction, verdict):
    gd, frame = poisson3
    H = group_H(gd, direction)
    rep = drinfeld_classify(gd, frame, H, from_subalgebroid(gd, frame, H.AH), samples=2)
    assert verdict_of(rep) == verdict
    assert _is_subalgebra(direction) == verdict.startswith("homogeneous")
    a, b = closed_verdicts(check_closed_equivalence(gd, frame, build_b(gd, frame)[0], from_subalgebroid(gd, frame, H.AH)))
    assert a == b


@pytest.mark.parametrize(
    "h, verdict",
    [([[1, 0, 0], [0, 1, 0]], "homogeneous, not closed"), ([[1, 0, 0], [0, 0, 1]], "homogeneous, closed")],
)
def test_left_invariant_structures_on_heisenberg(h, verdict):
    gd, frame = heisenberg()
    H = SubgroupoidData([], [], "trivial")
    rep = drinfeld_classify(gd, frame, H, from_subalgebroid(gd, frame, columns(gd.P, h)))
    assert verdict_of(rep) == verdict


def test_translation_pipeline(translation):
    DM, gd, frame, H = translation
    rep = drinfeld_classify(gd, frame, H, pair_unit_dirac(gd, DM, quotient_slot("y + 1")), samples=2)
    assert rep.passed, rep.to_text()
    assert verdict_of(rep) == "homogeneous, closed"
    assert check_subgroupoid(gd, H).passed


def test_sandwich_failure_stops_pipeline(pair_pi):
    _, gd, frame = pair_pi
    P = gd.P
    H = SubgroupoidData(columns(P, [[0, 0, 1, 0]]), [])
    rep = drinfeld_classify(gd, frame, H, g_itself(gd, frame))
    assert verdict_of(rep) == "not a homogeneous datum: sandwich or AH condition fails"
    assert not rep.passed
