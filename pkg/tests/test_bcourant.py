from fractions import Fraction

import pytest

from multdirac.bcourant import (
    b_bracket,
    bisection_action,
    build_b,
    check_bisection_action,
    check_courant_axioms,
    d_operator,
    iso_pair_pi,
    iso_poisson_psi,
    iso_presymplectic_lambda,
    pair_action_closed_form,
)
from multdirac.dirac import Bivector, from_bivector
from multdirac.errors import FamilyMismatch, WellDefinednessViolation
from multdirac.geometry import SmoothMap, d_function
from multdirac.groupoid import Bisection, pair_dirac, unit_bisection
from multdirac.linalg import dot


def pair_bisection(gd, comps, note):
    return Bisection(SmoothMap(gd.P, gd.G, list(gd.P.coordinates) + comps), note=note)


class TestBuild:
    def test_poisson_rank(self, poisson_plane):
        gd, frame = poisson_plane
        bf, rep = build_b(gd, frame)
        assert rep.passed
        # rank AG + rank A*G
        assert bf.rank == 2 + 2

    @pytest.mark.parametrize("fixture, base_dim", [("pair_pi", 2), ("pair_omega", 2), ("pair_nonclosed", 3)])
    def test_pair_rank(self, fixture, base_dim, request):
        _, gd, frame = request.getfixturevalue(fixture)
        bf, rep = build_b(gd, frame)
        assert rep.passed
        assert bf.rank == 2 * base_dim

    def test_symplectic_rank(self, cotangent_line):
        gd, frame = cotangent_line
        bf, rep = build_b(gd, frame)
        assert rep.passed and bf.rank == 2

    @pytest.mark.parametrize("fixture", ["pair_pi", "cotangent_line", "poisson_plane"])
    def test_rank_count(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        bf, rep = build_b(gd, frame)
        assert bf.rank == 2 * gd.N - 2 * len(bf.modulus)
        assert rep.get("pairing-descends").status == "pass"


class TestBracket:
    def test_poisson_double_bracket_by_hand(self, poisson_plane):
        gd, frame = poisson_plane
        bf, _ = build_b(gd, frame)
        P = gd.P

        def col(*v):
            return [P.const(x) for x in v]

        ex, ey, dx, dy = col(1, 0, 0, 0), col(0, 1, 0, 0), col(0, 0, 1, 0), col(0, 0, 0, 1)
        # abelian 𝔤, dual bracket [dx, dy] = dx, coadjoint terms from it
        table = [
            (dx, dy, dx),
            (ex, dy, col(-1, 0, 0, 0)),
            (ex, dx, ey),
            (ey, dx, col(0, 0, 0, 0)),
            (ey, dy, col(0, 0, 0, 0)),
            (ex, ey, col(0, 0, 0, 0)),
        ]
        for a, b, want in table:
            assert b_bracket(bf, a, b) == bf.element(want)

    @pytest.mark.parametrize("fixture", ["pair_pi", "pair_omega", "cotangent_line", "poisson_plane"])
    def test_self_bracket_vanishes(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        bf, _ = build_b(gd, frame)
        zero = bf.element([gd.P.zero()] * (2 * gd.N))
        for r in bf.representatives:
            assert b_bracket(bf, r, r) == zero

    def test_non_closed_bracket_is_refused(self, pair_nonclosed):
        _, gd, frame = pair_nonclosed
        bf, _ = build_b(gd, frame)
        with pytest.raises(WellDefinednessViolation):
            for r in bf.representatives:
                for s in bf.representatives:
                    b_bracket(bf, r, s)


class TestDOperator:
    def test_constant(self, pair_pi):
        _, gd, frame = pair_pi
        bf, _ = build_b(gd, frame)
        zero = bf.element([gd.P.zero()] * (2 * gd.N))
        assert d_operator(bf, gd.P.const(7)) == zero

    @pytest.mark.parametrize("fixture", ["pair_pi", "cotangent_line"])
    def test_dual_to_anchor_and_anchor_kills_it(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        bf, _ = build_b(gd, frame)
        P = gd.P
        f = P.parse(" * ".join(P.coordinates) + " + " + P.coordinates[0] + "^2")
        Df = d_operator(bf, f).column
        assert all(c.is_zero() for c in bf.anchor(Df))
        for e in bf.representatives:
            rho_f = dot(bf.anchor(e), d_function(f, P), P.zero())
            assert (bf.pair(Df, e) - rho_f * Fraction(1, 2)).is_zero()


class TestAxioms:
    @pytest.mark.parametrize("fixture", ["pair_pi", "pair_omega", "cotangent_line", "poisson_plane"])
    def test_closed_families(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        rep = check_courant_axioms(gd, frame)
        assert rep.passed, rep.to_text()

    def test_non_closed_is_reported(self, pair_nonclosed):
        _, gd, frame = pair_nonclosed
        rep = check_courant_axioms(gd, frame)
        assert rep.get("frame-closed").status == "fail"
        assert rep.get("frame-closed").witnesses


class TestIsomorphisms:
    @pytest.mark.parametrize("fixture", ["pair_pi", "pair_omega"])
    def test_pair_pi(self, fixture, request):
        _, gd, frame = request.getfixturevalue(fixture)
        bf, _ = build_b(gd, frame)
        rep = iso_pair_pi(gd, frame, bf)
        assert rep.passed, rep.to_text()

    def test_pair_pi_inverse_is_core_free_lift(self, pair_pi):
        _, gd, frame = pair_pi
        bf, _ = build_b(gd, frame)
        P = gd.P
        w, beta = [P.parse("x"), P.one()], [P.parse("y^2"), P.zero()]
        lift = P.zeros(2) + w + P.zeros(2) + beta
        assert bf.in_total(lift)

    @pytest.mark.parametrize("fixture", ["pair_omega", "cotangent_line"])
    def test_presymplectic_lambda(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        bf, _ = build_b(gd, frame)
        rep = iso_presymplectic_lambda(gd, frame, bf)
        assert rep.passed, rep.to_text()
        assert rep.get("inverse∘map = id").status == "pass"
        assert rep.get("map∘inverse = id").status == "pass"

    def test_poisson_psi(self, poisson_plane):
        gd, frame = poisson_plane
        bf, _ = build_b(gd, frame)
        rep = iso_poisson_psi(gd, frame, bf)
        assert rep.passed, rep.to_text()
        assert rep.get("bracket-transported").status == "pass"

    def test_pi_needs_pair_groupoid(self, cotangent_line):
        gd, frame = cotangent_line
        bf, _ = build_b(gd, frame)
        with pytest.raises(FamilyMismatch):
            iso_pair_pi(gd, frame, bf)

    def test_lambda_needs_two_form(self, plane):
        # the zero bivector has no vector part, so it is not the graph of a 2-form
        gd, frame = pair_dirac(from_bivector(Bivector(plane, {})))
        bf, _ = build_b(gd, frame)
        with pytest.raises(FamilyMismatch):
            iso_presymplectic_lambda(gd, frame, bf)


class TestBisectionAction:
    def test_pair_closed_form_and_composition(self, pair_pi):
        _, gd, frame = pair_pi
        bf, _ = build_b(gd, frame)
        K = pair_bisection(gd, ["x + 1", "2*y"], "K")
        L = pair_bisection(gd, ["x - y", "y"], "L")
        rep = check_bisection_action(gd, frame, bf, K, L, samples=4, closed_form=pair_action_closed_form(gd, K))
        assert rep.passed, rep.to_text()

    def test_unit_bisection_acts_trivially(self, pair_omega):
        _, gd, frame = pair_omega
        bf, _ = build_b(gd, frame)
        p = gd.P.point([2, -1])
        for r in bf.representatives:
            e = [c.evaluate(p.coordinates) for c in r]
            q, y = bisection_action(gd, frame, bf, unit_bisection(gd), p, e)
            assert q == p and bf.same_at(p, e, y)

    def test_pair_example_by_hand(self, pair_pi):
        _, gd, frame = pair_pi
        bf, _ = build_b(gd, frame)
        K = pair_bisection(gd, ["x + 1", "2*y"], "K")
        p = gd.P.point([3, 5])
        e = [0, 0, 1, 2, 0, 0, 4, 6]
        q, y = bisection_action(gd, frame, bf, K, p, e)
        # φ(x, y) = (x + 1, 2y): Tφ w = (1, 4), (Tφ⁻¹)*β = (4, 3)
        assert list(q.coordinates) == [4, 10]
        assert bf.same_at(q, y, [0, 0, 1, 4, 0, 0, 4, 3])

    @pytest.mark.parametrize("fixture", ["cotangent_line", "poisson_plane"])
    def test_other_families(self, fixture, request):
        gd, frame = request.getfixturevalue(fixture)[-2:]
        bf, _ = build_b(gd, frame)
        if gd.p:
            K = Bisection(SmoothMap(gd.P, gd.G, ["q", "q^2 + 1"]), note="K")
            L = Bisection(SmoothMap(gd.P, gd.G, ["q", "3*q"]), note="L")
        else:
            K = Bisection(SmoothMap(gd.P, gd.G, [1, -2]), note="K")
            L = Bisection(SmoothMap(gd.P, gd.G, [Fraction(1, 2), 3]), note="L")
        rep = check_bisection_action(gd, frame, bf, K, L, samples=3)
        assert rep.passed, rep.to_text()
