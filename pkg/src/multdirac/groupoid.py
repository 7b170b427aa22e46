"""Lie groupoids given by rational structure maps.

Besides the usual structure maps a definition carries ``embed``, a rational
left inverse of ``(pr1, pr2)`` defined on a chart of G × G.  Composing it
with ``mult`` gives a map M̃ on G × G that agrees with the multiplication on
composable pairs, so its Jacobian applied to a composable pair of tangent
vectors is the tangent product.  Left and right translation Jacobians are
read off from its two blocks.

Sections of TG ⊕ T*G are handled as stacked columns (vector part first).
Covectors on A_pG are represented by their unique extension in T*_pG that
vanishes on T_pP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

from . import linalg
from .dirac import DiracFrame, PSection, pairing_columns, is_lagrangian
from .errors import (
    AxiomViolation,
    NonInvertibleBisection,
    NotComposableCovector,
    NotComposableTangent,
    PoleAtPoint,
    RankDeficientAtPoint,
    SingularSystem,
    ChartMismatch,
)
from .exprcore import RationalFunction
from .geometry import Chart, PointP, SmoothMap, evaluate_matrix, jacobian
from .report import DEFAULT_SAMPLES, Report, Sampler

F0 = Fraction(0)
F1 = Fraction(1)


# -----------------------------------------------------------------------------
# small matrix helpers with explicit shapes (charts may be 0-dimensional)


def mzeros(r: int, c: int, zero: Any = F0) -> list[list[Any]]:
    return [[zero] * c for _ in range(r)]


def mmul(A: Sequence[Sequence[Any]], B: Sequence[Sequence[Any]], r: int, k: int, c: int, zero: Any = F0):
    out = mzeros(r, c, zero)
    for i in range(r):
        Ai = A[i]
        for t in range(k):
            a = Ai[t]
            if a == 0:
                continue
            Bt = B[t]
            row = out[i]
            for j in range(c):
                b = Bt[j]
                if b == 0:
                    continue
                row[j] = row[j] + a * b
    return out


def mT(A: Sequence[Sequence[Any]], r: int, c: int) -> list[list[Any]]:
    return [[A[i][j] for i in range(r)] for j in range(c)]


def msub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def meye(n: int, one: Any = F1, zero: Any = F0):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mvec(A: Sequence[Sequence[Any]], v: Sequence[Any], zero: Any = F0) -> list[Any]:
    out = []
    for row in A:
        acc = zero
        for a, b in zip(row, v):
            if a == 0 or b == 0:
                continue
            acc = acc + a * b
        out.append(acc)
    return out


def block_diag(A, B, na: int, nb: int, zero: Any = F0):
    out = mzeros(na + nb, na + nb, zero)
    for i in range(na):
        for j in range(na):
            out[i][j] = A[i][j]
    for i in range(nb):
        for j in range(nb):
            out[na + i][na + j] = B[i][j]
    return out


# -----------------------------------------------------------------------------


def gg_chart(G: Chart) -> Chart:
    return Chart(f"{G.name}x{G.name}", [f"g_{c}" for c in G.coordinates] + [f"h_{c}" for c in G.coordinates])


@dataclass(eq=False)
class GroupoidDef:
    name: str
    G: Chart
    P: Chart
    src: SmoothMap
    tgt: SmoothMap
    unit: SmoothMap
    inv: SmoothMap
    C: Chart
    pr1: SmoothMap
    pr2: SmoothMap
    mult: SmoothMap
    embed: SmoothMap
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        G, P, C = self.G, self.P, self.C
        for m, s, t in (
            (self.src, G, P),
            (self.tgt, G, P),
            (self.unit, P, G),
            (self.inv, G, G),
            (self.pr1, C, G),
            (self.pr2, C, G),
            (self.mult, C, G),
        ):
            if m.source != s or m.target != t:
                raise ChartMismatch(f"structure map {m.source.name}->{m.target.name} has the wrong charts")
        if self.embed.target != C or self.embed.source.dim != 2 * G.dim:
            raise ChartMismatch("embed must map a chart of G x G into the composable chart")

    # dimensions --------------------------------------------------------------

    @property
    def N(self) -> int:
        return self.G.dim

    @property
    def p(self) -> int:
        return self.P.dim

    # symbolic data -------------------------------------------------------------

    @cached_property
    def GG(self) -> Chart:
        return self.embed.source

    @cached_property
    def Js(self):
        return jacobian(self.src)

    @cached_property
    def Jt(self):
        return jacobian(self.tgt)

    @cached_property
    def Jeps(self):
        return jacobian(self.unit)

    @cached_property
    def Jinv(self):
        return jacobian(self.inv)

    @cached_property
    def Jm(self):
        return jacobian(self.mult)

    @cached_property
    def Jpr1(self):
        return jacobian(self.pr1)

    @cached_property
    def Jpr2(self):
        return jacobian(self.pr2)

    @cached_property
    def mtilde(self) -> SmoothMap:
        return self.mult.compose(self.embed)

    @cached_property
    def JM(self):
        return jacobian(self.mtilde)

    def _pair_map(self, first: Sequence[RationalFunction], second: Sequence[RationalFunction]) -> SmoothMap:
        return SmoothMap(self.G, self.GG, list(first) + list(second))

    @cached_property
    def eps_s(self) -> SmoothMap:
        return self.unit.compose(self.src)

    @cached_property
    def eps_t(self) -> SmoothMap:
        return self.unit.compose(self.tgt)

    @cached_property
    def TL(self):
        """T_{ε(s g)} L_g as an N×N matrix over G (meaningful on ker Tt)."""
        m = self._pair_map(self.G.coords(), self.eps_s.components)
        N = self.N
        return m.pull_matrix([row[N:] for row in self.JM])

    @cached_property
    def TR(self):
        """T_{ε(t g)} R_g as an N×N matrix over G (meaningful on ker Ts)."""
        m = self._pair_map(self.eps_t.components, self.G.coords())
        N = self.N
        return m.pull_matrix([row[:N] for row in self.JM])

    def _unit_projector(self, along: SmoothMap, J_other, base_map: SmoothMap):
        """I − Jε(b(g)) J(ε b(g)) over G, where b is ``base_map``."""
        N, p = self.N, self.p
        zero = self.G.zero()
        Je = base_map.pull_matrix(self.Jeps)
        Jo = along.pull_matrix(J_other)
        prod = mmul(Je, Jo, N, p, N, zero)
        return msub(meye(N, self.G.one(), zero), prod)

    @cached_property
    def hat_s_matrix(self):
        """ŝ: T*_g G → (TP)° ⊂ T*_{ε s g} G, as an N×N matrix over G."""
        N = self.N
        zero = self.G.zero()
        proj = self._unit_projector(self.eps_s, self.Jt, self.src)
        return mmul(mT(proj, N, N), mT(self.TL, N, N), N, N, N, zero)

    @cached_property
    def hat_t_matrix(self):
        """t̂: T*_g G → (TP)° ⊂ T*_{ε t g} G, as an N×N matrix over G."""
        N = self.N
        zero = self.G.zero()
        proj = self._unit_projector(self.eps_t, self.Js, self.tgt)
        return mmul(mT(proj, N, N), mT(self.TR, N, N), N, N, N, zero)

    @cached_property
    def Ts_matrix(self):
        """𝕋s on TG ⊕ T*G as a 2N×2N matrix over G."""
        N, p = self.N, self.p
        zero = self.G.zero()
        Je = self.src.pull_matrix(self.Jeps)
        vec = mmul(Je, self.Js, N, p, N, zero)
        return block_diag(vec, self.hat_s_matrix, N, N, zero)

    @cached_property
    def Tt_matrix(self):
        N, p = self.N, self.p
        zero = self.G.zero()
        Je = self.tgt.pull_matrix(self.Jeps)
        vec = mmul(Je, self.Jt, N, p, N, zero)
        return block_diag(vec, self.hat_t_matrix, N, N, zero)

    @cached_property
    def Ts_units(self):
        return self.unit.pull_matrix(self.Ts_matrix)

    @cached_property
    def Tt_units(self):
        return self.unit.pull_matrix(self.Tt_matrix)

    @cached_property
    def Js_units(self):
        return self.unit.pull_matrix(self.Js)

    @cached_property
    def Jt_units(self):
        return self.unit.pull_matrix(self.Jt)

    # points --------------------------------------------------------------------

    def split(self, c: PointP) -> tuple[PointP, PointP]:
        return self.pr1(c), self.pr2(c)

    def composable_point(self, g: PointP, h: PointP) -> PointP:
        if self.src(g) != self.tgt(h):
            raise AxiomViolation("points are not composable", g=g.to_json(), h=h.to_json())
        return self.embed(PointP(self.GG, g.coordinates + h.coordinates))

    def product(self, g: PointP, h: PointP) -> PointP:
        return self.mult(self.composable_point(g, h))

    def at(self, M, q: PointP):
        return evaluate_matrix(M, q)


# -----------------------------------------------------------------------------
# axioms


def check_groupoid_axioms(gd: GroupoidDef, samples: int = 10, seed: int = 0) -> Report:
    rep = Report("groupoid-axioms", seed=seed)
    P = gd.P

    def ident(name: str, lhs: SmoothMap, rhs: SmoothMap) -> None:
        bad = [
            {"component": i, "lhs": str(a), "rhs": str(b)}
            for i, (a, b) in enumerate(zip(lhs.components, rhs.components))
            if not (a - b).is_zero()
        ]
        rep.add(name, not bad, bad)

    ident("s∘ε = id", gd.src.compose(gd.unit), SmoothMap.identity(P))
    ident("t∘ε = id", gd.tgt.compose(gd.unit), SmoothMap.identity(P))
    ident("t∘mult = t∘pr1", gd.tgt.compose(gd.mult), gd.tgt.compose(gd.pr1))
    ident("s∘mult = s∘pr2", gd.src.compose(gd.mult), gd.src.compose(gd.pr2))
    ident("s∘pr1 = t∘pr2", gd.src.compose(gd.pr1), gd.tgt.compose(gd.pr2))
    ident("s∘inv = t", gd.src.compose(gd.inv), gd.tgt)
    ident("t∘inv = s", gd.tgt.compose(gd.inv), gd.src)
    ident("embed∘(pr1,pr2) = id", gd.embed.compose(SmoothMap(gd.C, gd.GG, list(gd.pr1.components) + list(gd.pr2.components))), SmoothMap.identity(gd.C))

    sampler = Sampler(seed)
    bad_assoc, bad_unit, bad_inv = [], [], []
    points = []
    for c, _ in sampler.points(gd.C, samples, lambda c: (gd.mult(c), gd.split(c))):
        points.append(c)
        g, h = gd.split(c)
        gh = gd.mult(c)
        try:
            # unit laws
            if gd.product(gd.unit(gd.tgt(g)), g) != g or gd.product(g, gd.unit(gd.src(g))) != g:
                bad_unit.append(g)
            gi = gd.inv(g)
            if gd.product(g, gi) != gd.unit(gd.tgt(g)) or gd.product(gi, g) != gd.unit(gd.src(g)):
                bad_inv.append(g)
            # k = (gh)^{-1} g has t(k) = s(h)
            k = gd.product(gd.inv(gh), g)
            left = gd.product(gh, k)
            right = gd.product(g, gd.product(h, k))
            if left != right:
                bad_assoc.append({"g": g, "h": h, "k": k})
        except (PoleAtPoint, AxiomViolation) as exc:
            bad_assoc.append({"g": g, "h": h, "error": str(exc)})
    rep.sample_points = points
    rep.add("unit-laws", not bad_unit, bad_unit)
    rep.add("inverse-laws", not bad_inv, bad_inv)
    rep.add("associativity", not bad_assoc, bad_assoc)
    return rep


# -----------------------------------------------------------------------------
# tangent and cotangent groupoids


def _vec(v) -> list[Fraction]:
    return [Fraction(x) for x in v]


def tangent_mult_at(gd: GroupoidDef, g: PointP, h: PointP, v_g, v_h) -> list[Fraction]:
    v_g, v_h = _vec(v_g), _vec(v_h)
    if gd.src(g) != gd.tgt(h):
        raise NotComposableTangent("base points are not composable")
    Ts = mvec(gd.at(gd.Js, g), v_g)
    Tt = mvec(gd.at(gd.Jt, h), v_h)
    if Ts != Tt:
        raise NotComposableTangent(f"Ts v_g = {Ts} differs from Tt v_h = {Tt}")
    gh = PointP(gd.GG, g.coordinates + h.coordinates)
    return mvec(gd.at(gd.JM, gh), v_g + v_h)


def hat_s_at(gd: GroupoidDef, g: PointP, alpha) -> list[Fraction]:
    return mvec(gd.at(gd.hat_s_matrix, g), _vec(alpha))


def hat_t_at(gd: GroupoidDef, g: PointP, alpha) -> list[Fraction]:
    return mvec(gd.at(gd.hat_t_matrix, g), _vec(alpha))


def cotangent_mult_at(gd: GroupoidDef, g: PointP, h: PointP, a_g, a_h) -> list[Fraction]:
    a_g, a_h = _vec(a_g), _vec(a_h)
    if gd.src(g) != gd.tgt(h):
        raise NotComposableCovector("base points are not composable")
    if hat_s_at(gd, g, a_g) != hat_t_at(gd, h, a_h):
        raise NotComposableCovector("ŝ(α_g) differs from t̂(α_h)")
    c = gd.composable_point(g, h)
    N, dC = gd.N, gd.C.dim
    Jm = gd.at(gd.Jm, c)
    rhs = [x + y for x, y in zip(mvec(mT(gd.at(gd.Jpr1, c), N, dC), a_g), mvec(mT(gd.at(gd.Jpr2, c), N, dC), a_h))]
    res = linalg.solve(mT(Jm, N, dC), rhs, F1, F0)
    if res is None:
        raise SingularSystem("cotangent product system is inconsistent at this point")
    x, kern = res
    if kern:
        raise SingularSystem("multiplication is not a submersion at this point")
    return x


def cotangent_inverse_at(gd: GroupoidDef, g: PointP, a_g) -> list[Fraction]:
    gi = gd.inv(g)
    N = gd.N
    return [-x for x in mvec(mT(gd.at(gd.Jinv, gi), N, N), _vec(a_g))]


def tangent_inverse_at(gd: GroupoidDef, g: PointP, v_g) -> list[Fraction]:
    return mvec(gd.at(gd.Jinv, g), _vec(v_g))


def pontryagin_mult_at(gd: GroupoidDef, g: PointP, h: PointP, x: Sequence, y: Sequence) -> list[Fraction]:
    """(v_g, α_g) ⋆ (v_h, α_h) for stacked columns."""
    N = gd.N
    return tangent_mult_at(gd, g, h, x[:N], y[:N]) + cotangent_mult_at(gd, g, h, x[N:], y[N:])


def pontryagin_inverse_at(gd: GroupoidDef, g: PointP, x: Sequence) -> list[Fraction]:
    N = gd.N
    return tangent_inverse_at(gd, g, x[:N]) + cotangent_inverse_at(gd, g, x[N:])


def Ts_at(gd: GroupoidDef, g: PointP):
    return gd.at(gd.Ts_matrix, g)


def Tt_at(gd: GroupoidDef, g: PointP):
    return gd.at(gd.Tt_matrix, g)


# -----------------------------------------------------------------------------
# multiplicativity


def _members(F: list[list[Fraction]], z: Sequence[Fraction], N: int) -> bool:
    cols = mT(F, 2 * N, len(F[0]) if F else 0)
    return all(pairing_columns(col, z, N, F0) == 0 for col in cols)


def _frame_at(frame: DiracFrame, q: PointP) -> list[list[Fraction]]:
    F = frame.matrix_at(q)
    if linalg.rank(F) < frame.n:
        raise RankDeficientAtPoint("frame degenerate at sample")
    return F


def check_dirac_multiplicative(
    gd: GroupoidDef, frame: DiracFrame, samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> Report:
    rep = Report("verify-multiplicative", seed=seed)
    if frame.chart != gd.G:
        raise ChartMismatch("frame does not live on the groupoid's arrow chart")
    witness = frame.find_witness(seed)
    rep.add("lagrangian", is_lagrangian(frame, witness), [], witness=witness)
    N = gd.N
    viol_prod, viol_unit, viol_inv = [], [], []
    dims = []

    def at_point(c: PointP):
        g, h = gd.split(c)
        gh = gd.mult(c)
        Fg, Fh, Fgh = _frame_at(frame, g), _frame_at(frame, h), _frame_at(frame, gh)
        Sg = Ts_at(gd, g)
        Th = Tt_at(gd, h)
        A = [a + [-b for b in bb] for a, bb in zip(mmul(Sg, Fg, 2 * N, 2 * N, N), mmul(Th, Fh, 2 * N, 2 * N, N))]
        pairs = linalg.nullspace(A, 2 * N, F1, F0)
        prods = []
        for vec in pairs:
            x = mvec(Fg, vec[:N])
            y = mvec(Fh, vec[N:])
            prods.append(pontryagin_mult_at(gd, g, h, x, y))
        # units and inverses at g
        p = gd.src(g)
        e = gd.unit(p)
        Fe = _frame_at(frame, e)
        gi = gd.inv(g)
        Fgi = _frame_at(frame, gi)
        units = []
        TsE, TtE = Ts_at(gd, e), Tt_at(gd, e)
        for j in range(N):
            col = [row[j] for row in Fe]
            units.append(mvec(TtE, col))
            units.append(mvec(TsE, col))
        invs = [pontryagin_inverse_at(gd, g, [row[j] for row in Fg]) for j in range(N)]
        return g, h, gh, Fgh, prods, e, Fe, units, gi, Fgi, invs

    sampler = Sampler(seed)
    points = []
    for c, data in sampler.points(gd.C, samples, at_point):
        points.append(c)
        g, h, gh, Fgh, prods, e, Fe, units, gi, Fgi, invs = data
        dims.append(len(prods))
        for k, z in enumerate(prods):
            if not _members(Fgh, z, N):
                viol_prod.append({"composable_point": c, "g": g, "h": h, "product": z})
                break
        for z in units:
            if not _members(Fe, z, N):
                viol_unit.append({"unit": e, "element": z})
                break
        for z in invs:
            if not _members(Fgi, z, N):
                viol_inv.append({"g": g, "inverse_element": z})
                break
    rep.sample_points = points
    rep.add("products-in-D", not viol_prod, viol_prod, composable_pair_dims=sorted(set(dims)))
    rep.add("units-in-D", not viol_unit, viol_unit)
    rep.add("inverses-in-D", not viol_inv, viol_inv)
    return rep


# -----------------------------------------------------------------------------
# constructors


def pair_groupoid(M: Chart) -> GroupoidDef:
    """M × M ⇉ M with t = first factor, s = second factor."""
    names = M.coordinates
    G = Chart(f"{M.name}x{M.name}", [f"{x}_1" for x in names] + [f"{x}_2" for x in names])
    C = Chart(f"{M.name}^3", [f"{x}_{i}" for i in (1, 2, 3) for x in names])
    m = M.dim
    Gc, Cc = G.coords(), C.coords()
    src = SmoothMap(G, M, Gc[m:])
    tgt = SmoothMap(G, M, Gc[:m])
    unit = SmoothMap(M, G, M.coords() + M.coords())
    inv = SmoothMap(G, G, Gc[m:] + Gc[:m])
    pr1 = SmoothMap(C, G, Cc[: 2 * m])
    pr2 = SmoothMap(C, G, Cc[m:])
    mult = SmoothMap(C, G, Cc[:m] + Cc[2 * m :])
    GG = gg_chart(G)
    GGc = GG.coords()
    # (g_1, g_2, h_2): the middle factor is read from g
    embed = SmoothMap(GG, C, GGc[: 2 * m] + GGc[3 * m : 4 * m])
    return GroupoidDef(f"pair groupoid of {M.name}", G, M, src, tgt, unit, inv, C, pr1, pr2, mult, embed)


def group_over_point(G: Chart, mult: Sequence[str], inverse: Sequence[str], identity: Sequence) -> GroupoidDef:
    """A Lie group as a groupoid over a point.

    ``mult`` is written in coordinates suffixed ``_1`` and ``_2``.
    """
    P = Chart("pt", ())
    names = G.coordinates
    C = Chart(f"{G.name}^2", [f"{x}_1" for x in names] + [f"{x}_2" for x in names])
    n = G.dim
    Cc = C.coords()
    src = SmoothMap(G, P, [])
    tgt = SmoothMap(G, P, [])
    unit = SmoothMap(P, G, [P.const(Fraction(c)) for c in identity])
    inv = SmoothMap(G, G, inverse)
    pr1 = SmoothMap(C, G, Cc[:n])
    pr2 = SmoothMap(C, G, Cc[n:])
    m = SmoothMap(C, G, mult)
    GG = gg_chart(G)
    embed = SmoothMap(GG, C, GG.coords())
    return GroupoidDef(f"group {G.name}", G, P, src, tgt, unit, inv, C, pr1, pr2, m, embed)


def abelian_group(G: Chart) -> GroupoidDef:
    names = G.coordinates
    return group_over_point(
        G,
        [f"{x}_1 + {x}_2" for x in names],
        [f"-{x}" for x in names],
        [0] * G.dim,
    )


def cotangent_groupoid(M: Chart) -> GroupoidDef:
    """T*M ⇉ M with fibrewise addition; coordinates (q, p)."""
    qs = list(M.coordinates)
    ps = [f"p{x}" for x in qs]
    G = Chart(f"T*{M.name}", qs + ps)
    C = Chart(f"T*{M.name}^(2)", qs + [f"{p}_1" for p in ps] + [f"{p}_2" for p in ps])
    m = M.dim
    Gc, Cc = G.coords(), C.coords()
    src = SmoothMap(G, M, Gc[:m])
    tgt = SmoothMap(G, M, Gc[:m])
    unit = SmoothMap(M, G, M.coords() + M.zeros())
    inv = SmoothMap(G, G, Gc[:m] + [-x for x in Gc[m:]])
    pr1 = SmoothMap(C, G, Cc[:m] + Cc[m : 2 * m])
    pr2 = SmoothMap(C, G, Cc[:m] + Cc[2 * m :])
    mult = SmoothMap(C, G, Cc[:m] + [a + b for a, b in zip(Cc[m : 2 * m], Cc[2 * m :])])
    GG = gg_chart(G)
    GGc = GG.coords()
    embed = SmoothMap(GG, C, GGc[:m] + GGc[m : 2 * m] + GGc[3 * m : 4 * m])
    return GroupoidDef(f"cotangent groupoid of {M.name}", G, M, src, tgt, unit, inv, C, pr1, pr2, mult, embed)


def pair_dirac(DM: DiracFrame) -> tuple[GroupoidDef, DiracFrame]:
    """Pair groupoid of M with D_M ⊖ D_M: first factor (X, α), second factor (−X, α)."""
    M = DM.chart
    gd = pair_groupoid(M)
    G = gd.G
    m = M.dim
    first = SmoothMap(G, M, G.coords()[:m])
    second = SmoothMap(G, M, G.coords()[m:])
    secs = []
    for s in DM.sections:
        X1 = first.pull_column(s.vector)
        a1 = first.pull_column(s.covector)
        secs.append(PSection(G, X1 + G.zeros(m), a1 + G.zeros(m)))
    for s in DM.sections:
        X2 = second.pull_column(s.vector)
        a2 = second.pull_column(s.covector)
        secs.append(PSection(G, G.zeros(m) + [-x for x in X2], G.zeros(m) + a2))
    witness = None
    if DM.witness is not None:
        witness = PointP(G, DM.witness.coordinates + DM.witness.coordinates)
    return gd, DiracFrame(G, secs, f"{DM.label} ⊖ {DM.label}", witness)


# -----------------------------------------------------------------------------
# bisections


@dataclass(eq=False)
class Bisection:
    K: SmoothMap
    phi_inverse: SmoothMap | None = None
    note: str = ""


def check_bisection(gd: GroupoidDef, B: Bisection) -> Report:
    rep = Report("bisection")
    tk = gd.tgt.compose(B.K)
    bad = [str(c - x) for c, x in zip(tk.components, gd.P.coords()) if not (c - x).is_zero()]
    rep.add("t∘K = id", not bad, bad)
    return rep


def phi_of(gd: GroupoidDef, B: Bisection) -> SmoothMap:
    return gd.src.compose(B.K)


def phi_inverse(gd: GroupoidDef, B: Bisection) -> SmoothMap:
    if B.phi_inverse is not None:
        return B.phi_inverse
    phi = phi_of(gd, B)
    P = gd.P
    J = jacobian(phi)
    if not all(e.is_constant() for row in J for e in row):
        raise NonInvertibleBisection("s∘K is not affine; supply its inverse")
    A = [[e.constant_value() for e in row] for row in J]
    origin = PointP(P, [0] * P.dim)
    b = phi(origin).coordinates
    try:
        Ainv = linalg.inverse(A, F1, F0) if P.dim else []
    except SingularSystem:
        raise NonInvertibleBisection("s∘K has a singular linear part") from None
    comps = []
    xs = P.coords()
    for i in range(P.dim):
        acc = P.zero()
        for j in range(P.dim):
            if Ainv[i][j] != 0:
                acc = acc + (xs[j] - b[j]) * Ainv[i][j]
        comps.append(acc)
    return SmoothMap(P, P, comps)


def right_translation(gd: GroupoidDef, B: Bisection) -> SmoothMap:
    """R_K(g) = g ⋆ K(s g)."""
    ks = B.K.compose(gd.src)
    pair = SmoothMap(gd.G, gd.GG, gd.G.coords() + list(ks.components))
    return gd.mtilde.compose(pair)


def bisection_inverse(gd: GroupoidDef, B: Bisection) -> Bisection:
    """K⁻¹(p) = K(φ⁻¹ p)⁻¹ with φ = s∘K."""
    phinv = phi_inverse(gd, B)
    Kinv = gd.inv.compose(B.K.compose(phinv))
    return Bisection(Kinv, phi_of(gd, B), note=f"inverse of {B.note}")


def bisection_product(gd: GroupoidDef, K: Bisection, L: Bisection) -> Bisection:
    """(K⋆L)(p) = K(p) ⋆ L(s K(p)), so that R_{K⋆L} = R_L ∘ R_K."""
    Lsk = L.K.compose(gd.src.compose(K.K))
    pair = SmoothMap(gd.P, gd.GG, list(K.K.components) + list(Lsk.components))
    KL = gd.mtilde.compose(pair)
    phinv = None
    if K.phi_inverse is not None and L.phi_inverse is not None:
        phinv = K.phi_inverse.compose(L.phi_inverse)
    return Bisection(KL, phinv, note=f"{K.note}⋆{L.note}")


def unit_bisection(gd: GroupoidDef) -> Bisection:
    return Bisection(gd.unit, SmoothMap.identity(gd.P), note="ε")


def pullback_section_at(gd: GroupoidDef, B: Bisection, frame: DiracFrame, g: PointP) -> list[list[Fraction]]:
    """Columns (R_K)^*e_i at g: (J⁻¹ X(R_K g), Jᵀ α(R_K g))."""
    RK = right_translation(gd, B)
    J = gd.at(jacobian(RK), g)
    N = gd.N
    Jinv = linalg.inverse(J, F1, F0)
    F = frame.matrix_at(RK(g))
    out = []
    for j in range(len(frame.sections)):
        col = [row[j] for row in F]
        out.append(mvec(Jinv, col[:N]) + mvec(mT(J, N, N), col[N:]))
    return out
