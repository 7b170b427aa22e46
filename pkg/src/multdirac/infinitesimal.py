"""Objects living over the units of a multiplicative Dirac structure.

Everything here works with sections of TG ⊕ T*G along the unit embedding,
stored as stacked 2N-columns of rational functions in base coordinates.
The main entry point is :class:`Infinitesimal`, which caches the restricted
frame, the units algebroid 𝔄, the cores Iˢ and Iᵗ, the kernel of 𝕋t along
the units, and star sections of the 𝔄 frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Sequence

from . import linalg
from .dirac import (
    DiracFrame,
    PSection,
    canonical_pairing,
    courant_tensor,
    dorfman_bracket,
    pairing_columns,
)
from .errors import (
    ChartMismatch,
    DegeneracyError,
    GenericSolveFailed,
    HypothesisFailed,
    IdenticallyZeroDenominator,
    PoleAtPoint,
    RankDrop,
    WrongKernel,
)
from .exprcore import RationalFunction
from .geometry import Chart, PointP, bracket_components, evaluate_column, lie_derivative_components
from .groupoid import GroupoidDef, mT, mmul, mvec
from .report import DEFAULT_SAMPLES, Report, Sampler

Column = list[RationalFunction]


@dataclass
class UnitSection:
    """A section of TG ⊕ T*G along the units, in base coordinates."""

    chart: Chart
    column: Column
    tag: str = ""

    def vector(self, N: int) -> Column:
        return self.column[:N]

    def covector(self, N: int) -> Column:
        return self.column[N:]

    def at(self, p: PointP) -> list[Fraction]:
        return evaluate_column(self.column, p)

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.column)

    def __add__(self, other: "UnitSection") -> "UnitSection":
        return UnitSection(self.chart, [a + b for a, b in zip(self.column, other.column)], self.tag)

    def __sub__(self, other: "UnitSection") -> "UnitSection":
        return UnitSection(self.chart, [a - b for a, b in zip(self.column, other.column)], self.tag)

    def scale(self, f) -> "UnitSection":
        f = self.chart.lift(f)
        return UnitSection(self.chart, [f * a for a in self.column], self.tag)

    def __repr__(self) -> str:
        return f"UnitSection[{self.tag}]({', '.join(str(c) for c in self.column)})"


@dataclass
class StarSection:
    """A section ξ of D_G with ξ|_P = ξ̄ and 𝕋s ξ(g) = ξ̄(s g)."""

    section: PSection
    shadow: UnitSection
    valid_away_from: list[str] = field(default_factory=list)


def _zero_col(col: Sequence[RationalFunction]) -> bool:
    return all(x.is_zero() for x in col)


def _factors(fs: Sequence) -> list[str]:
    out = []
    for f in fs:
        if isinstance(f, RationalFunction) and not f.is_constant():
            s = str(f)
            if s not in out:
                out.append(s)
    return out


def _columns(M: Sequence[Sequence], ncols: int) -> list[list]:
    return [[row[j] for row in M] for j in range(ncols)]


class Infinitesimal:
    """Cached infinitesimal data of a multiplicative Dirac frame on a groupoid."""

    def __init__(self, gd: GroupoidDef, frame: DiracFrame, seed: int = 0):
        if frame.chart != gd.G:
            raise ChartMismatch("frame does not live on the arrow chart")
        self.gd = gd
        self.frame = frame
        self.seed = seed
        self.G, self.P, self.N, self.p = gd.G, gd.P, gd.N, gd.p
        self.zero_P, self.one_P = gd.P.zero(), gd.P.one()
        self.zero_G, self.one_G = gd.G.zero(), gd.G.one()
        self.valid_away_from: list[str] = []
        N = self.N
        self.F = frame.matrix()
        try:
            self.FP = gd.unit.pull_matrix(self.F)
        except IdenticallyZeroDenominator as exc:
            raise RankDrop("the frame has a pole along the units", detail=str(exc)) from None
        self.FP_cols = _columns(self.FP, len(frame.sections))
        if linalg.rank(self.FP) < N:
            raise RankDrop("the frame degenerates identically along the units")
        self._star_cache: dict[int, StarSection] = {}
        self._build()

    # -- construction ---------------------------------------------------------

    def _mul_P(self, M, cols):
        return [mvec(M, c, self.zero_P) for c in cols]

    def _build(self) -> None:
        gd, N, p = self.gd, self.N, self.p
        zero, one = self.zero_P, self.one_P
        n2 = 2 * N
        Tt, Ts = gd.Tt_units, gd.Ts_units
        tt_cols = self._mul_P(Tt, self.FP_cols)
        ts_image = mmul(Ts, self.FP, n2, n2, N, zero)
        tt_image = mmul(Tt, self.FP, n2, n2, N, zero)
        ker_s, fs = linalg.nullspace_generic(ts_image, N, one, zero)
        ker_t, ft = linalg.nullspace_generic(tt_image, N, one, zero)
        self.valid_away_from += [f for f in _factors(fs + ft) if f not in self.valid_away_from]
        Is_cols = [mvec(self.FP, c, zero) for c in ker_s]
        It_cols = [mvec(self.FP, c, zero) for c in ker_t]
        # ker 𝕋t along P: (u, 0) with Jt u = 0, and (0, Js^T β)
        JtP, JsP = gd.Jt_units, gd.Js_units
        A_basis = linalg.nullspace(JtP, N, one, zero) if p else [
            [one if i == j else zero for i in range(N)] for j in range(N)
        ]
        self.AG_cols = A_basis
        kt_cols = [list(u) + [zero] * N for u in A_basis]
        for k in range(p):
            kt_cols.append([zero] * N + [JsP[k][i] for i in range(N)])

        self.generic_ranks = {
            "algebroid": linalg.rank(linalg.transpose(tt_cols)) if tt_cols else 0,
            "s-core": len(Is_cols),
            "t-core": len(It_cols),
        }
        if self.generic_ranks["algebroid"] + len(It_cols) != N:
            raise RankDrop("𝔄 and Iᵗ do not split the restricted frame generically")

        def accept(q: PointP):
            if linalg.rank(evaluate_matrix_cols(self.FP_cols, q)) < N:
                raise PoleAtPoint("restricted frame degenerates")
            if linalg.rank(evaluate_matrix_cols(tt_cols, q)) != self.generic_ranks["algebroid"]:
                raise PoleAtPoint("𝔄 rank drops")
            for cols in (Is_cols, It_cols, kt_cols):
                if cols and linalg.rank(evaluate_matrix_cols(cols, q)) != len(cols):
                    raise PoleAtPoint("frame rank drops")
            return True

        self.witness = _find_point(self.P, accept, self.seed)
        w = self.witness
        piv = linalg.independent_columns(evaluate_matrix_cols(tt_cols, w)) if tt_cols else []
        self.algebroid = [UnitSection(self.P, tt_cols[j], "algebroid") for j in piv]
        self.s_core = [UnitSection(self.P, c, "s-core") for c in Is_cols]
        self.t_core = [UnitSection(self.P, c, "t-core") for c in It_cols]
        self.ker_tt = [UnitSection(self.P, c, "ker-Tt") for c in kt_cols]

    # -- symbolic predicates ----------------------------------------------------

    def in_D(self, col: Sequence[RationalFunction]) -> bool:
        N = self.N
        return all(pairing_columns(col, f, N, self.zero_P).is_zero() for f in self.FP_cols)

    def in_TP_plus_AstarG(self, col: Sequence[RationalFunction]) -> bool:
        gd, N, p = self.gd, self.N, self.p
        v, a = list(col[:N]), list(col[N:])
        JeJt = mmul(gd.Jeps, gd.Jt_units, N, p, N, self.zero_P)
        back = mvec(JeJt, v, self.zero_P)
        if any(not (x - y).is_zero() for x, y in zip(v, back)):
            return False
        return _zero_col(mvec(mT(gd.Jeps, N, p), a, self.zero_P))

    def in_algebroid(self, col) -> bool:
        return self.in_D(col) and self.in_TP_plus_AstarG(col)

    def in_s_core(self, col) -> bool:
        return self.in_D(col) and _zero_col(mvec(self.gd.Ts_units, col, self.zero_P))

    def in_t_core(self, col) -> bool:
        return self.in_D(col) and _zero_col(mvec(self.gd.Tt_units, col, self.zero_P))

    def in_ker_tt(self, col) -> bool:
        return _zero_col(mvec(self.gd.Tt_units, col, self.zero_P))

    def algebroid_coefficients(self, col: Sequence[RationalFunction]) -> list[RationalFunction]:
        """Coefficients of ``col`` in the 𝔄 frame, over the function field of P."""
        A = linalg.transpose([s.column for s in self.algebroid]) if self.algebroid else [[] for _ in col]
        res = linalg.solve_generic(A, list(col), self.one_P, self.zero_P)
        if res is None:
            raise GenericSolveFailed("section is not in the span of the 𝔄 frame")
        x, kern, fs = res
        if kern:
            raise GenericSolveFailed("𝔄 frame is generically dependent")
        return x

    # -- invariant extensions -------------------------------------------------

    def _check_ext(self, col, side: str) -> None:
        M = self.gd.Tt_units if side == "left" else self.gd.Ts_units
        if not _zero_col(mvec(M, col, self.zero_P)):
            want = "ker 𝕋t" if side == "left" else "ker 𝕋s"
            raise WrongKernel(f"{side}-invariant extension needs a section of {want} along P")

    def extension(self, sigma: UnitSection | Sequence[RationalFunction], side: str) -> PSection:
        """σ^l(g) = (0_g,0_g)⋆σ(s g) or σ^r(g) = σ(t g)⋆(0_g,0_g)."""
        col = sigma.column if isinstance(sigma, UnitSection) else list(sigma)
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self._check_ext(col, side)
        gd, N, p = self.gd, self.N, self.p
        zero = self.zero_G
        v, a = col[:N], col[N:]
        base = gd.src if side == "left" else gd.tgt
        T = gd.TL if side == "left" else gd.TR
        J = gd.Js if side == "left" else gd.Jt
        vec = mvec(T, base.pull_column(v), zero)
        gamma = base.pull_column(mvec(mT(gd.Jeps, N, p), a, self.zero_P))
        cov = mvec(mT(J, p, N), gamma, zero)
        return PSection(self.G, vec, cov)

    # -- star sections -------------------------------------------------------

    def frame_star(self, i: int) -> StarSection:
        if i not in self._star_cache:
            self._star_cache[i] = self._star_for(self.algebroid[i])
        return self._star_cache[i]

    def _star_for(self, xbar: UnitSection) -> StarSection:
        gd, N = self.gd, self.N
        n2 = 2 * N
        zero, one = self.zero_G, self.one_G
        A = mmul(gd.Ts_matrix, self.F, n2, n2, N, zero)
        b = gd.src.pull_column(xbar.column)
        res = linalg.solve_generic(A, b, one, zero)
        if res is None:
            raise GenericSolveFailed("no section of D_G projects to the given unit section under 𝕋s")
        c, _, fs = res
        xi0 = mvec(self.F, c, zero)
        try:
            r0 = gd.unit.pull_column(xi0)
        except IdenticallyZeroDenominator:
            raise GenericSolveFailed("generic solution has a pole along the units") from None
        sigma = [a - b for a, b in zip(xbar.column, r0)]
        col = xi0
        if not _zero_col(sigma):
            ext = self.extension(sigma, "right")
            col = [a + b for a, b in zip(xi0, ext.column())]
        return StarSection(PSection.from_column(self.G, col), xbar, _factors(fs))

    def star_section(self, xbar: UnitSection | Sequence[RationalFunction]) -> StarSection:
        """A star section of an arbitrary section of 𝔄."""
        col = xbar.column if isinstance(xbar, UnitSection) else list(xbar)
        shadow = xbar if isinstance(xbar, UnitSection) else UnitSection(self.P, col, "algebroid")
        coeffs = self.algebroid_coefficients(col)
        out = PSection.zero(self.G)
        away = []
        for i, f in enumerate(coeffs):
            if f.is_zero():
                continue
            st = self.frame_star(i)
            away += st.valid_away_from
            out = out + st.section.scale(self.gd.src.pull(f))
        return StarSection(out, shadow, sorted(set(away)))

    def check_star(self, st: StarSection) -> Report:
        gd, N = self.gd, self.N
        rep = Report("star-section")
        col = st.section.column()
        rep.add("restricts-to-shadow", _zero_col([a - b for a, b in zip(gd.unit.pull_column(col), st.shadow.column)]))
        ts = mvec(gd.Ts_matrix, col, self.zero_G)
        rep.add("s-related", _zero_col([a - b for a, b in zip(ts, gd.src.pull_column(st.shadow.column))]))
        Fc = _columns(self.F, len(self.frame.sections))
        rep.add("in-D", all(pairing_columns(col, f, N, self.zero_G).is_zero() for f in Fc))
        return rep

    # -- brackets ------------------------------------------------------------

    def restrict(self, s: PSection) -> Column:
        return self.gd.unit.pull_column(s.column())

    def perturbation(self, j: int) -> PSection:
        """φ σ_j^r with φ a coordinate of g − ε(t g): vanishes on P, stays in D ∩ ker 𝕋s."""
        gd = self.gd
        coords = self.G.coords()
        et = gd.eps_t.components
        k = j % self.N
        phis = [coords[i] - et[i] for i in range(self.N)]
        order = [k] + [i for i in range(self.N) if i != k]
        phi = next((phis[i] for i in order if not phis[i].is_zero()), None)
        if phi is None:
            return PSection.zero(self.G)
        return self.extension(self.s_core[j], "right").scale(phi)

    def star_bracket(self, xbar, ybar, check_independence: bool = True) -> tuple[UnitSection, Report]:
        rep = Report("star-bracket")
        xi = self.star_section(xbar)
        eta = self.star_section(ybar)
        val = self.restrict(dorfman_bracket(xi.section, eta.section))
        rep.add("lands-in-TP+A*G", self.in_TP_plus_AstarG(val), [] if self.in_TP_plus_AstarG(val) else [val])
        if check_independence:
            bad = []
            for j in range(len(self.s_core)):
                pert = self.perturbation(j)
                v1 = self.restrict(dorfman_bracket(xi.section + pert, eta.section))
                v2 = self.restrict(dorfman_bracket(xi.section, eta.section + pert))
                for v in (v1, v2):
                    if not _zero_col([a - b for a, b in zip(v, val)]):
                        bad.append({"core_generator": j, "value": [str(x) for x in v]})
            rep.add("independent-of-star-section", not bad, bad)
        return UnitSection(self.P, val, "algebroid"), rep

    def core_bracket(self, sigma: UnitSection, tau: UnitSection) -> UnitSection:
        val = self.restrict(dorfman_bracket(self.extension(sigma, "right"), self.extension(tau, "right")))
        return UnitSection(self.P, val, "s-core")

    def core_anchor(self, sigma: UnitSection) -> Column:
        """𝗄(v, α) = Tt v as a base vector."""
        return mvec(self.gd.Jt_units, sigma.column[: self.N], self.zero_P)

    def anchor(self, xbar: UnitSection) -> Column:
        """𝖺_⋆(v, α) = v, written in base coordinates as Ts v."""
        return mvec(self.gd.Js_units, xbar.column[: self.N], self.zero_P)

    # -- Lie derivative of star sections ---------------------------------------

    def left_vector_field(self, Z: Sequence[RationalFunction]) -> Column:
        if not _zero_col(mvec(self.gd.Jt_units, Z, self.zero_P)):
            raise WrongKernel("Z must lie in ker Tt along P")
        return mvec(self.gd.TL, self.gd.src.pull_column(list(Z)), self.zero_G)

    def lie_derivative(self, Zl: Sequence[RationalFunction], s: PSection) -> PSection:
        G = self.G
        return PSection(
            G,
            bracket_components(list(Zl), list(s.vector), G),
            lie_derivative_components(list(Zl), list(s.covector), G),
        )

    def lie_derivative_star(self, Z: Sequence[RationalFunction], xi: StarSection) -> tuple[StarSection, PSection]:
        """Split £_{Z^l} ξ as a star section plus a left-invariant section of ker 𝕋t."""
        Zl = self.left_vector_field(Z)
        L = self.lie_derivative(Zl, xi.section)
        y = self.restrict(L)
        ty = mvec(self.gd.Tt_units, y, self.zero_P)
        sigma = [a - b for a, b in zip(y, ty)]
        rem = self.extension(sigma, "left")
        star = L - rem
        return StarSection(star, UnitSection(self.P, ty, "algebroid"), list(xi.valid_away_from)), rem


# -----------------------------------------------------------------------------
# helpers


def evaluate_matrix_cols(cols: Sequence[Sequence[RationalFunction]], q: PointP) -> list[list[Fraction]]:
    """Rows of the matrix whose columns are ``cols``, evaluated at q."""
    if not cols:
        return []
    return linalg.transpose([evaluate_column(c, q) for c in cols])


def _find_point(chart: Chart, accept, seed: int) -> PointP:
    if chart.dim == 0:
        q = PointP(chart, [])
        try:
            accept(q)
        except (PoleAtPoint, DegeneracyError):
            raise RankDrop("the data degenerate at the only base point") from None
        return q
    for q, _ in Sampler(seed).points(chart, 1, accept):
        return q
    raise AssertionError("unreachable")


_CACHE: dict[tuple[int, int, int], tuple[GroupoidDef, DiracFrame, Infinitesimal]] = {}


def context(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> Infinitesimal:
    key = (id(gd), id(frame), seed)
    hit = _CACHE.get(key)
    if hit is None or hit[0] is not gd or hit[1] is not frame:
        hit = (gd, frame, Infinitesimal(gd, frame, seed))
        _CACHE[key] = hit
    return hit[2]


def same_span(a: Sequence[Sequence[RationalFunction]], b: Sequence[Sequence[RationalFunction]]) -> bool:
    """Equality of column spans over the function field."""
    ra = linalg.rank(linalg.transpose(list(a))) if a else 0
    rb = linalg.rank(linalg.transpose(list(b))) if b else 0
    if ra != rb:
        return False
    both = list(a) + list(b)
    return (linalg.rank(linalg.transpose(both)) if both else 0) == ra


# -----------------------------------------------------------------------------
# module-level operations


def units_algebroid(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> tuple[list[UnitSection], Report]:
    ctx = context(gd, frame, seed)
    rep = Report("units-algebroid", seed=seed, sample_points=[ctx.witness])
    bad = [i for i, s in enumerate(ctx.algebroid) if not ctx.in_algebroid(s.column)]
    rep.add("generators-in-D∩(TP⊕A*G)", not bad, bad, ctx.valid_away_from)
    rep.add("rank", True, [], rank=len(ctx.algebroid), witness=ctx.witness)
    return ctx.algebroid, rep


def core_frames(
    gd: GroupoidDef, frame: DiracFrame, seed: int = 0
) -> tuple[list[UnitSection], list[UnitSection], Report]:
    ctx = context(gd, frame, seed)
    N = ctx.N
    rep = Report("cores", seed=seed, sample_points=[ctx.witness])
    bad_s = [i for i, s in enumerate(ctx.s_core) if not ctx.in_s_core(s.column)]
    bad_t = [i for i, s in enumerate(ctx.t_core) if not ctx.in_t_core(s.column)]
    rep.add("s-core-generators", not bad_s, bad_s, ctx.valid_away_from)
    rep.add("t-core-generators", not bad_t, bad_t, ctx.valid_away_from)
    w = ctx.witness
    A = [s.column for s in ctx.algebroid]
    for name, core in (("𝔄⊕Iᵗ", ctx.t_core), ("𝔄⊕Iˢ", ctx.s_core)):
        cols = A + [s.column for s in core]
        r = linalg.rank(evaluate_matrix_cols(cols, w)) if cols else 0
        ok = r == N and len(cols) == N
        rep.add(f"splitting {name} = D|_P", ok, [] if ok else [w], rank=r, expected=N)
    return ctx.s_core, ctx.t_core, rep


def ker_tt_frame(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> list[UnitSection]:
    return context(gd, frame, seed).ker_tt


def star_section(gd: GroupoidDef, frame: DiracFrame, xbar, seed: int = 0) -> StarSection:
    return context(gd, frame, seed).star_section(xbar)


def invariant_extension(gd: GroupoidDef, frame: DiracFrame, sigma, side: str, seed: int = 0) -> PSection:
    return context(gd, frame, seed).extension(sigma, side)


def star_bracket(gd: GroupoidDef, frame: DiracFrame, xbar, ybar, seed: int = 0) -> tuple[UnitSection, Report]:
    return context(gd, frame, seed).star_bracket(xbar, ybar)


def core_bracket(gd: GroupoidDef, frame: DiracFrame, sigma, tau, seed: int = 0) -> UnitSection:
    return context(gd, frame, seed).core_bracket(sigma, tau)


def lie_derivative_star(gd: GroupoidDef, frame: DiracFrame, Z, xi: StarSection, seed: int = 0):
    return context(gd, frame, seed).lie_derivative_star(Z, xi)


def check_key_identity(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> Report:
    """θ_η([Z^l, X_ξ]) + (£_{Z^l}θ_ξ)(X_η) is the pullback by s of its restriction to P."""
    ctx = context(gd, frame, seed)
    rep = Report("key-identity", seed=seed)
    stars = [ctx.frame_star(i) for i in range(len(ctx.algebroid))]
    bad = []
    for zi, Z in enumerate(ctx.AG_cols):
        Zl = ctx.left_vector_field(Z)
        for i, xi in enumerate(stars):
            L = ctx.lie_derivative(Zl, xi.section)
            for j, eta in enumerate(stars):
                f = linalg.dot(eta.section.covector, L.vector, ctx.zero_G) + linalg.dot(
                    L.covector, eta.section.vector, ctx.zero_G
                )
                g = gd.src.pull(gd.unit.pull(f))
                if not (f - g).is_zero():
                    bad.append({"Z": zi, "xi": i, "eta": j, "function": str(f)})
    rep.add("s-basic", not bad, bad)
    return rep


def check_left_right_commute(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> Report:
    """£_{Z^l}(X^r, t*α) = 0 for Z in AG, X in ker Ts along P, α coordinate covectors."""
    ctx = context(gd, frame, seed)
    rep = Report("left-right-commute")
    N, p = ctx.N, ctx.p
    zero = ctx.zero_P
    Xs = linalg.nullspace(gd.Js_units, N, ctx.one_P, zero) if p else [
        [ctx.one_P if i == j else zero for i in range(N)] for j in range(N)
    ]
    secs = [list(X) + [zero] * N for X in Xs]
    for k in range(p):
        secs.append([zero] * N + [gd.Jt_units[k][i] for i in range(N)])
    bad = []
    for zi, Z in enumerate(ctx.AG_cols):
        Zl = ctx.left_vector_field(Z)
        for si, s in enumerate(secs):
            ext = ctx.extension(s, "right")
            if not ctx.lie_derivative(Zl, ext).is_zero():
                bad.append({"Z": zi, "section": si})
    rep.add("left-and-right-invariant-commute", not bad, bad)
    return rep


def check_lie_derivative_split(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> Report:
    """Both summands of the split of £_{Z^l}ξ have their defining properties."""
    ctx = context(gd, frame, seed)
    rep = Report("lie-derivative-split")
    bad_star, bad_rem, bad_core = [], [], []
    for zi, Z in enumerate(ctx.AG_cols):
        for i in range(len(ctx.algebroid)):
            star, rem = ctx.lie_derivative_star(Z, ctx.frame_star(i))
            if not ctx.check_star(star).passed or not ctx.in_algebroid(star.shadow.column):
                bad_star.append({"Z": zi, "xi": i})
            if not _zero_col(mvec(gd.Tt_matrix, rem.column(), ctx.zero_G)):
                bad_rem.append({"Z": zi, "xi": i})
        # a star section of zero: ξ = σ^r for σ ∈ Iˢ
        for j, s in enumerate(ctx.s_core):
            xi = StarSection(ctx.extension(s, "right"), UnitSection(ctx.P, ctx.P.zeros(2 * ctx.N)))
            star, _ = ctx.lie_derivative_star(Z, xi)
            if not ctx.in_s_core(ctx.restrict(star.section)):
                bad_core.append({"Z": zi, "core": j})
    rep.add("star-part", not bad_star, bad_star)
    rep.add("remainder-left-invariant-in-ker-Tt", not bad_rem, bad_rem)
    rep.add("zero-shadow-lands-in-core", not bad_core, bad_core)
    return rep


def check_star_algebroid(gd: GroupoidDef, frame: DiracFrame, functions=(), seed: int = 0) -> Report:
    """Anchor morphism and Leibniz rule of the star bracket on the 𝔄 frame."""
    ctx = context(gd, frame, seed)
    rep = Report("star-algebroid", seed=seed)
    A = ctx.algebroid
    P = ctx.P
    bad_anchor, bad_leib = [], []
    for i, j in combinations(range(len(A)), 2):
        br, _ = ctx.star_bracket(A[i], A[j], check_independence=False)
        lhs = ctx.anchor(br)
        rhs = bracket_components(ctx.anchor(A[i]), ctx.anchor(A[j]), P)
        if not _zero_col([a - b for a, b in zip(lhs, rhs)]):
            bad_anchor.append({"pair": [i, j]})
    for f in functions:
        f = P.lift(f)
        for i in range(len(A)):
            for j in range(len(A)):
                br, _ = ctx.star_bracket(A[i], A[j].scale(f), check_independence=False)
                base, _ = ctx.star_bracket(A[i], A[j], check_independence=False)
                af = linalg.dot(ctx.anchor(A[i]), [f.diff(x) for x in P.coordinates], ctx.zero_P)
                want = base.scale(f) + A[j].scale(af)
                if not _zero_col([a - b for a, b in zip(br.column, want.column)]):
                    bad_leib.append({"pair": [i, j], "function": str(f)})
    rep.add("anchor-morphism", not bad_anchor, bad_anchor)
    rep.add("leibniz", not bad_leib, bad_leib)
    return rep


def base_dirac(
    gd: GroupoidDef, frame: DiracFrame, samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> tuple[DiracFrame | None, Report]:
    """D_P(p) = {(Tt w, α) : (w, (Tt)*α) ∈ D_G(p)}, from the restricted frame."""
    ctx = context(gd, frame, seed)
    N, p = ctx.N, ctx.p
    P = ctx.P
    zero, one = ctx.zero_P, ctx.one_P
    rep = Report("base-dirac", seed=seed)

    # hypothesis: TP ∩ G0 has constant rank along the units
    ranks: dict[int, PointP] = {}
    pts = []

    def g0_tp_rank(q: PointP) -> int:
        e = gd.unit(q)
        Fe = frame.matrix_at(e)
        if linalg.rank(Fe) < N:
            raise PoleAtPoint("frame degenerate")
        V, Acov = Fe[:N], Fe[N:]
        ker = linalg.nullspace(Acov, N, Fraction(1), Fraction(0))
        g0 = [mvec(V, k) for k in ker]
        r0 = linalg.rank(linalg.transpose(g0)) if g0 else 0
        Je = [list(c) for c in _columns(evaluate_cols_rows(gd.Jeps, q), p)]
        both = g0 + Je
        rb = linalg.rank(linalg.transpose(both)) if both else 0
        return r0 + p - rb

    if p:
        for q, r in Sampler(seed).points(P, samples, g0_tp_rank):
            pts.append(q)
            ranks.setdefault(r, q)
    else:
        q = PointP(P, [])
        ranks[g0_tp_rank(q)] = q
        pts.append(q)
    rep.sample_points = pts
    if len(ranks) > 1:
        rep.add(
            "TP∩G0-constant-rank",
            None,
            [{"rank": r, "point": q} for r, q in sorted(ranks.items())],
            reason="rank jump among samples",
        )
        rep.notes.append(str(HypothesisFailed("TP ∩ G0 does not have constant rank")))
        return None, rep
    rep.add("TP∩G0-constant-rank", True, [], rank=next(iter(ranks)))

    FPv = [row[:] for row in ctx.FP[:N]]
    FPa = [row[:] for row in ctx.FP[N:]]
    kerJt = ctx.AG_cols if p else [[one if i == j else zero for i in range(N)] for j in range(N)]
    cond = [mvec(mT(FPa, N, N), k, zero) for k in kerJt]  # rows k^T FPa
    combos, fs = linalg.nullspace_generic(cond, N, one, zero) if cond else (
        [[one if i == j else zero for i in range(N)] for j in range(N)],
        [],
    )
    cols = []
    for c in combos:
        w = mvec(FPv, c, zero)
        cov = mvec(FPa, c, zero)
        v = mvec(gd.Jt_units, w, zero)
        a = mvec(mT(gd.Jeps, N, p), cov, zero)
        cols.append(v + a)
    w = ctx.witness
    secs = []
    if cols and p:
        piv = linalg.independent_columns(evaluate_matrix_cols(cols, w))
        secs = [PSection.from_column(P, cols[j]) for j in piv]
    DP = DiracFrame(P, secs, f"base of {frame.label}", w)
    lag_ok = len(secs) == p and all(
        canonical_pairing(a, b).is_zero() for a, b in combinations_with_replacement(secs, 2)
    )
    rep.add("lagrangian", lag_ok, [] if lag_ok else [w], _factors(fs), generators=len(secs))

    # t is a forward Dirac map at sampled arrows
    bad = []
    if p:
        Fp_cols = [s.column() for s in secs]
        gpts = []
        for g, image in Sampler(seed + 1).points(ctx.G, min(samples, 10), lambda g: _forward_image(gd, frame, g)):
            gpts.append(g)
            tg = gd.tgt(g)
            DPt = [evaluate_column(c, tg) for c in Fp_cols]
            iso = all(pairing_columns(x, y, p, Fraction(0)) == 0 for x in image for y in DPt)
            r = linalg.rank(linalg.transpose(image)) if image else 0
            if not iso or r != p:
                bad.append({"arrow": g, "image_rank": r})
        rep.sample_points += gpts
    rep.add("t-forward-dirac", not bad, bad)
    return DP, rep


def evaluate_cols_rows(M, q: PointP) -> list[list[Fraction]]:
    return [[x.evaluate(q.coordinates) for x in row] for row in M]


def _forward_image(gd: GroupoidDef, frame: DiracFrame, g: PointP) -> list[list[Fraction]]:
    N, p = gd.N, gd.p
    Fg = frame.matrix_at(g)
    if linalg.rank(Fg) < N:
        raise PoleAtPoint("frame degenerate")
    Jt = gd.at(gd.Jt, g)
    Je = gd.at(gd.Jeps, gd.tgt(g))
    kerJt = linalg.nullspace(Jt, N, Fraction(1), Fraction(0))
    V, Acov = Fg[:N], Fg[N:]
    cond = [mvec(mT(Acov, N, N), k) for k in kerJt]
    combos = linalg.nullspace(cond, N, Fraction(1), Fraction(0)) if cond else [
        [Fraction(int(i == j)) for i in range(N)] for j in range(N)
    ]
    out = []
    for c in combos:
        v = mvec(Jt, mvec(V, c))
        a = mvec(mT(Je, N, p), mvec(Acov, c))
        out.append(v + a)
    return out


def integrability_criterion(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> Report:
    """Closedness via 𝔄 (bracket closure plus Jacobi) and the core bracket, against the Courant tensor."""
    ctx = context(gd, frame, seed)
    rep = Report("integrability", seed=seed, sample_points=[ctx.witness])
    A = ctx.algebroid
    r = len(A)
    bad_land, bad_indep = [], []
    for i, j in combinations(range(r), 2):
        br, sub = ctx.star_bracket(A[i], A[j])
        if not ctx.in_algebroid(br.column):
            bad_land.append({"pair": [i, j], "bracket": [str(x) for x in br.column]})
        if not sub.passed:
            bad_indep.append({"pair": [i, j]})
    rep.add("star-bracket-in-𝔄", not bad_land, bad_land, ctx.valid_away_from)
    rep.add("star-bracket-independent-of-choice", not bad_indep, bad_indep)

    bad_jac = []
    if r:
        triples = list(combinations(range(r), 3)) if r >= 3 else list(combinations_with_replacement(range(r), 3))
        stars = [ctx.frame_star(i).section for i in range(r)]
        for i, j, k in triples:
            a, b, c = stars[i], stars[j], stars[k]
            jac = dorfman_bracket(a, dorfman_bracket(b, c)) + dorfman_bracket(b, dorfman_bracket(c, a)) + dorfman_bracket(
                c, dorfman_bracket(a, b)
            )
            val = ctx.restrict(jac)
            if not _zero_col(val):
                bad_jac.append({"triple": [i, j, k], "value": [str(x) for x in val]})
    rep.add("star-bracket-jacobi", not bad_jac, bad_jac)

    bad_core = []
    S = ctx.s_core
    for i, j in combinations_with_replacement(range(len(S)), 2):
        val = ctx.core_bracket(S[i], S[j])
        if not ctx.in_s_core(val.column):
            bad_core.append({"pair": [i, j], "bracket": [str(x) for x in val.column]})
    rep.add("core-bracket-in-Iˢ", not bad_core, bad_core)

    criterion = not (bad_land or bad_jac or bad_core)
    tensor = courant_tensor(frame, frame.find_witness(seed))
    agree = criterion == tensor.closed
    rep.add(
        "agrees-with-courant-tensor",
        agree,
        [] if agree else [{"criterion": criterion, "tensor_closed": tensor.closed}],
        criterion_closed=criterion,
        tensor_closed=tensor.closed,
        tensor_nonzero=[list(t) for t in tensor.nonzero[:5]],
    )
    rep.notes.append(f"criterion verdict: {'closed' if criterion else 'not closed'}")
    return rep
