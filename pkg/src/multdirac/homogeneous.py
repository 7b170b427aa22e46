"""Dirac homogeneous spaces through Lagrangian subspaces over the units.

A homogeneous structure is described by a Lagrangian 𝔇 ⊆ (TG ⊕ T*G)|_P
squeezed between Iˢ and 𝔄 ⊕ ker 𝕋t|_P.  From 𝔇 the structure on G is
rebuilt as D = D_G·𝔇, spanned by ξ + σ^l for the generators ξ̄ + σ of 𝔇
together with the right-invariant extensions of Iˢ.

The quotient G/H is never built as a chart.  Invariance is tested through
the action of generator bisections of H on 𝔅, and the reduction condition
by pulling D back along right translations at sampled arrows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .bcourant import BFrame, _pi_sharp, bisection_action, build_b
from .dirac import DiracFrame, PSection, courant_tensor, pairing_columns
from .errors import DegeneracyError, DivisionByZeroPolynomial, PoleAtPoint, WellDefinednessViolation
from .exprcore import RationalFunction
from .geometry import Chart, PointP, evaluate_column
from .groupoid import Bisection, GroupoidDef, check_bisection, mT, mvec, pullback_section_at
from .infinitesimal import Infinitesimal, context, evaluate_matrix_cols
from .report import Report, Sampler

F0 = Fraction(0)
Column = list[RationalFunction]


@dataclass
class SubgroupoidData:
    """A wide subgroupoid H, given by AH along the units and generator bisections."""

    AH: list[Column]
    generators: list[Bisection] = field(default_factory=list)
    label: str = "H"


@dataclass
class UnitDirac:
    """A Lagrangian frame of sections of (TG ⊕ T*G)|_P."""

    chart: Chart
    columns: list[Column]
    label: str = ""


def _zero(col) -> bool:
    return all(x.is_zero() for x in col)


def _cross_pairings(A: Sequence[Column], B: Sequence[Column], N: int, zero) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i, a in enumerate(A)
        for j, b in enumerate(B)
        if not pairing_columns(a, b, N, zero).is_zero()
    ]


def _rank_at(cols: Sequence[Sequence[RationalFunction]], q: PointP) -> int:
    return linalg.rank(evaluate_matrix_cols(list(cols), q)) if cols else 0


def check_subgroupoid(gd: GroupoidDef, H: SubgroupoidData) -> Report:
    rep = Report("subgroupoid")
    zero = gd.P.zero()
    bad = [i for i, u in enumerate(H.AH) if not _zero(mvec(gd.Jt_units, u, zero))]
    rep.add("AH ⊆ ker Tt", not bad, bad)
    for k, K in enumerate(H.generators):
        rep.extend(check_bisection(gd, K), prefix=f"generator {k}")
    rep.notes.append("t-connectedness of H is assumed, not verified")
    return rep


# -----------------------------------------------------------------------------
# standard choices of 𝔇


def g_itself(gd: GroupoidDef, frame: DiracFrame, seed: int = 0) -> UnitDirac:
    """𝔇 = Iˢ ⊕ 𝔄, the datum of G acting on itself."""
    ctx = context(gd, frame, seed)
    cols = [s.column for s in ctx.s_core] + [s.column for s in ctx.algebroid]
    return UnitDirac(gd.P, cols, "Iˢ ⊕ 𝔄")


def from_subalgebroid(gd: GroupoidDef, frame: DiracFrame, AH: Sequence[Column], seed: int = 0) -> UnitDirac:
    """𝔇 = Iˢ + {(X, 0) : X ∈ AH} + {(π♯ξ, ξ) : ξ ∈ A*G ∩ AH°} for a graph of a bivector.

    Over a Poisson groupoid this is the image of AH ⊕ AH° under Ψ.
    """
    ctx = context(gd, frame, seed)
    N, p = gd.N, gd.p
    P = gd.P
    zero, one = P.zero(), P.one()
    S = _pi_sharp(ctx)
    rows = [list(r) for r in mT(gd.Jeps, N, p)] + [list(u) for u in AH]
    ann = linalg.nullspace(rows, N, one, zero) if rows else [[one if i == j else zero for i in range(N)] for j in range(N)]
    cols = [s.column for s in ctx.s_core]
    cols += [list(u) + [zero] * N for u in AH]
    cols += [mvec(S, xi, zero) + list(xi) for xi in ann]
    return UnitDirac(P, cols, "AH ⊕ AH°")


def pair_unit_dirac(gd: GroupoidDef, DM: DiracFrame, Dbar: DiracFrame) -> UnitDirac:
    """𝔇 = {(v, w, α, β) : (v, α) ∈ D_M, (w, β) ∈ Dbar} on the pair groupoid."""
    m = gd.p
    zero = gd.P.zero()
    cols = []
    for s in DM.sections:
        cols.append(list(s.vector) + [zero] * m + list(s.covector) + [zero] * m)
    for s in Dbar.sections:
        cols.append([zero] * m + list(s.vector) + [zero] * m + list(s.covector))
    return UnitDirac(gd.P, cols, f"{DM.label} ⊕ {Dbar.label}")


# -----------------------------------------------------------------------------
# sandwich


def check_sandwich(gd: GroupoidDef, frame: DiracFrame, D: UnitDirac, H: SubgroupoidData | None = None, seed: int = 0) -> Report:
    """Iˢ ⊆ 𝔇 ⊆ 𝔄 ⊕ ker 𝕋t|_P and AH × {0} ⊆ 𝔇, all by pairing conditions."""
    ctx = context(gd, frame, seed)
    N = gd.N
    zero = gd.P.zero()
    rep = Report("sandwich", seed=seed, sample_points=[ctx.witness])
    bad = _cross_pairings(D.columns, D.columns, N, zero)
    r = _rank_at(D.columns, ctx.witness)
    ok = not bad and r == N
    rep.add("𝔇 Lagrangian", ok, [{"pair": list(b)} for b in bad] or ([] if ok else [ctx.witness]), rank=r)
    # Iˢ ⊆ 𝔇: 𝔇 is its own orthogonal
    core = [s.column for s in ctx.s_core]
    bad = sorted({i for i, _ in _cross_pairings(core, D.columns, N, zero)})
    rep.add("Iˢ ⊆ 𝔇", not bad, [{"core_generator": i, "column": [str(x) for x in core[i]]} for i in bad])
    # 𝔇 ⊆ 𝔄 ⊕ ker 𝕋t|_P, the orthogonal of Iˢ
    bad = sorted({i for i, _ in _cross_pairings(D.columns, core, N, zero)})
    rep.add("𝔇 ⊆ 𝔄 ⊕ ker𝕋t", not bad, [{"generator": i, "column": [str(x) for x in D.columns[i]]} for i in bad])
    if H is not None:
        ah = [list(u) + [zero] * N for u in H.AH]
        bad = sorted({i for i, _ in _cross_pairings(ah, D.columns, N, zero)})
        rep.add("AH × 0 ⊆ 𝔇", not bad, [{"AH_generator": i} for i in bad])
    return rep


# -----------------------------------------------------------------------------
# D = D_G·𝔇


@dataclass
class Homogeneous:
    frame: DiracFrame
    candidates: list[PSection]
    report: Report


def _lift_candidates(ctx: Infinitesimal, D: UnitDirac) -> list[PSection]:
    zero = ctx.zero_P
    out = [ctx.extension(s, "right") for s in ctx.s_core]
    for x in D.columns:
        xbar = mvec(ctx.gd.Tt_units, x, zero)
        sigma = [a - b for a, b in zip(x, xbar)]
        sec = ctx.star_section(xbar).section if not _zero(xbar) else PSection.zero(ctx.G)
        if not _zero(sigma):
            sec = sec + ctx.extension(sigma, "left")
        out.append(sec)
    return out


def _select(G: Chart, secs: Sequence[PSection], N: int, seed: int) -> tuple[list[PSection], PointP]:
    cols = [s.column() for s in secs]

    def accept(q: PointP):
        if _rank_at(cols, q) < N:
            raise PoleAtPoint("candidate sections degenerate")
        return True

    for q, _ in Sampler(seed).points(G, 1, accept):
        piv = linalg.independent_columns(evaluate_matrix_cols(cols, q))
        return [secs[j] for j in piv[:N]], q
    raise AssertionError("unreachable")


def build_homogeneous(gd: GroupoidDef, frame: DiracFrame, D: UnitDirac, seed: int = 0) -> Homogeneous:
    """The Dirac structure D_G·𝔇 on G as a frame of N sections."""
    ctx = context(gd, frame, seed)
    N = gd.N
    zero = gd.G.zero()
    secs = _lift_candidates(ctx, D)
    chosen, q = _select(gd.G, secs, N, seed)
    out = DiracFrame(gd.G, chosen, f"D_G·({D.label})", q)
    rep = Report("build-homogeneous", seed=seed, sample_points=[q])
    cols = [s.column() for s in secs]
    bad = _cross_pairings(cols, cols, N, zero)
    rep.add("isotropic", not bad, [{"pair": list(b)} for b in bad])
    rep.add("rank N at witness", len(chosen) == N, [] if len(chosen) == N else [q], rank=len(chosen))
    rep.notes.append(f"{len(secs)} spanning sections, {len(chosen)} kept")
    return Homogeneous(out, secs, rep)


def same_dirac(A: DiracFrame, B: DiracFrame) -> list[tuple[int, int]]:
    """Pairs (i, j) with ⟨a_i, b_j⟩ ≠ 0; empty iff two Lagrangian frames span the same structure."""
    N = A.chart.dim
    zero = A.chart.zero()
    return _cross_pairings([s.column() for s in A.sections], [s.column() for s in B.sections], N, zero)


def check_restriction(gd: GroupoidDef, frame: DiracFrame, Dh: DiracFrame, D: UnitDirac, seed: int = 0) -> Report:
    """𝔇 = D|_P: both inclusions by pairing and equal rank at the witness."""
    ctx = context(gd, frame, seed)
    N = gd.N
    zero = gd.P.zero()
    rep = Report("restriction", seed=seed, sample_points=[ctx.witness])
    try:
        restricted = [gd.unit.pull_column(s.column()) for s in Dh.sections]
    except (DegeneracyError, DivisionByZeroPolynomial) as exc:  # a pole along the units
        rep.add("restricts-to-units", False, [str(exc)])
        return rep
    bad = sorted({i for i, _ in _cross_pairings(D.columns, restricted, N, zero)})
    rep.add("𝔇 ⊆ D|_P", not bad, [{"generator": i} for i in bad])
    bad = sorted({j for j, _ in _cross_pairings(restricted, D.columns, N, zero)})
    rep.add("D|_P ⊆ 𝔇", not bad, [{"section": j} for j in bad])
    w = ctx.witness
    r1, r2 = _rank_at(D.columns, w), _rank_at(restricted, w)
    rep.add("equal rank", r1 == r2 == N, [] if r1 == r2 == N else [w], rank_D=r1, rank_restricted=r2)
    return rep


def check_structure(gd: GroupoidDef, frame: DiracFrame, Dh: DiracFrame, H: SubgroupoidData | None, seed: int = 0) -> Report:
    """D_G ∩ ker 𝕋s ⊆ D and 𝒦_H = ℋ ⊕ 0 ⊆ D, symbolically."""
    ctx = context(gd, frame, seed)
    N = gd.N
    zero = gd.G.zero()
    rep = Report("homogeneous-structure", seed=seed)
    D_cols = [s.column() for s in Dh.sections]
    ext = [ctx.extension(s, "right").column() for s in ctx.s_core]
    bad = sorted({i for i, _ in _cross_pairings(ext, D_cols, N, zero)})
    rep.add("D_G ∩ ker𝕋s ⊆ D", not bad, [{"core_generator": i} for i in bad])
    if H is not None:
        zP = gd.P.zero()
        kh = [ctx.extension(list(u) + [zP] * N, "left").column() for u in H.AH]
        bad = sorted({i for i, _ in _cross_pairings(kh, D_cols, N, zero)})
        rep.add("𝒦_H ⊆ D", not bad, [{"AH_generator": i} for i in bad])
    return rep


def check_uniqueness(gd: GroupoidDef, frame: DiracFrame, Dh: DiracFrame, seed: int = 0) -> Report:
    """Rebuilding from D|_P gives D back."""
    ctx = context(gd, frame, seed)
    N = gd.N
    rep = Report("uniqueness", seed=seed)
    restricted = [gd.unit.pull_column(s.column()) for s in Dh.sections]
    piv = linalg.independent_columns(evaluate_matrix_cols(restricted, ctx.witness))
    again = build_homogeneous(gd, frame, UnitDirac(gd.P, [restricted[j] for j in piv], "D|_P"), seed).frame
    bad = same_dirac(again, Dh)
    rep.add("rebuild from D|_P reproduces D", not bad and len(piv) == N, [{"pair": list(b)} for b in bad])
    return rep


# -----------------------------------------------------------------------------
# invariance and reduction


def _in_unit_dirac_at(D: UnitDirac, q: PointP, y: Sequence[Fraction], N: int) -> bool:
    return all(pairing_columns(evaluate_column(c, q), y, N, F0) == 0 for c in D.columns)


def check_bisection_invariance(
    gd: GroupoidDef,
    frame: DiracFrame,
    bf: BFrame,
    D: UnitDirac,
    H: SubgroupoidData,
    samples: int = 5,
    seed: int = 0,
) -> Report:
    """ρ_K maps 𝔇/Iˢ into itself for every generator K of H, at sampled base points."""
    N = gd.N
    rep = Report("bisection-invariance", seed=seed)
    if not H.generators:
        rep.add("ℬ(H)-invariant", None, reason="H has no generator bisections")
        return rep
    bad = []
    pts = []

    def at(p: PointP):
        E = [evaluate_column(c, p) for c in D.columns]
        out = []
        for k, K in enumerate(H.generators):
            for i, x in enumerate(E):
                q, y = bisection_action(gd, frame, bf, K, p, x)
                out.append((k, i, q, y, _in_unit_dirac_at(D, q, y, N)))
        return out

    count = samples if gd.p else 1
    for p, data in Sampler(seed).points(gd.P, count, at):
        pts.append(p)
        for k, i, q, y, ok in data:
            if not ok:
                bad.append({"point": p, "generator_bisection": k, "column": i, "image_point": q, "image": y})
    rep.sample_points = pts
    rep.add("ℬ(H)-invariant", not bad, bad)
    return rep


def check_reduction(
    gd: GroupoidDef, Dh: DiracFrame, H: SubgroupoidData, samples: int = 3, seed: int = 0
) -> Report:
    """R_K* D ⊆ D at sampled arrows, for each generator K of H."""
    N = gd.N
    rep = Report("reduction", seed=seed)
    if not H.generators:
        rep.add("R_K* D = D", None, reason="H has no generator bisections")
        return rep
    bad = []
    pts = []

    def at(g: PointP):
        F = Dh.matrix_at(g)
        if linalg.rank(F) < N:
            raise PoleAtPoint("D degenerate")
        own = linalg.transpose(F)
        out = []
        for k, K in enumerate(H.generators):
            for j, c in enumerate(pullback_section_at(gd, K, Dh, g)):
                ok = all(pairing_columns(c, e, N, F0) == 0 for e in own)
                out.append((k, j, ok))
        return out

    for g, data in Sampler(seed).points(gd.G, samples, at):
        pts.append(g)
        for k, j, ok in data:
            if not ok:
                bad.append({"arrow": g, "generator_bisection": k, "section": j})
    rep.sample_points = pts
    rep.add("R_K* D = D", not bad, bad)
    return rep


# -----------------------------------------------------------------------------
# closedness


def quotient_generators(bf: BFrame, D: UnitDirac) -> list[Column]:
    """Columns of 𝔇 completing Iˢ to a frame at the witness."""
    w = bf.ctx.witness
    chosen = list(bf.modulus)
    out = []
    for c in D.columns:
        trial = chosen + [c]
        if _rank_at(trial, w) == len(trial):
            chosen.append(c)
            out.append(c)
    return out


def check_closed_equivalence(
    gd: GroupoidDef, frame: DiracFrame, bf: BFrame, D: UnitDirac, Dh: DiracFrame | None = None, seed: int = 0
) -> Report:
    """Courant tensor of D_G·𝔇 against closure of 𝔇/Iˢ under the bracket of 𝔅."""
    if not bf.is_closed():
        raise WellDefinednessViolation("the input frame is not closed; 𝔅 carries no bracket")
    N = gd.N
    zero = gd.P.zero()
    rep = Report("closed-equivalence", seed=seed, sample_points=[bf.ctx.witness])
    if Dh is None:
        Dh = build_homogeneous(gd, frame, D, seed).frame
    tensor = courant_tensor(Dh, Dh.find_witness(seed))
    rep.add("Courant tensor of D vanishes", tensor.closed, [list(t) for t in tensor.nonzero[:5]])
    gens = quotient_generators(bf, D)
    bad = []
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            br = bf.bracket(gens[i], gens[j])
            off = [k for k, c in enumerate(D.columns) if not pairing_columns(br, c, N, zero).is_zero()]
            if off:
                bad.append({"pair": [i, j], "bracket": [str(x) for x in br], "pairs_nonzero_with": off})
    rep.add("𝔇/Iˢ closed under the 𝔅 bracket", not bad, bad)
    rep.add("verdicts agree", tensor.closed == (not bad), [] if tensor.closed == (not bad) else [{"tensor": tensor.closed}])
    return rep


def closed_verdicts(rep: Report) -> tuple[bool, bool]:
    a = rep.get("Courant tensor of D vanishes").status == "pass"
    b = rep.get("𝔇/Iˢ closed under the 𝔅 bracket").status == "pass"
    return a, b


# -----------------------------------------------------------------------------
# the pipeline


def drinfeld_classify(
    gd: GroupoidDef,
    frame: DiracFrame,
    H: SubgroupoidData,
    D: UnitDirac,
    samples: int = 3,
    seed: int = 0,
) -> Report:
    """Sandwich, AH ⊆ 𝔇, build D, restriction, invariance, then closedness."""
    rep = Report("classify", seed=seed)
    rep.extend(check_subgroupoid(gd, H), prefix="subgroupoid")
    sand = check_sandwich(gd, frame, D, H, seed)
    rep.extend(sand, prefix="sandwich")
    if not sand.passed:
        rep.add("classification", False, _failure_witnesses(rep), verdict="not a homogeneous datum: sandwich or AH condition fails")
        return rep
    built = build_homogeneous(gd, frame, D, seed)
    rep.extend(built.report, prefix="build")
    Dh = built.frame
    rep.extend(check_restriction(gd, frame, Dh, D, seed), prefix="restriction")
    rep.extend(check_structure(gd, frame, Dh, H, seed), prefix="structure")
    rep.extend(check_uniqueness(gd, frame, Dh, seed), prefix="uniqueness")
    bf, brep = build_b(gd, frame, seed)
    inv = check_bisection_invariance(gd, frame, bf, D, H, samples, seed)
    rep.extend(inv, prefix="invariance")
    invariant = inv.passed
    if invariant:
        rep.extend(check_reduction(gd, Dh, H, samples, seed), prefix="reduction")
    closed = None
    if bf.is_closed():
        ce = check_closed_equivalence(gd, frame, bf, D, Dh, seed)
        a, b = closed_verdicts(ce)
        rep.add("closed-equivalence/verdicts agree", a == b, [] if a == b else [{"tensor": a, "bracket": b}])
        closed = a if a == b else None
        rep.notes.append(f"Courant tensor of D vanishes: {a}; 𝔇/Iˢ bracket-closed: {b}")
    else:
        rep.notes.append("input frame is not closed; closedness of the homogeneous structure not classified")
    if not invariant:
        verdict = "not homogeneous: 𝔇/Iˢ is not invariant under ℬ(H)"
    elif closed is None:
        verdict = "homogeneous"
    else:
        verdict = "homogeneous, closed" if closed else "homogeneous, not closed"
    rep.add("classification", invariant, _failure_witnesses(rep), verdict=verdict, closed=closed)
    return rep


def _failure_witnesses(rep: Report) -> list[dict]:
    """First witness of each failing check, tagged with the check name."""
    return [{"check": c.name, "witness": c.witnesses[0]} for c in rep.failures if c.witnesses]


def verdict_of(rep: Report) -> str:
    return rep.get("classification").details["verdict"]
