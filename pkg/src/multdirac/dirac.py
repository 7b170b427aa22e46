"""Sections of TM ⊕ T*M, the pairing, the Courant brackets and Dirac frames."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from . import linalg
from .errors import ChartMismatch, NotLagrangian, PoleAtPoint, RankDeficientAtPoint
from .exprcore import RationalFunction
from .geometry import (
    Chart,
    KForm,
    PointP,
    VectorField,
    bracket_components,
    contract_d_one_form,
    d_function,
    directional,
    evaluate_column,
    lie_derivative_components,
)
from .report import Report, Sampler

Entry = Union[RationalFunction, str, int, Fraction]


class PSection:
    """A pair (X, α) of a vector field and a one-form on one chart."""

    __slots__ = ("chart", "vector", "covector")

    def __init__(self, chart: Chart, vector: Sequence[Entry] | VectorField, covector: Sequence[Entry] | KForm):
        if isinstance(vector, VectorField):
            if vector.chart != chart:
                raise ChartMismatch("vector part lives on another chart")
            vector = vector.components
        if isinstance(covector, KForm):
            if covector.chart != chart:
                raise ChartMismatch("covector part lives on another chart")
            covector = covector.one_form_components()
        if len(vector) != chart.dim or len(covector) != chart.dim:
            raise ChartMismatch("section component count does not match the chart")
        self.chart = chart
        self.vector = tuple(chart.lift(c) for c in vector)
        self.covector = tuple(chart.lift(c) for c in covector)

    @classmethod
    def zero(cls, chart: Chart) -> "PSection":
        return cls(chart, chart.zeros(), chart.zeros())

    @classmethod
    def from_column(cls, chart: Chart, column: Sequence[RationalFunction]) -> "PSection":
        n = chart.dim
        return cls(chart, column[:n], column[n:])

    @property
    def vector_field(self) -> VectorField:
        return VectorField(self.chart, self.vector)

    @property
    def oneform(self) -> KForm:
        return KForm.from_one_form(self.chart, self.covector)

    def column(self) -> list[RationalFunction]:
        return list(self.vector) + list(self.covector)

    def __add__(self, other: "PSection") -> "PSection":
        _same(self, other)
        return PSection(
            self.chart,
            [a + b for a, b in zip(self.vector, other.vector)],
            [a + b for a, b in zip(self.covector, other.covector)],
        )

    def __sub__(self, other: "PSection") -> "PSection":
        return self + other.scale(-1)

    def __neg__(self) -> "PSection":
        return self.scale(-1)

    def scale(self, f: Union[RationalFunction, int, Fraction]) -> "PSection":
        f = self.chart.lift(f)
        return PSection(self.chart, [f * a for a in self.vector], [f * a for a in self.covector])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.vector) and all(c.is_zero() for c in self.covector)

    def at(self, p: PointP) -> tuple[list[Fraction], list[Fraction]]:
        return evaluate_column(self.vector, p), evaluate_column(self.covector, p)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PSection):
            return NotImplemented
        return self.chart == other.chart and self.vector == other.vector and self.covector == other.covector

    def __hash__(self) -> int:
        return hash((self.chart, self.vector, self.covector))

    def __repr__(self) -> str:
        v = ", ".join(str(c) for c in self.vector)
        a = ", ".join(str(c) for c in self.covector)
        return f"PSection(({v}), ({a}))"


def _same(a: PSection, b: PSection) -> None:
    if a.chart != b.chart:
        raise ChartMismatch(f"sections live on different charts: {a.chart.name} and {b.chart.name}")


def canonical_pairing(a: PSection, b: PSection) -> RationalFunction:
    """⟨(X,α),(Y,β)⟩ = α(Y) + β(X)."""
    _same(a, b)
    return linalg.dot(a.covector, b.vector, a.chart.zero()) + linalg.dot(b.covector, a.vector, a.chart.zero())


def pairing_columns(u: Sequence, w: Sequence, n: int, zero=0):
    """The same pairing on stacked columns (vector part first)."""
    return linalg.dot(u[n:], w[:n], zero) + linalg.dot(w[n:], u[:n], zero)


def dorfman_bracket(a: PSection, b: PSection) -> PSection:
    """([X,Y], £_X β − ι_Y dα)."""
    _same(a, b)
    c = a.chart
    vec = bracket_components(a.vector, b.vector, c)
    lie = lie_derivative_components(a.vector, b.covector, c)
    contr = contract_d_one_form(b.vector, a.covector, c)
    return PSection(c, vec, [x - y for x, y in zip(lie, contr)])


def courant_bracket_skew(a: PSection, b: PSection) -> PSection:
    """([X,Y], £_X β − £_Y α + ½ d(α(Y) − β(X)))."""
    _same(a, b)
    c = a.chart
    vec = bracket_components(a.vector, b.vector, c)
    la = lie_derivative_components(a.vector, b.covector, c)
    lb = lie_derivative_components(b.vector, a.covector, c)
    h = (linalg.dot(a.covector, b.vector, c.zero()) - linalg.dot(b.covector, a.vector, c.zero())) * Fraction(1, 2)
    dh = d_function(h, c)
    return PSection(c, vec, [x - y + z for x, y, z in zip(la, lb, dh)])


def d_operator(f: RationalFunction, chart: Chart) -> PSection:
    """𝒟f = ½(0, df), the operator dual to the anchor under the pairing."""
    return PSection(chart, chart.zeros(), [x * Fraction(1, 2) for x in d_function(chart.lift(f), chart)])


# -----------------------------------------------------------------------------
# frames


@dataclass
class DiracFrame:
    chart: Chart
    sections: list[PSection]
    label: str = ""
    witness: PointP | None = None

    def __post_init__(self) -> None:
        for s in self.sections:
            if s.chart != self.chart:
                raise ChartMismatch("frame section lives on another chart")

    @property
    def n(self) -> int:
        return self.chart.dim

    def matrix(self) -> list[list[RationalFunction]]:
        """2n × k matrix whose columns are the frame sections."""
        cols = [s.column() for s in self.sections]
        if not cols:
            return [[] for _ in range(2 * self.n)]
        return linalg.transpose(cols)

    def matrix_at(self, p: PointP) -> list[list[Fraction]]:
        return [[f.evaluate(p.coordinates) for f in row] for row in self.matrix()]

    def rank_at(self, p: PointP) -> int:
        return linalg.rank(self.matrix_at(p))

    def find_witness(self, seed: int = 0) -> PointP:
        if self.witness is not None:
            try:
                if self.rank_at(self.witness) == self.n:
                    return self.witness
            except PoleAtPoint:
                pass

        def accept(p: PointP) -> int:
            r = self.rank_at(p)
            if r < self.n:
                raise RankDeficientAtPoint("frame rank drops")
            return r

        s = Sampler(seed)
        for p, _ in s.points(self.chart, 1, accept):
            self.witness = p
            return p
        raise AssertionError("unreachable")


def check_lagrangian(frame: DiracFrame, witness: PointP | None = None) -> Report:
    rep = Report("verify-dirac")
    bad = []
    k = len(frame.sections)
    for i in range(k):
        for j in range(i, k):
            v = canonical_pairing(frame.sections[i], frame.sections[j])
            if not v.is_zero():
                bad.append({"pair": [i, j], "pairing": str(v)})
    rep.add("isotropy", not bad, bad)
    if k != frame.n:
        rep.add("generator-count", False, [{"expected": frame.n, "got": k}])
        return rep
    if witness is None:
        witness = frame.witness
    if witness is None:
        witness = Sampler(0).point(frame.chart)
    try:
        r = frame.rank_at(witness)
    except PoleAtPoint:
        rep.add("rank-at-witness", None, [witness], reason="pole at witness; resample")
        return rep
    rep.add("rank-at-witness", r == frame.n, [] if r == frame.n else [witness], rank=r, witness=witness)
    return rep


def is_lagrangian(frame: DiracFrame, witness: PointP | None = None) -> bool:
    return check_lagrangian(frame, witness).passed


def membership_at(frame: DiracFrame, p: PointP, candidate: tuple[Sequence, Sequence]) -> bool:
    M = frame.matrix_at(p)
    if linalg.rank(M) < frame.n:
        raise RankDeficientAtPoint(f"frame {frame.label!r} is degenerate at {p.to_json()}")
    vec, cov = candidate
    cand = [Fraction(x) for x in vec] + [Fraction(x) for x in cov]
    cols = linalg.transpose(M)
    n = frame.n
    return all(pairing_columns(col, cand, n, Fraction(0)) == 0 for col in cols)


@dataclass
class CourantTensor:
    table: dict[tuple[int, int, int], RationalFunction]
    closed: bool
    nonzero: list[tuple[int, int, int]] = field(default_factory=list)


def courant_tensor(frame: DiracFrame, witness: PointP | None = None) -> CourantTensor:
    """T_ijk = ⟨[e_i, e_j], e_k⟩ with the Dorfman bracket."""
    lag = check_lagrangian(frame, witness or frame.find_witness())
    if not lag.passed:
        raise NotLagrangian(f"frame {frame.label!r} is not Lagrangian", report=lag.to_dict())
    secs = frame.sections
    k = len(secs)
    table: dict[tuple[int, int, int], RationalFunction] = {}
    for i in range(k):
        for j in range(k):
            b = dorfman_bracket(secs[i], secs[j])
            for l in range(k):
                table[(i, j, l)] = canonical_pairing(b, secs[l])
    nonzero = [key for key, v in table.items() if not v.is_zero()]
    return CourantTensor(table, not nonzero, nonzero)


# -----------------------------------------------------------------------------
# constructors


class Bivector:
    """π = Σ_{i<j} π^{ij} ∂_i ∧ ∂_j."""

    def __init__(self, chart: Chart, coefficients: Mapping[tuple[int, int], Entry] | None = None):
        self.chart = chart
        coeffs: dict[tuple[int, int], RationalFunction] = {}
        for (i, j), c in (coefficients or {}).items():
            if i == j:
                continue
            val = chart.lift(c)
            if i > j:
                i, j, val = j, i, -val
            coeffs[(i, j)] = coeffs[(i, j)] + val if (i, j) in coeffs else val
        self.coefficients = {k: v for k, v in coeffs.items() if not v.is_zero()}

    def entry(self, i: int, j: int) -> RationalFunction:
        if i == j:
            return self.chart.zero()
        if i < j:
            return self.coefficients.get((i, j), self.chart.zero())
        return -self.coefficients.get((j, i), self.chart.zero())

    def matrix(self) -> list[list[RationalFunction]]:
        n = self.chart.dim
        return [[self.entry(i, j) for j in range(n)] for i in range(n)]

    def sharp(self, alpha: Sequence[RationalFunction]) -> list[RationalFunction]:
        """π♯α = π(α, ·)."""
        n = self.chart.dim
        return [linalg.dot(alpha, [self.entry(i, j) for i in range(n)], self.chart.zero()) for j in range(n)]


def from_bivector(pi: Bivector, label: str = "") -> DiracFrame:
    c = pi.chart
    secs = []
    for i in range(c.dim):
        e = [c.one() if j == i else c.zero() for j in range(c.dim)]
        secs.append(PSection(c, pi.sharp(e), e))
    return DiracFrame(c, secs, label or "graph of bivector")


def two_form_flat(omega: KForm, v: Sequence[RationalFunction]) -> list[RationalFunction]:
    """ω♭(v) = ι_v ω as components."""
    c = omega.chart
    return [linalg.dot(v, [omega.component((i, j)) for i in range(c.dim)], c.zero()) for j in range(c.dim)]


def from_two_form(omega: KForm, label: str = "") -> DiracFrame:
    if omega.degree != 2:
        raise ChartMismatch("expected a 2-form")
    c = omega.chart
    secs = []
    for i in range(c.dim):
        e = [c.one() if j == i else c.zero() for j in range(c.dim)]
        secs.append(PSection(c, e, two_form_flat(omega, e)))
    return DiracFrame(c, secs, label or "graph of 2-form")


def characteristic_ranks_at(frame: DiracFrame, p: PointP) -> tuple[int, int, int, int]:
    """(dim G0, dim G1, dim P0, dim P1) at p."""
    M = frame.matrix_at(p)
    n = frame.n
    if linalg.rank(M) < n:
        raise RankDeficientAtPoint("frame degenerate at point")
    V = M[:n]
    A = M[n:]
    g1 = linalg.rank(V)
    p1 = linalg.rank(A)
    # G0 is the image under V of ker A, and P0 likewise
    kerA = linalg.nullspace(A, len(M[0]), Fraction(1), Fraction(0))
    kerV = linalg.nullspace(V, len(M[0]), Fraction(1), Fraction(0))
    g0 = linalg.rank([linalg.matvec(V, k, Fraction(0)) for k in kerA]) if kerA else 0
    p0 = linalg.rank([linalg.matvec(A, k, Fraction(0)) for k in kerV]) if kerV else 0
    return g0, g1, p0, p1


def pontryagin_frame(chart: Chart) -> list[PSection]:
    """Coordinate basis (∂_i, 0), (0, dx_i) of TM ⊕ T*M."""
    out = []
    for i in range(chart.dim):
        e = [chart.one() if j == i else chart.zero() for j in range(chart.dim)]
        out.append(PSection(chart, e, chart.zeros()))
    for i in range(chart.dim):
        e = [chart.one() if j == i else chart.zero() for j in range(chart.dim)]
        out.append(PSection(chart, chart.zeros(), e))
    return out


def anchor_apply(section: PSection, f: RationalFunction) -> RationalFunction:
    return directional(section.vector, f, section.chart)
