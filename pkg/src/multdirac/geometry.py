"""Coordinate charts, rational maps, vector fields and differential forms.

All objects live on a single chart with an ordered list of coordinate
names.  Forms store one coefficient per strictly increasing index tuple, so
antisymmetry is structural.  Degrees are capped at 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence, Union

from .errors import ChartMismatch, DegreeOverflow, DegreeUnderflow
from .exprcore import RationalFunction, parse_expression
from . import linalg

MAX_DEGREE = 3

Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class Chart:
    name: str
    coordinates: tuple[str, ...]

    def __init__(self, name: str, coordinates: Iterable[str]):
        object.__setattr__(self, "name", name)
        coords = tuple(coordinates)
        if len(set(coords)) != len(coords):
            raise ChartMismatch(f"chart {name!r} has repeated coordinates {coords}")
        object.__setattr__(self, "coordinates", coords)

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def const(self, c: Scalar) -> RationalFunction:
        return RationalFunction.constant(c, self.coordinates)

    def zero(self) -> RationalFunction:
        return self.const(0)

    def one(self) -> RationalFunction:
        return self.const(1)

    def var(self, name_or_index: str | int) -> RationalFunction:
        name = self.coordinates[name_or_index] if isinstance(name_or_index, int) else name_or_index
        return RationalFunction.variable(name, self.coordinates)

    def coords(self) -> list[RationalFunction]:
        return [self.var(c) for c in self.coordinates]

    def parse(self, text: str) -> RationalFunction:
        return parse_expression(text, self.coordinates)

    def lift(self, f: Union[RationalFunction, Scalar, str]) -> RationalFunction:
        if isinstance(f, str):
            return self.parse(f)
        if isinstance(f, RationalFunction):
            if f.variables != self.coordinates:
                raise ChartMismatch(f"function over {f.variables} used on chart {self.coordinates}")
            return f
        return self.const(f)

    def zeros(self, n: int | None = None) -> list[RationalFunction]:
        return [self.zero() for _ in range(self.dim if n is None else n)]

    def point(self, values: Sequence[Scalar]) -> "PointP":
        return PointP(self, values)


@dataclass(frozen=True)
class PointP:
    chart: Chart
    coordinates: tuple[Fraction, ...]

    def __init__(self, chart: Chart, coordinates: Sequence[Scalar]):
        vals = tuple(Fraction(c) for c in coordinates)
        if len(vals) != chart.dim:
            raise ChartMismatch(f"point of dimension {len(vals)} on chart of dimension {chart.dim}")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "coordinates", vals)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.chart.coordinates, self.coordinates))

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coordinates]


def evaluate_column(column: Sequence[RationalFunction], p: PointP) -> list[Fraction]:
    return [f.evaluate(p.coordinates) for f in column]


def evaluate_matrix(M: Sequence[Sequence[RationalFunction]], p: PointP) -> list[list[Fraction]]:
    return [[f.evaluate(p.coordinates) for f in row] for row in M]


@dataclass(frozen=True)
class SmoothMap:
    source: Chart
    target: Chart
    components: tuple[RationalFunction, ...]

    def __init__(self, source: Chart, target: Chart, components: Sequence[Union[RationalFunction, str, Scalar]]):
        comps = tuple(source.lift(c) for c in components)
        if len(comps) != target.dim:
            raise ChartMismatch(
                f"map into {target.name} needs {target.dim} components, got {len(comps)}"
            )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "components", comps)

    @classmethod
    def identity(cls, chart: Chart) -> "SmoothMap":
        return cls(chart, chart, chart.coords())

    def assignment(self) -> dict[str, RationalFunction]:
        return dict(zip(self.target.coordinates, self.components))

    def pull(self, f: RationalFunction) -> RationalFunction:
        """f ∘ self for a function f on the target chart."""
        if f.variables != self.target.coordinates:
            raise ChartMismatch("function is not on the target chart")
        return f.subs(self.assignment(), self.source.coordinates)

    def pull_column(self, column: Sequence[RationalFunction]) -> list[RationalFunction]:
        a = self.assignment()
        return [f.subs(a, self.source.coordinates) for f in column]

    def pull_matrix(self, M: Sequence[Sequence[RationalFunction]]) -> list[list[RationalFunction]]:
        a = self.assignment()
        return [[f.subs(a, self.source.coordinates) for f in row] for row in M]

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """self ∘ inner."""
        if inner.target != self.source:
            raise ChartMismatch(f"cannot compose {self.source.name} after {inner.target.name}")
        return SmoothMap(inner.source, self.target, inner.pull_column(self.components))

    def jacobian(self) -> list[list[RationalFunction]]:
        return jacobian(self)

    def __call__(self, p: PointP) -> PointP:
        if p.chart != self.source:
            raise ChartMismatch("point is not on the source chart")
        return PointP(self.target, evaluate_column(self.components, p))


def jacobian(m: SmoothMap) -> list[list[RationalFunction]]:
    return [[c.diff(x) for x in m.source.coordinates] for c in m.components]


def jacobian_at(m: SmoothMap, p: PointP) -> list[list[Fraction]]:
    return evaluate_matrix(jacobian(m), p)


def pushforward_at(m: SmoothMap, p: PointP, v: Sequence[Scalar]) -> list[Fraction]:
    return linalg.matvec(jacobian_at(m, p), [Fraction(x) for x in v], Fraction(0))


# -----------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple[RationalFunction, ...]

    def __init__(self, chart: Chart, components: Sequence[Union[RationalFunction, str, Scalar]]):
        comps = tuple(chart.lift(c) for c in components)
        if len(comps) != chart.dim:
            raise ChartMismatch("vector field component count does not match the chart")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, chart.zeros())

    def apply(self, f: RationalFunction) -> RationalFunction:
        """Directional derivative X·f."""
        return directional(self.components, f, self.chart)

    def __add__(self, other: "VectorField") -> "VectorField":
        _same(self.chart, other.chart)
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same(self.chart, other.chart)
        return VectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def scale(self, f: Union[RationalFunction, Scalar]) -> "VectorField":
        f = self.chart.lift(f)
        return VectorField(self.chart, [f * a for a in self.components])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)


def _same(a: Chart, b: Chart) -> None:
    if a != b:
        raise ChartMismatch(f"objects live on different charts: {a.name} and {b.name}")


def directional(components: Sequence[RationalFunction], f: RationalFunction, chart: Chart) -> RationalFunction:
    acc = chart.zero()
    for x, X in zip(chart.coordinates, components):
        if X.is_zero():
            continue
        df = f.diff(x)
        if not df.is_zero():
            acc = acc + X * df
    return acc


def bracket_components(
    X: Sequence[RationalFunction], Y: Sequence[RationalFunction], chart: Chart
) -> list[RationalFunction]:
    return [directional(X, b, chart) - directional(Y, a, chart) for a, b in zip(X, Y)]


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    _same(X.chart, Y.chart)
    return VectorField(X.chart, bracket_components(X.components, Y.components, X.chart))


# -----------------------------------------------------------------------------
# differential forms


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation, 0 when an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class KForm:
    """A k-form with one coefficient per increasing index tuple."""

    __slots__ = ("chart", "degree", "coefficients")

    def __init__(self, chart: Chart, degree: int, coefficients: Mapping[tuple[int, ...], object] | None = None):
        if degree < 0:
            raise DegreeUnderflow("negative form degree")
        if degree > MAX_DEGREE:
            raise DegreeOverflow(f"forms are capped at degree {MAX_DEGREE}")
        self.chart = chart
        self.degree = degree
        coeffs: dict[tuple[int, ...], RationalFunction] = {}
        for idx, c in (coefficients or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ChartMismatch(f"index {idx} does not match degree {degree}")
            if any(i < 0 or i >= chart.dim for i in idx):
                raise ChartMismatch(f"index {idx} outside the chart")
            sign, key = _sort_sign(idx)
            if sign == 0:
                continue
            val = chart.lift(c)
            if sign < 0:
                val = -val
            prev = coeffs.get(key)
            val = val if prev is None else prev + val
            if val.is_zero():
                coeffs.pop(key, None)
            else:
                coeffs[key] = val
        self.coefficients = coeffs

    @classmethod
    def from_one_form(cls, chart: Chart, components: Sequence[Union[RationalFunction, str, Scalar]]) -> "KForm":
        if len(components) != chart.dim:
            raise ChartMismatch("one-form component count does not match the chart")
        return cls(chart, 1, {(i,): c for i, c in enumerate(components)})

    @classmethod
    def function(cls, f: RationalFunction, chart: Chart) -> "KForm":
        return cls(chart, 0, {(): f})

    def component(self, idx: Sequence[int]) -> RationalFunction:
        sign, key = _sort_sign(idx)
        if sign == 0:
            return self.chart.zero()
        val = self.coefficients.get(key)
        if val is None:
            return self.chart.zero()
        return val if sign > 0 else -val

    def one_form_components(self) -> list[RationalFunction]:
        if self.degree != 1:
            raise ChartMismatch("not a one-form")
        return [self.component((i,)) for i in range(self.chart.dim)]

    def scalar(self) -> RationalFunction:
        if self.degree != 0:
            raise ChartMismatch("not a function")
        return self.component(())

    def is_zero(self) -> bool:
        return not self.coefficients

    def __add__(self, other: "KForm") -> "KForm":
        _same(self.chart, other.chart)
        if self.degree != other.degree:
            raise ChartMismatch("cannot add forms of different degree")
        merged: dict[tuple[int, ...], RationalFunction] = dict(self.coefficients)
        for k, v in other.coefficients.items():
            merged[k] = merged[k] + v if k in merged else v
        return KForm(self.chart, self.degree, merged)

    def __neg__(self) -> "KForm":
        return KForm(self.chart, self.degree, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def scale(self, f: Union[RationalFunction, Scalar]) -> "KForm":
        f = self.chart.lift(f)
        return KForm(self.chart, self.degree, {k: f * v for k, v in self.coefficients.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        return self.chart == other.chart and self.degree == other.degree and self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash((self.chart, self.degree, tuple(sorted(self.coefficients.items()))))

    def evaluate_on(self, vectors: Sequence[Sequence[RationalFunction]]) -> RationalFunction:
        """ω(X_1, ..., X_k) with the determinant convention."""
        if len(vectors) != self.degree:
            raise ChartMismatch("wrong number of vector arguments")
        acc = self.chart.const(1) if self.degree == 0 else self.chart.zero()
        if self.degree == 0:
            return self.scalar()
        for key, c in self.coefficients.items():
            for perm in permutations(range(self.degree)):
                sign, _ = _sort_sign(perm)
                term = c
                for slot, pos in enumerate(perm):
                    term = term * vectors[slot][key[pos]]
                acc = acc + term if sign > 0 else acc - term
        return acc

    def __repr__(self) -> str:
        names = self.chart.coordinates
        parts = []
        for key, c in sorted(self.coefficients.items()):
            basis = "∧".join(f"d{names[i]}" for i in key) or "1"
            parts.append(f"({c})*{basis}")
        return " + ".join(parts) if parts else f"0 [{self.degree}-form]"


def exterior_derivative(omega: KForm) -> KForm:
    if omega.degree >= MAX_DEGREE:
        raise DegreeOverflow(f"d of a {omega.degree}-form exceeds the degree cap")
    chart = omega.chart
    out: dict[tuple[int, ...], RationalFunction] = {}
    for key, c in omega.coefficients.items():
        for j, x in enumerate(chart.coordinates):
            if j in key:
                continue
            dc = c.diff(x)
            if dc.is_zero():
                continue
            sign, newkey = _sort_sign((j,) + key)
            term = dc if sign > 0 else -dc
            out[newkey] = out[newkey] + term if newkey in out else term
    return KForm(chart, omega.degree + 1, out)


def d_function(f: RationalFunction, chart: Chart) -> list[RationalFunction]:
    return [f.diff(x) for x in chart.coordinates]


def interior_product(X: VectorField, omega: KForm) -> KForm:
    """Contraction into the first slot."""
    _same(X.chart, omega.chart)
    if omega.degree < 1:
        raise DegreeUnderflow("cannot contract a function")
    out: dict[tuple[int, ...], RationalFunction] = {}
    for key, c in omega.coefficients.items():
        for pos, i in enumerate(key):
            Xi = X.components[i]
            if Xi.is_zero():
                continue
            rest = key[:pos] + key[pos + 1 :]
            term = Xi * c
            if pos % 2:
                term = -term
            out[rest] = out[rest] + term if rest in out else term
    return KForm(omega.chart, omega.degree - 1, out)


def lie_derivative_one_form(X: VectorField, alpha: KForm) -> KForm:
    """Cartan formula ι_X dα + d(ι_X α)."""
    _same(X.chart, alpha.chart)
    if alpha.degree != 1:
        raise ChartMismatch("expected a one-form")
    return interior_product(X, exterior_derivative(alpha)) + exterior_derivative(interior_product(X, alpha))


def lie_derivative_components(
    X: Sequence[RationalFunction], alpha: Sequence[RationalFunction], chart: Chart
) -> list[RationalFunction]:
    """(£_X α)_i = X(α_i) + Σ_j α_j ∂_i X^j, the algebraic expansion."""
    out = []
    for i, xi in enumerate(chart.coordinates):
        acc = directional(X, alpha[i], chart)
        for aj, Xj in zip(alpha, X):
            if aj.is_zero() or Xj.is_zero():
                continue
            d = Xj.diff(xi)
            if not d.is_zero():
                acc = acc + aj * d
        out.append(acc)
    return out


def contract_d_one_form(
    Y: Sequence[RationalFunction], alpha: Sequence[RationalFunction], chart: Chart
) -> list[RationalFunction]:
    """(ι_Y dα)_i = Σ_j Y^j (∂_j α_i − ∂_i α_j)."""
    out = []
    names = chart.coordinates
    for i in range(chart.dim):
        acc = chart.zero()
        for j in range(chart.dim):
            Yj = Y[j]
            if Yj.is_zero() or i == j:
                continue
            t = alpha[i].diff(names[j]) - alpha[j].diff(names[i])
            if not t.is_zero():
                acc = acc + Yj * t
        out.append(acc)
    return out


def pullback_form(m: SmoothMap, omega: KForm) -> KForm:
    if omega.chart != m.target:
        raise ChartMismatch("form is not on the map's target chart")
    k = omega.degree
    src = m.source
    if k == 0:
        return KForm(src, 0, {(): m.pull(omega.scalar())})
    J = jacobian(m)
    out: dict[tuple[int, ...], RationalFunction] = {}
    pulled = {key: m.pull(c) for key, c in omega.coefficients.items()}
    for newkey in combinations(range(src.dim), k):
        acc = src.zero()
        for key, c in pulled.items():
            minor = [[J[r][cidx] for cidx in newkey] for r in key]
            det = _det(minor, src)
            if not det.is_zero():
                acc = acc + c * det
        if not acc.is_zero():
            out[newkey] = acc
    return KForm(src, k, out)


def _det(M: Sequence[Sequence[RationalFunction]], chart: Chart) -> RationalFunction:
    n = len(M)
    if n == 0:
        return chart.one()
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    acc = chart.zero()
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = M[0][j] * _det(minor, chart)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


@dataclass(frozen=True)
class VectorAlong:
    """A fibre-chart tangent vector with coefficients in base-chart coordinates."""

    base: Chart
    fibre: Chart
    components: tuple[RationalFunction, ...]


def restrict_along(eps: SmoothMap, obj: Union[VectorField, KForm]):
    """Forms are pulled back; vector fields are substituted component-wise."""
    if isinstance(obj, KForm):
        return pullback_form(eps, obj)
    if isinstance(obj, VectorField):
        if obj.chart != eps.target:
            raise ChartMismatch("vector field is not on the embedding's target chart")
        return VectorAlong(eps.source, eps.target, tuple(eps.pull_column(obj.components)))
    raise TypeError(f"cannot restrict {type(obj).__name__}")
