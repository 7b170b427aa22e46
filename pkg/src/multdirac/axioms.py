"""Generic checker for the five Courant algebroid axioms.

A model supplies sections as tuples of rational functions over a base chart
together with the pairing, bracket, anchor and the operator 𝒟.  Section
equality may be a quotient relation (``equal``), which is how the coset
bundle reuses this checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

from .exprcore import RationalFunction
from .geometry import Chart, bracket_components, directional
from .report import Report

Section = tuple


@dataclass
class CourantModel:
    base: Chart
    pair: Callable[[Section, Section], RationalFunction]
    bracket: Callable[[Section, Section], Section]
    anchor: Callable[[Section], Sequence[RationalFunction]]
    d_op: Callable[[RationalFunction], Section]
    equal: Callable[[Section, Section], bool] | None = None

    def add(self, a: Section, b: Section) -> Section:
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a: Section, b: Section) -> Section:
        return tuple(x - y for x, y in zip(a, b))

    def scale(self, f, a: Section) -> Section:
        return tuple(f * x for x in a)

    def same(self, a: Section, b: Section) -> bool:
        if self.equal is not None:
            return self.equal(a, b)
        return all((x - y).is_zero() for x, y in zip(a, b))

    def act(self, e: Section, f: RationalFunction) -> RationalFunction:
        return directional(self.anchor(e), f, self.base)


def check_courant_axioms(
    model: CourantModel,
    sections: Sequence[Section],
    functions: Sequence[RationalFunction],
    triples: Sequence[tuple[int, int, int]] | None = None,
    command: str = "courant-axioms",
) -> Report:
    rep = Report(command)
    secs = list(sections)
    idx = list(range(len(secs)))
    if triples is None:
        triples = list(combinations(idx, 3)) if len(idx) >= 3 else [tuple(idx + idx[:1] * (3 - len(idx)))]
    pairs = [(i, j) for i in idx for j in idx if i <= j]
    third = Fraction(1, 3)

    cache: dict[tuple[int, int], Section] = {}

    def br(i: int, j: int) -> Section:
        if (i, j) not in cache:
            cache[(i, j)] = model.bracket(secs[i], secs[j])
        return cache[(i, j)]

    # 1: Jacobiator equals a third of 𝒟 of the cyclic pairing sum
    bad = []
    for i, j, k in triples:
        e1, e2, e3 = secs[i], secs[j], secs[k]
        b12, b23, b31 = br(i, j), model.bracket(e2, e3), model.bracket(e3, e1)
        jac = model.add(model.add(model.bracket(b12, e3), model.bracket(b23, e1)), model.bracket(b31, e2))
        cyc = model.pair(b12, e3) + model.pair(b23, e1) + model.pair(b31, e2)
        rhs = model.scale(third, model.d_op(cyc))
        if not model.same(jac, rhs):
            bad.append({"triple": [i, j, k]})
    rep.add("axiom-1-jacobi-anomaly", not bad, bad)

    # 2: anchor is a bracket morphism
    bad = []
    for i, j in pairs:
        lhs = model.anchor(br(i, j))
        rhs = bracket_components(model.anchor(secs[i]), model.anchor(secs[j]), model.base)
        if any(not (a - b).is_zero() for a, b in zip(lhs, rhs)):
            bad.append({"pair": [i, j]})
    rep.add("axiom-2-anchor-morphism", not bad, bad)

    # 3: Leibniz rule with the metric correction
    bad = []
    for i in idx:
        for j in idx:
            for fi, f in enumerate(functions):
                lhs = model.bracket(secs[i], model.scale(f, secs[j]))
                rhs = model.add(model.scale(f, br(i, j)), model.scale(model.act(secs[i], f), secs[j]))
                rhs = model.sub(rhs, model.scale(model.pair(secs[i], secs[j]), model.d_op(f)))
                if not model.same(lhs, rhs):
                    bad.append({"pair": [i, j], "function": str(f)})
    rep.add("axiom-3-leibniz", not bad, bad)

    # 4: anchor kills 𝒟, equivalently ⟨𝒟f, 𝒟g⟩ = 0
    bad = []
    for a, f in enumerate(functions):
        if any(not x.is_zero() for x in model.anchor(model.d_op(f))):
            bad.append({"function": str(f), "what": "anchor of D f"})
        for g in functions[a:]:
            if not model.pair(model.d_op(f), model.d_op(g)).is_zero():
                bad.append({"functions": [str(f), str(g)]})
    rep.add("axiom-4-anchor-kills-D", not bad, bad)

    # 5: metric compatibility
    bad = []
    for i, j, k in triples:
        e1, e2, e3 = secs[i], secs[j], secs[k]
        lhs = model.act(e1, model.pair(e2, e3))
        t2 = model.add(model.bracket(e1, e2), model.d_op(model.pair(e1, e2)))
        t3 = model.add(model.bracket(e1, e3), model.d_op(model.pair(e1, e3)))
        rhs = model.pair(t2, e3) + model.pair(e2, t3)
        if not (lhs - rhs).is_zero():
            bad.append({"triple": [i, j, k]})
    rep.add("axiom-5-metric-compatibility", not bad, bad)

    # the ⟨𝒟f, e⟩ = ½ anchor(e) f definition of 𝒟
    bad = []
    for f in functions:
        for i in idx:
            if not (model.pair(model.d_op(f), secs[i]) - model.act(secs[i], f) * Fraction(1, 2)).is_zero():
                bad.append({"function": str(f), "section": i})
    rep.add("D-dual-to-anchor", not bad, bad)
    return rep


def pontryagin_model(chart: Chart) -> CourantModel:
    """The standard Courant algebroid TM ⊕ T*M with sections as stacked columns."""
    from . import dirac

    n = chart.dim

    def wrap(col: Section) -> "dirac.PSection":
        return dirac.PSection.from_column(chart, list(col))

    return CourantModel(
        base=chart,
        pair=lambda a, b: dirac.canonical_pairing(wrap(a), wrap(b)),
        bracket=lambda a, b: tuple(dirac.courant_bracket_skew(wrap(a), wrap(b)).column()),
        anchor=lambda a: list(a[:n]),
        d_op=lambda f: tuple(dirac.d_operator(f, chart).column()),
    )
