"""Command line front end: ``multdirac <command> --input doc.json``.

A document declares charts, groupoids, Dirac frames, bisections, subgroupoid
data and Lagrangian subspaces over the units by name; its ``run`` block says
which named objects a command works on.  Expressions are strings in the
exprcore grammar.  Reports go to stdout as text and optionally to a JSON file.

Exit codes: 0 pass, 1 verification failed, 2 input error, 3 degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema

from . import bcourant, homogeneous, infinitesimal
from .dirac import Bivector, DiracFrame, PSection, check_lagrangian, courant_tensor, from_bivector, from_two_form
from .errors import InputError, MultDiracError, SchemaError, UnknownCommand
from .geometry import Chart, KForm, SmoothMap
from .groupoid import (
    Bisection,
    GroupoidDef,
    abelian_group,
    check_dirac_multiplicative,
    cotangent_groupoid,
    gg_chart,
    group_over_point,
    pair_dirac,
    pair_groupoid,
)
from .report import DEFAULT_SAMPLES, Report

COMMANDS = (
    "verify-dirac",
    "verify-multiplicative",
    "units-algebroid",
    "cores",
    "base-dirac",
    "integrability",
    "build-b",
    "courant-axioms",
    "iso-check",
    "bisection-action",
    "classify",
)


def load_schema() -> dict:
    text = resources.files("multdirac").joinpath("data/document.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(doc: Any) -> None:
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None


# -----------------------------------------------------------------------------
# document


@dataclass
class Document:
    raw: dict
    charts: dict[str, Chart] = field(default_factory=dict)
    groupoids: dict[str, GroupoidDef] = field(default_factory=dict)
    dirac: dict[str, DiracFrame] = field(default_factory=dict)
    bisections: dict[str, Bisection] = field(default_factory=dict)
    subgroupoids: dict[str, homogeneous.SubgroupoidData] = field(default_factory=dict)
    unit_dirac: dict[str, homogeneous.UnitDirac] = field(default_factory=dict)
    seed: int = 0
    samples: int = DEFAULT_SAMPLES

    @property
    def run(self) -> dict:
        return self.raw.get("run", {})

    def need(self, table: str, key: str) -> Any:
        name = self.run.get(key)
        if name is None:
            raise InputError(f"the run block needs '{key}' for this command")
        return _lookup(getattr(self, table), name, table)


def _lookup(table: dict, name: str, what: str) -> Any:
    try:
        return table[name]
    except KeyError:
        raise InputError(f"unknown {what} entry {name!r}") from None


def _coefficients(chart: Chart, entries: dict) -> dict[tuple[int, ...], Any]:
    out = {}
    for key, value in entries.items():
        names = [k.strip() for k in key.split(",")]
        try:
            idx = tuple(chart.coordinates.index(n) for n in names)
        except ValueError:
            raise InputError(f"coefficient key {key!r} names a coordinate outside {chart.name}") from None
        out[idx] = str(value)
    return out


def _strs(col: Sequence) -> list[str]:
    return [str(c) for c in col]


def _groupoid(doc: Document, entry: dict) -> GroupoidDef:
    kind = entry["kind"]
    ch = lambda key: _lookup(doc.charts, entry[key], "charts")
    if kind == "pair":
        return pair_groupoid(ch("base"))
    if kind == "cotangent":
        return cotangent_groupoid(ch("base"))
    if kind == "abelian":
        return abelian_group(ch("chart"))
    if kind == "group":
        return group_over_point(ch("chart"), _strs(entry["mult"]), _strs(entry["inverse"]), [_fraction(x) for x in entry["identity"]])
    G, P, C = ch("arrows"), ch("base"), ch("composable")
    GG = gg_chart(G)
    return GroupoidDef(
        f"groupoid on {G.name}",
        G,
        P,
        SmoothMap(G, P, _strs(entry["source"])),
        SmoothMap(G, P, _strs(entry["target"])),
        SmoothMap(P, G, _strs(entry["unit"])),
        SmoothMap(G, G, _strs(entry["inverse"])),
        C,
        SmoothMap(C, G, _strs(entry["pr1"])),
        SmoothMap(C, G, _strs(entry["pr2"])),
        SmoothMap(C, G, _strs(entry["mult"])),
        SmoothMap(GG, C, _strs(entry["embed"])),
    )


def _fraction(x):
    from fractions import Fraction

    try:
        return Fraction(str(x))
    except ValueError:
        raise InputError(f"identity entry {x!r} is not a rational number") from None


def _frame_chart(doc: Document, name: str, entry: dict) -> Chart:
    if "chart" in entry:
        return _lookup(doc.charts, entry["chart"], "charts")
    if "groupoid" in entry:
        return _lookup(doc.groupoids, entry["groupoid"], "groupoids").G
    raise InputError(f"dirac entry {name!r} needs 'chart' or 'groupoid'")


def _dirac(doc: Document, name: str, entry: dict) -> DiracFrame:
    if "pair_of" in entry:
        base = _lookup(doc.dirac, entry["pair_of"], "dirac")
        return pair_dirac(base)[1]
    chart = _frame_chart(doc, name, entry)
    if "bivector" in entry:
        return from_bivector(Bivector(chart, _coefficients(chart, entry["bivector"])), name)
    if "two_form" in entry:
        return from_two_form(KForm(chart, 2, _coefficients(chart, entry["two_form"])), name)
    secs = [PSection(chart, _strs(s["vector"]), _strs(s["covector"])) for s in entry["sections"]]
    return DiracFrame(chart, secs, name)


def _columns(chart: Chart, cols: Sequence[Sequence]) -> list[list]:
    return [[chart.lift(str(x)) for x in c] for c in cols]


def load_document(doc: dict, seed: int | None = None, samples: int | None = None) -> Document:
    validate(doc)
    out = Document(doc)
    sampling = doc.get("sampling", {})
    out.seed = seed if seed is not None else sampling.get("seed", 0)
    out.samples = samples if samples is not None else sampling.get("count", DEFAULT_SAMPLES)
    for name, coords in doc["charts"].items():
        out.charts[name] = Chart(name, coords)
    for name, entry in doc.get("groupoids", {}).items():
        out.groupoids[name] = _groupoid(out, entry)
    # frames may refer to earlier frames through pair_of
    for name, entry in doc.get("dirac", {}).items():
        out.dirac[name] = _dirac(out, name, entry)
    for name, entry in doc.get("bisections", {}).items():
        gd = _lookup(out.groupoids, entry["groupoid"], "groupoids")
        K = SmoothMap(gd.P, gd.G, _strs(entry["map"]))
        inv = SmoothMap(gd.P, gd.P, _strs(entry["phi_inverse"])) if "phi_inverse" in entry else None
        out.bisections[name] = Bisection(K, inv, name)
    for name, entry in doc.get("subgroupoids", {}).items():
        gd = _lookup(out.groupoids, entry["groupoid"], "groupoids")
        gens = [_lookup(out.bisections, g, "bisections") for g in entry.get("generators", [])]
        out.subgroupoids[name] = homogeneous.SubgroupoidData(_columns(gd.P, entry["AH"]), gens, name)
    return out


def _unit_dirac(doc: Document, gd: GroupoidDef, frame: DiracFrame) -> homogeneous.UnitDirac:
    name = doc.run.get("unit_dirac")
    if name is None:
        raise InputError("the run block needs 'unit_dirac' for this command")
    entry = _lookup(doc.raw.get("unit_dirac", {}), name, "unit_dirac")
    kind = entry["kind"]
    if kind == "g_itself":
        return homogeneous.g_itself(gd, frame, doc.seed)
    if kind == "subalgebroid":
        return homogeneous.from_subalgebroid(gd, frame, _columns(gd.P, entry["AH"]), doc.seed)
    if kind == "pair":
        base = _lookup(doc.dirac, entry["base"], "dirac")
        quot = _lookup(doc.dirac, entry["quotient"], "dirac")
        return homogeneous.pair_unit_dirac(gd, base, quot)
    cols = _columns(gd.P, entry["columns"])
    if any(len(c) != 2 * gd.N for c in cols):
        raise InputError(f"unit_dirac {name!r}: columns must have {2 * gd.N} entries")
    return homogeneous.UnitDirac(gd.P, cols, name)


# -----------------------------------------------------------------------------
# commands


def _gd_frame(doc: Document) -> tuple[GroupoidDef, DiracFrame]:
    gd = doc.need("groupoids", "groupoid")
    frame = doc.need("dirac", "frame")
    if frame.chart != gd.G:
        raise InputError("the run frame does not live on the arrows of the run groupoid")
    return gd, frame


def _describe(rep: Report, label: str, cols: Sequence[Sequence]) -> None:
    for i, c in enumerate(cols):
        rep.notes.append(f"{label} {i}: ({', '.join(str(x) for x in c)})")


def cmd_verify_dirac(doc: Document, family: str | None) -> Report:
    name = doc.run.get("dirac") or doc.run.get("frame")
    if name is None:
        raise InputError("the run block needs 'dirac' or 'frame'")
    frame = _lookup(doc.dirac, name, "dirac")
    w = frame.find_witness(doc.seed)
    rep = check_lagrangian(frame, w)
    rep.seed = doc.seed
    rep.sample_points = [w]
    if rep.passed:
        t = courant_tensor(frame, w)
        rep.add("closed", t.closed, [{"indices": list(k), "value": str(t.table[k])} for k in t.nonzero[:5]])
    return rep


def cmd_verify_multiplicative(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    return check_dirac_multiplicative(gd, frame, doc.samples, doc.seed)


def cmd_units_algebroid(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    frame_A, rep = infinitesimal.units_algebroid(gd, frame, doc.seed)
    _describe(rep, "𝔄 generator", [s.column for s in frame_A])
    return rep


def cmd_cores(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    Is, It, rep = infinitesimal.core_frames(gd, frame, doc.seed)
    _describe(rep, "Iˢ generator", [s.column for s in Is])
    _describe(rep, "Iᵗ generator", [s.column for s in It])
    return rep


def cmd_base_dirac(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    DP, rep = infinitesimal.base_dirac(gd, frame, doc.samples, doc.seed)
    if DP is not None:
        _describe(rep, "D_P generator", [s.column() for s in DP.sections])
    return rep


def cmd_integrability(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    return infinitesimal.integrability_criterion(gd, frame, doc.seed)


def cmd_build_b(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    bf, rep = bcourant.build_b(gd, frame, doc.seed)
    _describe(rep, "representative", bf.representatives)
    return rep


def cmd_courant_axioms(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    bf, _ = bcourant.build_b(gd, frame, doc.seed)
    rep = bcourant.check_courant_axioms(gd, frame, bf, doc.seed)
    family = family or doc.run.get("iso")
    if family is not None and rep.passed:
        rep.extend(_iso(family)(gd, frame, bf, doc.seed), prefix=f"transport {family}")
    return rep


def _iso(family: str | None):
    checks = {
        "pair": bcourant.iso_pair_pi,
        "presymplectic": bcourant.iso_presymplectic_lambda,
        "poisson": bcourant.iso_poisson_psi,
    }
    if family not in checks:
        raise InputError("iso-check needs a family: poisson, presymplectic or pair")
    return checks[family]


def cmd_iso_check(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    check = _iso(family or doc.run.get("iso"))
    bf, _ = bcourant.build_b(gd, frame, doc.seed)
    rep = check(gd, frame, bf, doc.seed)
    rep.seed = doc.seed
    return rep


def cmd_bisection_action(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    names = doc.run.get("bisections")
    if not names:
        raise InputError("the run block needs 'bisections'")
    Ks = [_lookup(doc.bisections, n, "bisections") for n in names]
    K, L = Ks[0], (Ks[1] if len(Ks) > 1 else None)
    cf = bcourant.pair_action_closed_form(gd, K) if doc.run.get("closed_form") == "pair" else None
    bf, _ = bcourant.build_b(gd, frame, doc.seed)
    return bcourant.check_bisection_action(gd, frame, bf, K, L, doc.samples, doc.seed, cf)


def cmd_classify(doc: Document, family: str | None) -> Report:
    gd, frame = _gd_frame(doc)
    H = doc.need("subgroupoids", "subgroupoid")
    D = _unit_dirac(doc, gd, frame)
    return homogeneous.drinfeld_classify(gd, frame, H, D, doc.samples, doc.seed)


DISPATCH: dict[str, Callable[[Document, str | None], Report]] = {
    "verify-dirac": cmd_verify_dirac,
    "verify-multiplicative": cmd_verify_multiplicative,
    "units-algebroid": cmd_units_algebroid,
    "cores": cmd_cores,
    "base-dirac": cmd_base_dirac,
    "integrability": cmd_integrability,
    "build-b": cmd_build_b,
    "courant-axioms": cmd_courant_axioms,
    "iso-check": cmd_iso_check,
    "bisection-action": cmd_bisection_action,
    "classify": cmd_classify,
}


def run(command: str, path: str | Path, seed: int | None = None, samples: int | None = None, family: str | None = None) -> Report:
    """Load a document and run one command on it."""
    if command not in DISPATCH:
        raise UnknownCommand(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"no such input file: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"input is not valid JSON: {exc}") from None
    doc = load_document(raw, seed, samples)
    rep = DISPATCH[command](doc, family)
    if rep.seed is None:
        rep.seed = doc.seed
    return rep


def _error_report(command: str, exc: MultDiracError) -> Report:
    rep = Report(command)
    rep.add(type(exc).__name__, False, [str(exc)], **getattr(exc, "details", {}))
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multdirac", description="Exact checks for multiplicative Dirac structures.")
    ap.add_argument("command", help=", ".join(COMMANDS))
    ap.add_argument("family", nargs="?", help="for iso-check: poisson, presymplectic or pair")
    ap.add_argument("--input", required=True, help="JSON document")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--json-out", default=None, help="write the report as JSON here")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = run(args.command, args.input, args.seed, args.samples, args.family)
        code = 0 if rep.passed else 1
    except MultDiracError as exc:
        rep = _error_report(args.command, exc)
        code = exc.exit_code
    print(rep.to_text())
    if args.json_out:
        Path(args.json_out).write_text(rep.to_json() + "\n", encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
