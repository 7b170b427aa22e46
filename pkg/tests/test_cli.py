import json
from pathlib import Path

import pytest

from multdirac.cli import COMMANDS, main, run
from multdirac.errors import InputError, SchemaError, UnknownCommand

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def doc(name):
    return str(CORPUS / name)


POSITIVE = [
    ("pair_poisson.json", "verify-dirac"),
    ("pair_poisson.json", "verify-multiplicative"),
    ("pair_poisson.json", "units-algebroid"),
    ("pair_poisson.json", "cores"),
    ("pair_poisson.json", "base-dirac"),
    ("pair_poisson.json", "integrability"),
    ("pair_poisson.json", "build-b"),
    ("pair_poisson.json", "courant-axioms"),
    ("pair_poisson.json", "iso-check"),
    ("pair_poisson.json", "bisection-action"),
    ("pair_poisson.json", "classify"),
    ("pair_presymplectic.json", "courant-axioms"),
    ("cotangent_symplectic.json", "iso-check"),
    ("cotangent_symplectic.json", "bisection-action"),
    ("poisson_group.json", "iso-check"),
    ("poisson_group.json", "integrability"),
    ("poisson_homogeneous.json", "classify"),
    ("pair_translation.json", "classify"),
    ("heisenberg_left_invariant.json", "classify"),
]

NEGATIVE = [
    ("pair_nonclosed.json", "verify-dirac"),
    ("pair_nonclosed.json", "courant-axioms"),
    ("poisson_not_coisotropic.json", "classify"),
    ("pair_translation_x_dependent.json", "classify"),
]


def test_every_command_is_exercised():
    assert {c for _, c in POSITIVE} == set(COMMANDS)


@pytest.mark.parametrize("name, command", POSITIVE)
def test_positive_examples_exit_zero(name, command, capsys):
    assert main([command, "--input", doc(name), "--samples", "3"]) == 0
    assert "PASS" in capsys.readouterr().out.upper()


@pytest.mark.parametrize("name, command", NEGATIVE)
def test_negative_examples_exit_one_with_witnesses(name, command, tmp_path):
    out = tmp_path / "r.json"
    assert main([command, "--input", doc(name), "--samples", "3", "--json-out", str(out)]) == 1
    report = json.loads(out.read_text())
    failing = [c for c in report["checks"] if c["status"] == "fail"]
    assert failing
    assert any(c["witnesses"] for c in failing)


def test_nonclosed_pair_is_still_multiplicative():
    assert main(["verify-multiplicative", "--input", doc("pair_nonclosed.json"), "--samples", "3"]) == 0


def test_integrability_detects_nonclosed(tmp_path):
    out = tmp_path / "r.json"
    assert main(["integrability", "--input", doc("pair_nonclosed.json"), "--json-out", str(out)]) == 1
    checks = {c["name"]: c for c in json.loads(out.read_text())["checks"]}
    assert checks["agrees-with-courant-tensor"]["status"] == "pass"


def test_presymplectic_axioms_include_transport():
    rep = run("courant-axioms", doc("pair_presymplectic.json"), samples=3)
    assert rep.passed
    assert any(c.name.startswith("transport ") for c in rep.checks)


@pytest.mark.parametrize("family", ["pair", "presymplectic"])
def test_iso_family_argument(family):
    assert run("iso-check", doc("pair_presymplectic.json"), family=family).passed


def test_classify_verdicts():
    assert run("classify", doc("poisson_homogeneous.json")).get("classification").details["verdict"] == (
        "homogeneous, closed"
    )
    assert run("classify", doc("heisenberg_left_invariant.json")).get("classification").details["verdict"] == (
        "homogeneous, not closed"
    )


def test_reports_are_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        main(["bisection-action", "--input", doc("pair_poisson.json"), "--samples", "3", "--seed", "4", "--json-out", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()
    report = json.loads(paths[0].read_text())
    assert report["seed"] == 4
    assert len(report["sample_points"]) == 3


class TestErrors:
    def test_bad_version(self):
        assert main(["verify-dirac", "--input", doc("bad_version.json")]) == 2
        with pytest.raises(SchemaError):
            run("verify-dirac", doc("bad_version.json"))

    def test_unknown_command(self):
        assert main(["frobnicate", "--input", doc("pair_poisson.json")]) == 2
        with pytest.raises(UnknownCommand):
            run("frobnicate", doc("pair_poisson.json"))

    def test_missing_file(self, tmp_path):
        assert main(["verify-dirac", "--input", str(tmp_path / "nope.json")]) == 2

    def test_not_json(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{ not json")
        with pytest.raises(SchemaError):
            run("verify-dirac", p)

    def test_dangling_reference(self, tmp_path):
        raw = json.loads((CORPUS / "pair_poisson.json").read_text())
        raw["run"]["dirac"] = "missing"
        p = tmp_path / "x.json"
        p.write_text(json.dumps(raw))
        with pytest.raises(InputError):
            run("verify-dirac", p)

    def test_expression_error_is_input_error(self, tmp_path, capsys):
        raw = json.loads((CORPUS / "pair_poisson.json").read_text())
        key = next(iter(raw["dirac"]))
        raw["dirac"][key]["bivector"] = {"x,y": "x +"}
        p = tmp_path / "x.json"
        p.write_text(json.dumps(raw))
        assert main(["verify-dirac", "--input", str(p)]) == 2
