"""Structured verdicts and the deterministic point sampler."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence, TypeVar

from .errors import DegeneracyError, PoleAtPoint
from .geometry import Chart, PointP

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"

DEFAULT_SAMPLES = 25
MAX_ATTEMPTS = 100

T = TypeVar("T")


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, PointP):
        return {"chart": x.chart.name, "coordinates": x.to_json()}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


@dataclass
class Check:
    name: str
    status: str
    witnesses: list[Any] = field(default_factory=list)
    valid_away_from: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "status": self.status}
        if self.witnesses:
            out["witnesses"] = _jsonable(self.witnesses)
        if self.valid_away_from:
            out["valid_away_from"] = list(self.valid_away_from)
        if self.details:
            out["details"] = _jsonable(self.details)
        return out


@dataclass
class Report:
    command: str
    checks: list[Check] = field(default_factory=list)
    seed: int | None = None
    sample_points: list[Any] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(
        self,
        name: str,
        ok: bool | None,
        witnesses: Sequence[Any] = (),
        valid_away_from: Sequence[Any] = (),
        **details: Any,
    ) -> Check:
        status = NOT_APPLICABLE if ok is None else (PASS if ok else FAIL)
        c = Check(name, status, list(witnesses), [str(v) for v in valid_away_from], dict(details))
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str | None = None) -> None:
        for c in other.checks:
            name = f"{prefix}/{c.name}" if prefix else c.name
            self.checks.append(Check(name, c.status, c.witnesses, c.valid_away_from, c.details))
        for p in other.sample_points:
            if p not in self.sample_points:
                self.sample_points.append(p)
        self.notes.extend(n for n in other.notes if n not in self.notes)
        if self.seed is None:
            self.seed = other.seed

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "verdict": PASS if self.passed else FAIL,
            "seed": self.seed,
            "sample_points": _jsonable(self.sample_points),
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        if self.seed is not None:
            lines.append(f"  seed {self.seed}, {len(self.sample_points)} sample points")
        for c in self.checks:
            lines.append(f"  [{c.status}] {c.name}")
            for w in c.witnesses[:3]:
                lines.append(f"      witness: {json.dumps(_jsonable(w), ensure_ascii=False)}")
            for v in c.valid_away_from[:3]:
                lines.append(f"      valid away from: {v} = 0")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


class Sampler:
    """Seeded stream of small exact rationals."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = random.Random(seed)

    def rational(self) -> Fraction:
        return Fraction(self._rng.randint(-5, 5), self._rng.randint(1, 4))

    def point(self, chart: Chart) -> PointP:
        return PointP(chart, [self.rational() for _ in range(chart.dim)])

    def points(
        self,
        chart: Chart,
        count: int,
        accept: Callable[[PointP], T] | None = None,
    ) -> Iterator[tuple[PointP, T | None]]:
        """Yield ``count`` points for which ``accept`` does not raise a degeneracy."""
        produced = 0
        attempts = 0
        while produced < count:
            p = self.point(chart)
            if accept is None:
                produced += 1
                yield p, None
                continue
            try:
                value = accept(p)
            except (PoleAtPoint, DegeneracyError):
                attempts += 1
                if attempts > MAX_ATTEMPTS:
                    raise DegeneracyError(
                        f"could not find {count} usable sample points on {chart.name} after {MAX_ATTEMPTS} resamples"
                    )
                continue
            produced += 1
            yield p, value


def first_good_point(chart: Chart, accept: Callable[[PointP], Any], seed: int = 0) -> PointP:
    for p, _ in Sampler(seed).points(chart, 1, accept):
        return p
    raise AssertionError("unreachable")
