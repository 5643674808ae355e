"""Rationality decision engine for fixed-determinant moduli.

Rules fire in a fixed priority order and every verdict carries an ordered
trail of the rules examined, so a decision can be replayed and audited.
The verdict depends only on the quasi-parabolic data: weights never enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

from .core import MarkedPoint, ParabolicData, ValidationError, ensure_valid, prefix_sums

RATIONAL = "rational"
STABLY_RATIONAL = "stably_rational"
UNKNOWN = "unknown"

CITATIONS: dict[str, str] = {
    "R0": "rank one: the fixed-determinant moduli space is a point",
    "R1": "Newstead criterion: trivial flags and degree = +-1 (mod rank)",
    "R2": "full-flag criterion: some point carries a complete flag",
    "R3": "unit-multiplicity criterion: some flag step has multiplicity one",
    "R4": "filtration-shift criterion: a shift-reachable degree is +-1 (mod rank)",
    "R5": "coprime-genus criterion: gcd(r,d)=1 and gcd(g,d')=1 or gcd(g,r-d')=1",
    "R6": "coprime case: stably rational with level at most r-1",
}

RULE_ORDER = ("R0", "R1", "R2", "R3", "R4", "R5", "R6")


@dataclass(frozen=True)
class TrailEntry:
    rule: str
    citation: str
    fired: bool
    detail: tuple[tuple[str, str], ...]

    def detail_dict(self) -> dict[str, str]:
        return dict(self.detail)


@dataclass(frozen=True)
class NormalizedInput:
    g: int
    r: int
    d_mod_r: int
    mults: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Verdict:
    conclusion: str
    level: Optional[int]
    trail: tuple[TrailEntry, ...]
    normalized: NormalizedInput


def _detail(**kwargs) -> tuple[tuple[str, str], ...]:
    return tuple(sorted((k, str(v)) for k, v in kwargs.items()))


def trivial_flags(data: ParabolicData) -> bool:
    return all(p.levels == 1 for p in data.points)


def reachable_degrees(data: ParabolicData) -> frozenset[int]:
    """Residues mod r of the degrees reachable by per-point prefix shifts."""
    ensure_valid(data)
    current = {data.d % data.r}
    for p in data.points:
        shifts = set(prefix_sums(p.mults))
        current = {(x - s) % data.r for x in current for s in shifts}
    return frozenset(current)


def _unit_residue_reached(r: int, residues: frozenset[int]) -> bool:
    return 1 % r in residues or (r - 1) % r in residues


def decide(data: ParabolicData) -> Verdict:
    """Fixed-determinant rationality verdict with a replayable trail."""
    ensure_valid(data)
    r, d, g = data.r, data.d, data.g
    residue = d % r
    trail: list[TrailEntry] = []
    conclusion: Optional[str] = None
    level: Optional[int] = None

    def record(rule: str, fired: bool, **detail) -> bool:
        trail.append(TrailEntry(rule, CITATIONS[rule], fired, _detail(**detail)))
        return fired

    normalized = NormalizedInput(g, r, residue, data.mult_system())

    while True:
        if record("R0", r == 1, r=r):
            conclusion = RATIONAL
            break
        newstead = trivial_flags(data) and residue in (1 % r, (r - 1) % r)
        if record("R1", newstead, dModR=residue, trivialFlags=trivial_flags(data)):
            conclusion = RATIONAL
            break
        full = [p.id for p in data.points if p.levels == r]
        if record("R2", bool(full), fullFlagPoints=",".join(full) or "none"):
            conclusion = RATIONAL
            break
        units = [p.id for p in data.points if 1 in p.mults]
        if record("R3", bool(units), unitMultPoints=",".join(units) or "none"):
            conclusion = RATIONAL
            break
        residues = reachable_degrees(data)
        if record(
            "R4",
            _unit_residue_reached(r, residues),
            reachable=",".join(str(x) for x in sorted(residues)),
        ):
            conclusion = RATIONAL
            break
        coprime = gcd(r, d) == 1
        if coprime:
            d0 = residue  # in [1, r) because gcd(r, d) = 1 and r > 1 here
            genus_ok = gcd(g, d0) == 1 or gcd(g, r - d0) == 1
            fired = record(
                "R5",
                genus_ok,
                dNormalized=d0,
                gcdGD=gcd(g, d0),
                gcdGRD=gcd(g, r - d0),
            )
        else:
            fired = record("R5", False, gcdRD=gcd(r, d))
        if fired:
            conclusion = RATIONAL
            break
        if record("R6", coprime, gcdRD=gcd(r, d), level=r - 1):
            conclusion = STABLY_RATIONAL
            level = r - 1
            break
        conclusion = UNKNOWN
        break

    return Verdict(conclusion, level, tuple(trail), normalized)


def open_genera(r: int, d: int, g_max: int) -> tuple[int, ...]:
    """Genera in [2, g_max] where no rationality rule fires (trivial flags)."""
    if r < 1:
        raise ValidationError(f"rank < 1 (r = {r})")
    if gcd(r, d) != 1:
        raise ValidationError("requires gcd(r,d)=1")
    out = []
    for g in range(2, g_max + 1):
        data = ParabolicData(g, r, d, (MarkedPoint("p", (r,)),))
        if decide(data).conclusion != RATIONAL:
            out.append(g)
    return tuple(out)
