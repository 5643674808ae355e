"""The shifting operator on weighted flag data.

Shifting by eta subtracts eta from every weight and wraps the levels that
fall below zero around to the top (adding one), cyclically permuting the
multiplicities and lowering the degree by the total multiplicity of the
wrapped levels. A level whose weight equals eta exactly moves to weight 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .core import (
    InternalCheckError,
    MarkedPoint,
    ParabolicData,
    Rational,
    SubType,
    ValidationError,
    ensure_subtype,
    ensure_valid,
    pardeg,
    rat,
    require_weights,
    slope,
)

ShiftLike = Union["ShiftAmount", Rational, int, str, Mapping[str, object], Sequence[object]]


@dataclass(frozen=True)
class ShiftAmount:
    """Per-point shift values in [0, 1], aligned with the id-sorted points."""

    values: tuple[Rational, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(rat(v) for v in self.values))
        bad = [v for v in self.values if v < 0 or v > 1]
        if bad:
            raise ValidationError(f"shift values outside [0, 1]: {bad}")

    @property
    def total(self) -> Rational:
        return sum(self.values, Fraction(0))

    @classmethod
    def for_data(cls, data: ParabolicData, eta: ShiftLike) -> "ShiftAmount":
        if isinstance(eta, ShiftAmount):
            if len(eta.values) != data.n:
                raise ValidationError(
                    f"{len(eta.values)} shift values for {data.n} points"
                )
            return eta
        if isinstance(eta, Mapping):
            missing = [p.id for p in data.points if p.id not in eta]
            if missing:
                raise ValidationError(
                    [f"point {pid}: missing shift value" for pid in missing]
                )
            return cls(tuple(rat(eta[p.id]) for p in data.points))
        if isinstance(eta, (Fraction, int, str)):
            return cls(tuple(rat(eta) for _ in data.points))
        if len(eta) != data.n:
            raise ValidationError(f"{len(eta)} shift values for {data.n} points")
        return cls(tuple(rat(v) for v in eta))


def _wrap_count(weights: Sequence[Rational], eta: Rational) -> int:
    """Number of levels with weight strictly below eta."""
    return sum(1 for w in weights if w < eta)


def shift(data: ParabolicData, eta: ShiftLike) -> ParabolicData:
    """Shifted datum: translated weights, cycled multiplicities, lower degree."""
    ensure_valid(data)
    require_weights(data)
    amount = ShiftAmount.for_data(data, eta)
    points = []
    degree = data.d
    for p, e in zip(data.points, amount.values):
        i = _wrap_count(p.weights, e)
        mults = p.mults[i:] + p.mults[:i]
        weights = tuple(w - e for w in p.weights[i:]) + tuple(
            1 + w - e for w in p.weights[:i]
        )
        degree -= sum(p.mults[:i])
        points.append(MarkedPoint(p.id, mults, weights))
    out = ParabolicData(data.g, data.r, degree, tuple(points))
    ensure_valid(out)
    return out


def shift_compose_check(data: ParabolicData, eta1: ShiftLike, eta2: ShiftLike) -> bool:
    """Whether shifting twice equals shifting by the sum (it must)."""
    a = ShiftAmount.for_data(data, eta1)
    b = ShiftAmount.for_data(data, eta2)
    combined = tuple(x + y for x, y in zip(a.values, b.values))
    if any(v > 1 for v in combined):
        raise ValidationError(
            "combined shift exceeds 1 at some point; split off a full twist first"
        )
    return shift(shift(data, a), b) == shift(data, ShiftAmount(combined))


def slope_shift_law(data: ParabolicData, eta: ShiftLike) -> Rational:
    """Slope after shifting, after verifying the exact degree bookkeeping.

    The shifted weighted degree must equal the original minus rank times the
    total shift; a mismatch is a bug and raises.
    """
    amount = ShiftAmount.for_data(data, eta)
    shifted = shift(data, amount)
    expected = pardeg(data) - data.r * amount.total
    actual = pardeg(shifted)
    if actual != expected:
        raise InternalCheckError(
            f"weighted degree after shift is {actual}, expected {expected}"
        )
    return slope(shifted)


def glue_coordinates(expanded: Sequence[Rational]) -> tuple[Rational, ...]:
    """Boundary identification (0, x_2, ..., x_n) -> (x_2, ..., x_n, 1)."""
    values = tuple(rat(v) for v in expanded)
    if not values:
        raise ValidationError("empty weight tuple")
    if values[0] != 0:
        raise ValidationError("first coordinate nonzero")
    if any(v < 0 or v >= 1 for v in values):
        raise ValidationError("coordinates outside [0, 1)")
    if any(a > b for a, b in zip(values, values[1:])):
        raise ValidationError("coordinates not weakly increasing")
    return values[1:] + (Fraction(1),)


def unglue_coordinates(expanded: Sequence[Rational]) -> tuple[Rational, ...]:
    """Inverse of :func:`glue_coordinates`."""
    values = tuple(rat(v) for v in expanded)
    if not values:
        raise ValidationError("empty weight tuple")
    if values[-1] != 1:
        raise ValidationError("last coordinate is not 1")
    if any(v < 0 for v in values) or any(v >= 1 for v in values[:-1]):
        raise ValidationError("coordinates outside [0, 1)")
    if any(a > b for a, b in zip(values, values[1:])):
        raise ValidationError("coordinates not weakly increasing")
    return (Fraction(0),) + values[:-1]


def shift_wall_transport(
    data: ParabolicData, eta: ShiftLike, subtype: SubType
) -> SubType:
    """The subobject type whose wall is the shifted image of the given one.

    The subobject's multiplicity rows cycle by the same per-point offsets as
    the ambient datum and its degree drops by the wrapped prefix, mirroring
    the ambient degree bookkeeping.
    """
    ensure_valid(data)
    require_weights(data)
    ensure_subtype(data, subtype)
    amount = ShiftAmount.for_data(data, eta)
    rows = []
    degree = subtype.d_prime
    for p, row, e in zip(data.points, subtype.m_prime, amount.values):
        i = _wrap_count(p.weights, e)
        rows.append(row[i:] + row[:i])
        degree -= sum(row[:i])
    return SubType(degree, subtype.r_prime, tuple(rows))
