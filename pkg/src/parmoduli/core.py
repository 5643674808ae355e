"""Exact data model for bundles with weighted flag data at marked points.

Every numeric value in this package is an integer or a `fractions.Fraction`;
no operation introduces floating point. The central record is
:class:`ParabolicData`: genus, rank and degree of a bundle on a curve, plus,
for each marked point, the multiplicities of a flag in the fiber and
optionally a strictly increasing tuple of rational weights in [0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

Rational = Fraction

RationalLike = Union[Rational, int, str]

# weights per point, aligned with the (id-sorted) points of a ParabolicData
WeightSystem = tuple[tuple[Rational, ...], ...]


class ValidationError(ValueError):
    """Input violates a data-model invariant; carries the full error list."""

    def __init__(self, errors: Union[str, Sequence[str]]):
        if isinstance(errors, str):
            errors = [errors]
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class InternalCheckError(RuntimeError):
    """A cross-checked identity failed. This signals a bug, not bad input."""


def rat(value: RationalLike) -> Rational:
    """Parse an exact rational from an int, a Fraction, or an 'a/b' string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"cannot interpret {value!r} as an exact rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        num, sep, den = value.strip().partition("/")
        try:
            n = int(num)
            d = int(den) if sep else 1
        except ValueError:
            raise ValidationError(f"malformed rational {value!r}") from None
        if d == 0:
            raise ValidationError(f"zero denominator in rational {value!r}")
        return Fraction(n, d)
    raise ValidationError(f"cannot interpret {value!r} as an exact rational")


def rat_str(value: RationalLike) -> str:
    """Canonical string form 'a/b' with b > 0 and gcd(a, b) = 1."""
    q = rat(value)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class MarkedPoint:
    """Flag multiplicities, and optionally weights, at one marked point."""

    id: str
    mults: tuple[int, ...]
    weights: Optional[tuple[Rational, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "mults", tuple(int(m) for m in self.mults))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(rat(w) for w in self.weights))

    @property
    def levels(self) -> int:
        return len(self.mults)


@dataclass(frozen=True)
class ParabolicData:
    """Genus, rank, degree and per-point flag data.

    Points are kept sorted by id, so every enumeration over points is
    deterministic and JSON output is reproducible.
    """

    g: int
    r: int
    d: int
    points: tuple[MarkedPoint, ...]

    def __post_init__(self):
        pts = tuple(sorted(self.points, key=lambda p: p.id))
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        """Number of marked points."""
        return len(self.points)

    def has_weights(self) -> bool:
        return all(p.weights is not None for p in self.points)

    def weight_system(self) -> WeightSystem:
        require_weights(self)
        return tuple(p.weights for p in self.points)  # type: ignore[misc]

    def mult_system(self) -> tuple[tuple[int, ...], ...]:
        return tuple(p.mults for p in self.points)

    def with_weights(self, weights: Sequence[Sequence[RationalLike]]) -> "ParabolicData":
        """Copy of this datum with the given per-point weights installed."""
        if len(weights) != self.n:
            raise ValidationError(
                f"{len(weights)} weight tuples for {self.n} points"
            )
        pts = tuple(
            replace(p, weights=tuple(rat(w) for w in ws))
            for p, ws in zip(self.points, weights)
        )
        return replace(self, points=pts)

    def without_weights(self) -> "ParabolicData":
        return replace(self, points=tuple(replace(p, weights=None) for p in self.points))


def _point_weight_errors(pid: str, weights: Sequence[Rational], levels: int) -> list[str]:
    errors = []
    if len(weights) != levels:
        errors.append(f"point {pid}: {len(weights)} weights for {levels} flag steps")
        return errors
    if any(w < 0 or w >= 1 for w in weights):
        errors.append(f"point {pid}: weights outside [0, 1)")
    if any(a >= b for a, b in zip(weights, weights[1:])):
        errors.append(f"point {pid}: weights not strictly increasing")
    return errors


def validate(data: ParabolicData) -> list[str]:
    """All violated invariants of `data`, or an empty list when valid."""
    errors = []
    if data.g < 2:
        errors.append(f"genus < 2 (g = {data.g})")
    if data.r < 1:
        errors.append(f"rank < 1 (r = {data.r})")
    if not data.points:
        errors.append("no marked points")
    seen: set[str] = set()
    for p in data.points:
        if not p.id:
            errors.append("point with empty id")
        if p.id in seen:
            errors.append(f"point {p.id}: duplicate id")
        seen.add(p.id)
        if p.levels == 0:
            errors.append(f"point {p.id}: no flag steps")
            continue
        if any(m <= 0 for m in p.mults):
            errors.append(f"point {p.id}: non-positive multiplicity")
        elif sum(p.mults) != data.r:
            errors.append(
                f"point {p.id}: multiplicities sum to {sum(p.mults)}, expected rank {data.r}"
            )
        if p.weights is not None:
            errors.extend(_point_weight_errors(p.id, p.weights, p.levels))
    return errors


def ensure_valid(data: ParabolicData) -> None:
    errors = validate(data)
    if errors:
        raise ValidationError(errors)


def require_weights(data: ParabolicData) -> None:
    missing = [p.id for p in data.points if p.weights is None]
    if missing:
        raise ValidationError([f"point {pid}: missing weights" for pid in missing])


def weight_system_errors(data: ParabolicData, weights: Sequence[Sequence[Rational]]) -> list[str]:
    """Violations of `weights` viewed as a weight system for `data`'s flags."""
    if len(weights) != data.n:
        return [f"{len(weights)} weight tuples for {data.n} points"]
    errors = []
    for p, ws in zip(data.points, weights):
        errors.extend(_point_weight_errors(p.id, tuple(ws), p.levels))
    return errors


def weight_mass(data: ParabolicData) -> Rational:
    """Total weight contribution sum_p sum_i m_i(p) * w_i(p)."""
    ensure_valid(data)
    require_weights(data)
    total = Fraction(0)
    for p in data.points:
        total += sum((m * w for m, w in zip(p.mults, p.weights)), Fraction(0))
    return total


def pardeg(data: ParabolicData) -> Rational:
    """Degree plus the total weight contribution (exact)."""
    return data.d + weight_mass(data)


def slope(data: ParabolicData) -> Rational:
    return pardeg(data) / data.r


def expand_point_weights(weights: Sequence[Rational], mults: Sequence[int]) -> tuple[Rational, ...]:
    """Repeat each weight according to its multiplicity."""
    if len(weights) != len(mults):
        raise ValidationError(
            f"{len(weights)} weights for {len(mults)} flag steps"
        )
    out: list[Rational] = []
    for w, m in zip(weights, mults):
        out.extend([rat(w)] * m)
    return tuple(out)


def expanded_matches(values: Sequence[Rational], mults: Sequence[int]) -> bool:
    """Whether the equality pattern of `values` is exactly the block pattern of `mults`.

    Values must be constant inside each multiplicity block and strictly
    increase across block boundaries.
    """
    if len(values) != sum(mults):
        return False
    pos = 0
    previous = None
    for m in mults:
        block = values[pos : pos + m]
        if any(v != block[0] for v in block[1:]):
            return False
        if previous is not None and not previous < block[0]:
            return False
        previous = block[0]
        pos += m
    return True


def compress_point_weights(values: Sequence[Rational], mults: Sequence[int]) -> tuple[Rational, ...]:
    """Inverse of :func:`expand_point_weights`; rejects pattern mismatches."""
    values = tuple(rat(v) for v in values)
    if not expanded_matches(values, mults):
        raise ValidationError(
            f"equality pattern mismatch: cannot compress {len(values)} values into blocks {tuple(mults)}"
        )
    out = []
    pos = 0
    for m in mults:
        out.append(values[pos])
        pos += m
    return tuple(out)


def expand_weights(data: ParabolicData) -> tuple[tuple[Rational, ...], ...]:
    """Per point, the weight repeated by multiplicity into a length-r tuple."""
    ensure_valid(data)
    require_weights(data)
    return tuple(expand_point_weights(p.weights, p.mults) for p in data.points)


def compress_weights(
    expanded: Sequence[Sequence[Rational]], mult_system: Sequence[Sequence[int]]
) -> WeightSystem:
    if len(expanded) != len(mult_system):
        raise ValidationError(
            f"{len(expanded)} expanded tuples for {len(mult_system)} points"
        )
    return tuple(
        compress_point_weights(vals, mults) for vals, mults in zip(expanded, mult_system)
    )


def prefix_sums(mults: Sequence[int]) -> tuple[int, ...]:
    """(0, m_1, m_1 + m_2, ..., sum)."""
    out = [0]
    for m in mults:
        out.append(out[-1] + m)
    return tuple(out)


@dataclass(frozen=True)
class SubType:
    """Numerical type (degree, rank, per-point multiplicities) of a subobject.

    `m_prime` is aligned with the id-sorted points of the ambient datum;
    entries may be zero where the subobject's flag skips an ambient level.
    """

    d_prime: int
    r_prime: int
    m_prime: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "m_prime", tuple(tuple(int(m) for m in row) for row in self.m_prime)
        )


def validate_subtype(data: ParabolicData, subtype: SubType) -> list[str]:
    errors = []
    if not 1 <= subtype.r_prime < data.r:
        errors.append(f"subobject rank {subtype.r_prime} not in [1, {data.r})")
    if len(subtype.m_prime) != data.n:
        errors.append(
            f"{len(subtype.m_prime)} multiplicity rows for {data.n} points"
        )
        return errors
    for p, row in zip(data.points, subtype.m_prime):
        if len(row) != p.levels:
            errors.append(f"point {p.id}: {len(row)} entries for {p.levels} flag steps")
            continue
        if any(m < 0 for m in row):
            errors.append(f"point {p.id}: negative multiplicity entry")
        if any(mp > m for mp, m in zip(row, p.mults)):
            errors.append(f"point {p.id}: entry exceeds ambient multiplicity")
        if sum(row) != subtype.r_prime:
            errors.append(
                f"point {p.id}: entries sum to {sum(row)}, expected {subtype.r_prime}"
            )
    return errors


def ensure_subtype(data: ParabolicData, subtype: SubType) -> None:
    errors = validate_subtype(data, subtype)
    if errors:
        raise ValidationError(errors)


def induced_quotient_type(data: ParabolicData, subtype: SubType) -> SubType:
    """Componentwise complement (d - d', r - r', m - m')."""
    ensure_valid(data)
    ensure_subtype(data, subtype)
    m_rows = tuple(
        tuple(m - mp for m, mp in zip(p.mults, row))
        for p, row in zip(data.points, subtype.m_prime)
    )
    return SubType(data.d - subtype.d_prime, data.r - subtype.r_prime, m_rows)


def sub_data(
    data: ParabolicData, subtype: SubType, weights: Optional[WeightSystem] = None
) -> ParabolicData:
    """The subobject's own parabolic datum; zero blocks are dropped.

    `weights`, when given, overrides the ambient weights; the subobject
    inherits the ambient weight of every level it occupies.
    """
    ensure_valid(data)
    ensure_subtype(data, subtype)
    if weights is None and data.has_weights():
        weights = data.weight_system()
    points = []
    for idx, (p, row) in enumerate(zip(data.points, subtype.m_prime)):
        keep = [i for i, m in enumerate(row) if m > 0]
        ws = None
        if weights is not None:
            ws = tuple(weights[idx][i] for i in keep)
        points.append(MarkedPoint(p.id, tuple(row[i] for i in keep), ws))
    out = ParabolicData(data.g, subtype.r_prime, subtype.d_prime, tuple(points))
    ensure_valid(out)
    return out


def quotient_data(
    data: ParabolicData, subtype: SubType, weights: Optional[WeightSystem] = None
) -> ParabolicData:
    return sub_data(data, induced_quotient_type(data, subtype), weights)
