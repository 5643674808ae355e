"""Walls and chambers in the space of compatible weights.

For a fixed multiplicity system the compatible weights form, per point, the
half-open region 0 <= w_1 < w_2 < ... < w_k < 1. A subobject type xi cuts
out the affine wall

    sum_p sum_i (r' m_i(p) - r m'_i(p)) w_i(p)  =  r d' - r' d,

and the finitely many feasible walls partition the region into chambers.
Everything here is decided exactly: feasibility reduces to interval
membership for the integer range of the wall functional over the region.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Iterator, Mapping, Optional, Sequence, Union

from .core import (
    InternalCheckError,
    MarkedPoint,
    ParabolicData,
    Rational,
    SubType,
    ValidationError,
    WeightSystem,
    ensure_subtype,
    ensure_valid,
    induced_quotient_type,
    require_weights,
    weight_mass,
    weight_system_errors,
)


@dataclass(frozen=True)
class Wall:
    """One affine wall, with exact feasibility flags.

    `coeffs` and `rhs` are integers derived from (data, subtype);
    `contributors` lists every subtype seen to define the same hyperplane.
    """

    subtype: SubType
    coeffs: tuple[tuple[int, ...], ...]
    rhs: int
    feasible: bool
    degenerate: bool
    contributors: tuple[SubType, ...] = ()

    def __post_init__(self):
        if not self.contributors:
            object.__setattr__(self, "contributors", (self.subtype,))

    def evaluate(self, weights: Sequence[Sequence[Rational]]) -> Rational:
        """Value of the wall functional at a weight system."""
        total = Fraction(0)
        for row, ws in zip(self.coeffs, weights):
            total += sum((c * w for c, w in zip(row, ws)), Fraction(0))
        return total

    def violation(self, weights: Sequence[Sequence[Rational]]) -> Rational:
        return self.evaluate(weights) - self.rhs

    def canonical_key(self) -> tuple[int, ...]:
        """Hyperplane identity: coefficients and rhs up to positive scaling and sign."""
        flat = [c for row in self.coeffs for c in row] + [self.rhs]
        scale = 0
        for v in flat:
            scale = gcd(scale, abs(v))
        if scale > 1:
            flat = [v // scale for v in flat]
        for v in flat:
            if v != 0:
                if v < 0:
                    flat = [-w for w in flat]
                break
        return tuple(flat)


@dataclass(frozen=True)
class ChamberSignature:
    """Sign of (functional - rhs) per feasible wall, in enumeration order."""

    signs: tuple[int, ...]

    @property
    def generic(self) -> bool:
        return 0 not in self.signs

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" if s < 0 else "0" for s in self.signs)


@dataclass(frozen=True)
class GenericWeightResult:
    exists: bool
    witness: Optional[WeightSystem]


def _suffix_sums(coeffs: Sequence[int]) -> tuple[int, ...]:
    out = []
    total = 0
    for c in reversed(coeffs):
        total += c
        out.append(total)
    return tuple(reversed(out))


def _point_range(coeffs: Sequence[int]) -> tuple[int, int, bool, bool]:
    """Exact range of sum_i c_i w_i over 0 <= w_1 < ... < w_k < 1.

    Returns (lo, hi, lo_attained, hi_attained). The closure of the region is
    the order simplex whose vertices are the 0/1 step vectors, so lo and hi
    are vertex values; an endpoint is attained in the open region only when
    it is 0 and the functional degenerates to c_1 * w_1 (all later suffix
    sums vanish), which the region reaches at w_1 = 0.
    """
    suffix = _suffix_sums(coeffs)
    anchors = (0,) + suffix
    lo, hi = min(anchors), max(anchors)
    tail_zero = all(s == 0 for s in suffix[1:])
    return lo, hi, (lo == 0 and tail_zero), (hi == 0 and tail_zero)


def _wall_range(coeffs: Sequence[Sequence[int]]) -> tuple[int, int, bool, bool]:
    lo = hi = 0
    lo_att = hi_att = True
    for row in coeffs:
        plo, phi, platt, phatt = _point_range(row)
        lo += plo
        hi += phi
        lo_att = lo_att and platt
        hi_att = hi_att and phatt
    return lo, hi, lo_att, hi_att


def _build_wall(data: ParabolicData, subtype: SubType) -> Wall:
    coeffs = tuple(
        tuple(subtype.r_prime * m - data.r * mp for m, mp in zip(p.mults, row))
        for p, row in zip(data.points, subtype.m_prime)
    )
    rhs = data.r * subtype.d_prime - subtype.r_prime * data.d
    lo, hi, lo_att, hi_att = _wall_range(coeffs)
    feasible = (lo < rhs < hi) or (rhs == lo and lo_att) or (rhs == hi and hi_att)
    degenerate = rhs == 0 and all(c == 0 for row in coeffs for c in row)
    return Wall(subtype, coeffs, rhs, feasible, degenerate)


def wall_of(data: ParabolicData, subtype: SubType) -> Wall:
    """The wall defined by a subobject type, with exact flags."""
    ensure_valid(data)
    ensure_subtype(data, subtype)
    return _build_wall(data, subtype)


def bounded_compositions(total: int, bounds: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All tuples 0 <= t_i <= bounds[i] with sum(t) == total, lexicographic."""
    if total < 0:
        return
    if not bounds:
        if total == 0:
            yield ()
        return
    head = bounds[0]
    rest = bounds[1:]
    room = sum(rest)
    for first in range(max(0, total - room), min(head, total) + 1):
        for tail in bounded_compositions(total - first, rest):
            yield (first,) + tail


def subtypes_in_window(data: ParabolicData) -> Iterator[SubType]:
    """Every subobject type whose degree lies in the feasibility window.

    The wall functional over the weight region is bounded by r r' n in
    absolute value, which confines the subobject degree d' to the open
    interval (r'd/r - r'n, r'd/r + r'n); the window is widened by one on
    each side, at the cost of enumerating a few infeasible candidates.
    """
    r, d, n = data.r, data.d, data.n
    for r_prime in range(1, r):
        center = Fraction(r_prime * d, r)
        d_lo = ceil(center - r_prime * n) - 1
        d_hi = floor(center + r_prime * n) + 1
        rows_per_point = [
            tuple(bounded_compositions(r_prime, p.mults)) for p in data.points
        ]
        for rows in itertools.product(*rows_per_point):
            for d_prime in range(d_lo, d_hi + 1):
                yield SubType(d_prime, r_prime, rows)


def enumerate_walls(data: ParabolicData) -> tuple[Wall, ...]:
    """All feasible non-degenerate walls, one per hyperplane.

    Distinct subtypes defining the same hyperplane (complements, common
    rescalings) are merged; the first one found in enumeration order is the
    representative and the full list is kept in `contributors`.
    """
    ensure_valid(data)
    if data.r == 1:
        return ()
    found: dict[tuple[int, ...], Wall] = {}
    extra: dict[tuple[int, ...], list[SubType]] = {}
    for subtype in subtypes_in_window(data):
        wall = _build_wall(data, subtype)
        if not wall.feasible or wall.degenerate:
            continue
        key = wall.canonical_key()
        if key in found:
            extra[key].append(subtype)
        else:
            found[key] = wall
            extra[key] = [subtype]
    walls = []
    for key in sorted(found):
        wall = found[key]
        walls.append(
            Wall(
                wall.subtype,
                wall.coeffs,
                wall.rhs,
                wall.feasible,
                wall.degenerate,
                tuple(extra[key]),
            )
        )
    return tuple(walls)


def base_weights(data: ParabolicData) -> WeightSystem:
    """A canonical interior weight system: i/(k+1) at a k-step point."""
    return tuple(
        tuple(Fraction(i, p.levels + 1) for i in range(1, p.levels + 1))
        for p in data.points
    )


def _vertex_weights(levels: int, zeros: int, eps: Rational) -> tuple[Rational, ...]:
    # interior approximation of the 0/1 step vertex with `zeros` leading zeros
    shrink = 1 - (levels + 1) * eps
    return tuple(
        shrink * (0 if i <= zeros else 1) + eps * i for i in range(1, levels + 1)
    )


def wall_interior_point(data: ParabolicData, wall: Wall) -> WeightSystem:
    """An exact weight system inside the region satisfying the wall equation."""
    if not wall.feasible:
        raise ValidationError("wall is infeasible; it has no interior point")
    lo, hi, lo_att, hi_att = _wall_range(wall.coeffs)
    if lo == hi or wall.degenerate:
        return base_weights(data)
    if (wall.rhs == lo and lo_att) or (wall.rhs == hi and hi_att):
        # attained endpoints force the functional down to c_1 * w_1 per point
        return tuple(
            tuple(Fraction(i - 1, p.levels + 1) for i in range(1, p.levels + 1))
            for p in data.points
        )

    def approx(side_hi: bool, eps: Rational) -> WeightSystem:
        out = []
        for p, row in zip(data.points, wall.coeffs):
            suffix = _suffix_sums(row)
            anchors = list(suffix) + [0]  # vertex with j zeros has value anchors[j]
            best = max(range(len(anchors)), key=lambda j: anchors[j]) if side_hi else min(
                range(len(anchors)), key=lambda j: anchors[j]
            )
            out.append(_vertex_weights(p.levels, best, eps))
        return tuple(out)

    denom = 4 * max(p.levels + 1 for p in data.points)
    while True:
        eps = Fraction(1, denom)
        low_pt = approx(False, eps)
        high_pt = approx(True, eps)
        flo = wall.evaluate(low_pt)
        fhi = wall.evaluate(high_pt)
        if flo < wall.rhs < fhi:
            break
        denom *= 2
    t = Fraction(wall.rhs - flo, fhi - flo)
    witness = tuple(
        tuple((1 - t) * a + t * b for a, b in zip(arow, brow))
        for arow, brow in zip(low_pt, high_pt)
    )
    if wall.evaluate(witness) != wall.rhs:
        raise InternalCheckError("interior point misses its own wall")
    return witness


def _has_degenerate_wall(data: ParabolicData) -> bool:
    # a degenerate wall needs r | r' m_i(p) for all blocks and r | r' d
    for r_prime in range(1, data.r):
        if (r_prime * data.d) % data.r != 0:
            continue
        if all(
            (r_prime * m) % data.r == 0 for p in data.points for m in p.mults
        ):
            return True
    return False


def has_generic_weight(data: ParabolicData) -> GenericWeightResult:
    """Whether the face contains a weight on no wall, with an exact witness.

    Two independent criteria are evaluated: gcd of {d} and all multiplicities
    equal to one, and nonexistence of a wall containing the whole face. They
    must agree; disagreement would be a bug and raises.
    """
    ensure_valid(data)
    values = [abs(data.d)] + [m for p in data.points for m in p.mults]
    g = 0
    for v in values:
        g = gcd(g, v)
    gcd_one = g == 1
    degenerate = _has_degenerate_wall(data)
    if gcd_one != (not degenerate):
        raise InternalCheckError(
            "gcd criterion and degenerate-wall search disagree "
            f"(gcd-one={gcd_one}, degenerate-wall={degenerate})"
        )
    if not gcd_one:
        return GenericWeightResult(False, None)
    witness = perturb_to_generic(data, base_weights(data))
    return GenericWeightResult(True, witness)


def generic_candidates(
    data: ParabolicData,
    base: WeightSystem,
    mass_bound: Optional[Rational] = None,
    walls: Optional[tuple[Wall, ...]] = None,
) -> Iterator[WeightSystem]:
    """Deterministic stream of generic weight systems near `base`.

    Perturbs along the direction whose coordinates are increasing powers of a
    base B exceeding twice any wall coefficient: no nonzero wall functional
    can vanish on that direction, so each wall rules out at most one step
    size and the stream never dries up. All yields stay inside the region
    and, when `mass_bound` is given, keep the weight mass strictly below it.
    """
    errors = weight_system_errors(data, base)
    if errors:
        raise ValidationError(errors)
    if walls is None:
        walls = enumerate_walls(data)

    def mass(ws: WeightSystem) -> Rational:
        return sum(
            (m * w for p, row in zip(data.points, ws) for m, w in zip(p.mults, row)),
            Fraction(0),
        )

    if mass_bound is not None and not mass(base) < mass_bound:
        raise ValidationError("base weight mass is not strictly below the bound")
    if all(wall.evaluate(base) != wall.rhs for wall in walls):
        yield base

    B = 2 * data.r * data.r + 1
    direction = []
    power = 0
    for p in data.points:
        row = []
        for _ in range(p.levels):
            power += 1
            row.append(Fraction(B**power))
        direction.append(tuple(row))

    caps = []
    for p, ws, lam in zip(data.points, base, direction):
        caps.append((1 - ws[-1]) / (2 * lam[-1]))
    if mass_bound is not None:
        slack = mass_bound - mass(base)
        caps.append(slack / (2 * mass(tuple(direction))))
    t_cap = min(caps)

    step = 0
    while True:
        step += 1
        t = t_cap / step
        candidate = tuple(
            tuple(w + t * l for w, l in zip(ws, lam))
            for ws, lam in zip(base, direction)
        )
        if any(weight_system_errors(data, candidate)):
            raise InternalCheckError("perturbed weights left the region")
        if all(wall.evaluate(candidate) != wall.rhs for wall in walls):
            yield candidate


def perturb_to_generic(
    data: ParabolicData,
    base: WeightSystem,
    mass_bound: Optional[Rational] = None,
    walls: Optional[tuple[Wall, ...]] = None,
) -> WeightSystem:
    """First generic weight system from :func:`generic_candidates`."""
    if walls is None:
        walls = enumerate_walls(data)
    stream = generic_candidates(data, base, mass_bound, walls)
    for _ in range(len(walls) + 2):
        try:
            return next(stream)
        except StopIteration:  # pragma: no cover - stream is infinite
            break
    raise InternalCheckError("generic perturbation search exhausted its budget")


def _resolve_weights(
    data: ParabolicData, weights: Optional[Sequence[Sequence[Rational]]]
) -> WeightSystem:
    if weights is None:
        require_weights(data)
        return data.weight_system()
    errors = weight_system_errors(data, weights)
    if errors:
        raise ValidationError(errors)
    return tuple(tuple(w for w in row) for row in weights)


def is_generic(
    data: ParabolicData, weights: Optional[Sequence[Sequence[Rational]]] = None
) -> bool:
    """Whether the weights avoid every feasible wall."""
    ensure_valid(data)
    ws = _resolve_weights(data, weights)
    return all(wall.evaluate(ws) != wall.rhs for wall in enumerate_walls(data))


def chamber_signature(
    data: ParabolicData, weights: Optional[Sequence[Sequence[Rational]]] = None
) -> ChamberSignature:
    ensure_valid(data)
    ws = _resolve_weights(data, weights)
    signs = []
    for wall in enumerate_walls(data):
        v = wall.violation(ws)
        signs.append(0 if v == 0 else (1 if v > 0 else -1))
    return ChamberSignature(tuple(signs))


def segment_point(
    start: WeightSystem, end: WeightSystem, t: Rational
) -> WeightSystem:
    """Exact point (1 - t) * start + t * end, coordinatewise."""
    return tuple(
        tuple((1 - t) * a + t * b for a, b in zip(arow, brow))
        for arow, brow in zip(start, end)
    )


def walls_on_segment(
    data: ParabolicData,
    start: Sequence[Sequence[Rational]],
    end: Sequence[Sequence[Rational]],
) -> tuple[tuple[Wall, Rational], ...]:
    """Walls separating two generic weights, with exact crossing parameters.

    Both endpoints must be compatible with the multiplicities and generic;
    the wall functional is affine along the segment, so each wall is crossed
    at most once and the crossing parameter solves a linear equation.
    Simultaneous crossings are reported at equal t in enumeration order.
    """
    ensure_valid(data)
    wa = _resolve_weights(data, start)
    wb = _resolve_weights(data, end)
    walls = enumerate_walls(data)
    for label, ws in (("start", wa), ("end", wb)):
        if any(wall.violation(ws) == 0 for wall in walls):
            raise ValidationError(f"{label} weight system lies on a wall")
    crossings = []
    for index, wall in enumerate(walls):
        v0 = wall.violation(wa)
        v1 = wall.violation(wb)
        if (v0 > 0) != (v1 > 0):
            t = v0 / (v0 - v1)
            crossings.append((t, index, wall))
    crossings.sort(key=lambda item: (item[0], item[1]))
    return tuple((wall, t) for t, _, wall in crossings)


MultSystem = Union[ParabolicData, Mapping[str, Sequence[int]]]


def _mults_by_id(system: MultSystem) -> dict[str, tuple[int, ...]]:
    if isinstance(system, ParabolicData):
        return {p.id: p.mults for p in system.points}
    return {pid: tuple(int(m) for m in row) for pid, row in system.items()}


def _refines_point(fine: Sequence[int], coarse: Sequence[int]) -> bool:
    # `fine` refines `coarse` when merging adjacent blocks of `fine` gives `coarse`
    it = iter(fine)
    for target in coarse:
        acc = 0
        while acc < target:
            try:
                acc += next(it)
            except StopIteration:
                return False
        if acc != target:
            return False
    return next(it, None) is None


def face_order(a: MultSystem, b: MultSystem) -> str:
    """Order of two multiplicity systems under adjacent-block merging.

    Returns 'refines' when `a` refines `b` at every point (so `b`'s face lies
    in the closure of `a`'s), 'coarsens' for the reverse, 'equal', or
    'incomparable'.
    """
    ma, mb = _mults_by_id(a), _mults_by_id(b)
    if set(ma) != set(mb):
        raise ValidationError("multiplicity systems name different points")
    for pid, row in ma.items():
        if sum(row) != sum(mb[pid]):
            raise ValidationError(f"point {pid}: multiplicity sums differ")
    refines = all(_refines_point(ma[pid], mb[pid]) for pid in ma)
    coarsens = all(_refines_point(mb[pid], ma[pid]) for pid in ma)
    if refines and coarsens:
        return "equal"
    if refines:
        return "refines"
    if coarsens:
        return "coarsens"
    return "incomparable"
