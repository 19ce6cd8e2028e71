"""Exact circle arithmetic and critical-portrait combinatorics.

Angles live on the circle R/Z and are stored as reduced fractions ``num/den``
with ``0 <= num < den``.  Everything in this module is exact integer
arithmetic, so results are reproducible bit for bit; floats appear only when
the caller asks for them via :func:`float`.
"""

from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd

from .errors import CapExceededError, SharedAngleError


@dataclass(frozen=True)
class Angle:
    """A point of R/Z as a reduced fraction.

    Construction normalizes mod 1 and reduces, so ``Angle(14, 12)`` equals
    ``Angle(1, 6)``.

    >>> Angle(7, 12).times(2)
    Angle(num=1, den=6)
    """

    num: int
    den: int = 1

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        num = self.num % self.den
        g = gcd(num, self.den)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Angle":
        return cls(value.numerator, value.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def times(self, d: int) -> "Angle":
        """Image under the degree-d multiplier map t -> d*t mod 1."""
        if d < 1:
            raise ValueError("multiplier must be a positive integer")
        return Angle(self.num * d, self.den)

    def __float__(self) -> float:
        return self.num / self.den

    def __lt__(self, other: "Angle") -> bool:
        return self.num * other.den < other.num * self.den

    def __le__(self, other: "Angle") -> bool:
        return self.num * other.den <= other.num * self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def angle_times_d(theta: Angle, d: int) -> Angle:
    """Multiplier map on angles: (1/6, 2) -> 1/3, (7/12, 2) -> 1/6."""
    return theta.times(d)


@dataclass(frozen=True)
class OrbitSummary:
    """Forward orbit of an angle under the multiplier map.

    ``orbit`` holds the preperiod + period distinct values; the next image
    would repeat ``orbit[preperiod]``.
    """

    preperiod: int
    period: int
    orbit: tuple[Angle, ...]


def angle_orbit(theta: Angle, d: int) -> OrbitSummary:
    """Exact preperiod/period of ``theta`` under t -> d*t mod 1.

    >>> angle_orbit(Angle(1, 6), 2)
    OrbitSummary(preperiod=1, period=2, orbit=(Angle(num=1, den=6), Angle(num=1, den=3), Angle(num=2, den=3)))
    """
    seen: dict[Angle, int] = {}
    orbit: list[Angle] = []
    current = theta
    while current not in seen:
        seen[current] = len(orbit)
        orbit.append(current)
        current = current.times(d)
    preperiod = seen[current]
    return OrbitSummary(preperiod, len(orbit) - preperiod, tuple(orbit))


@dataclass(frozen=True)
class PortraitBlock:
    """A set of at least two distinct angles, stored in ascending order."""

    angles: tuple[Angle, ...]

    def __init__(self, angles):
        angles = tuple(sorted(angles))
        if len(angles) < 2:
            raise ValueError("a block needs at least two angles")
        if any(a == b for a, b in zip(angles, angles[1:])):
            raise ValueError("block angles must be distinct")
        object.__setattr__(self, "angles", angles)

    def __iter__(self):
        return iter(self.angles)

    def __len__(self) -> int:
        return len(self.angles)

    @property
    def min_angle(self) -> Angle:
        return self.angles[0]

    def image(self, d: int) -> frozenset[Angle]:
        return frozenset(a.times(d) for a in self.angles)


def blocks_unlinked(block_a: PortraitBlock, block_b: PortraitBlock) -> bool:
    """True when the two blocks can be separated by two disjoint intervals
    of the circle, i.e. all of ``block_b`` falls in a single complementary
    arc of ``block_a``.

    >>> blocks_unlinked(PortraitBlock([Angle(1, 12), Angle(7, 12)]),
    ...                 PortraitBlock([Angle(1, 5), Angle(2, 5)]))
    True
    """
    set_a = set(block_a.angles)
    if any(b in set_a for b in block_b):
        raise SharedAngleError(
            f"blocks share an angle; unlinkedness is undefined"
        )
    marks = list(block_a.angles)
    # Arc index of x in the circular complement of block_a's angles.
    arcs = {bisect_right(marks, b) % len(marks) for b in block_b}
    return len(arcs) == 1


@dataclass(frozen=True)
class CriticalPortrait:
    """Degree plus angle blocks, blocks sorted by their smallest angle.

    Construction is purely structural; use :func:`validate_portrait` to test
    the portrait conditions.
    """

    degree: int
    blocks: tuple[PortraitBlock, ...]

    def __init__(self, degree: int, blocks):
        if degree < 2:
            raise ValueError("degree must be at least 2")
        blocks = tuple(sorted(blocks, key=lambda b: b.min_angle.fraction))
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "blocks", blocks)

    def all_angles(self) -> tuple[Angle, ...]:
        return tuple(a for block in self.blocks for a in block)


@dataclass(frozen=True)
class ConditionReport:
    ok: bool
    detail: str = ""
    offenders: tuple = ()


@dataclass(frozen=True)
class PortraitReport:
    """Per-condition validation outcome; failures are data, not errors."""

    common_image: ConditionReport
    unlinked: ConditionReport
    count: ConditionReport

    @property
    def valid(self) -> bool:
        return self.common_image.ok and self.unlinked.ok and self.count.ok


ValidationReport = PortraitReport


def validate_portrait(portrait: CriticalPortrait) -> PortraitReport:
    """Check the three portrait conditions for a candidate portrait.

    The conditions: every block maps to a single angle under the multiplier
    map; blocks are pairwise unlinked; block sizes satisfy
    sum(len(block) - 1) == degree - 1.
    """
    d = portrait.degree

    bad_image = tuple(
        i for i, block in enumerate(portrait.blocks) if len(block.image(d)) != 1
    )
    common_image = ConditionReport(
        ok=not bad_image,
        detail="" if not bad_image else "blocks without a common image",
        offenders=bad_image,
    )

    bad_pairs = []
    for i, j in itertools.combinations(range(len(portrait.blocks)), 2):
        try:
            ok = blocks_unlinked(portrait.blocks[i], portrait.blocks[j])
        except SharedAngleError:
            ok = False
        if not ok:
            bad_pairs.append((i, j))
    unlinked = ConditionReport(
        ok=not bad_pairs,
        detail="" if not bad_pairs else "linked or overlapping block pairs",
        offenders=tuple(bad_pairs),
    )

    total = sum(len(block) - 1 for block in portrait.blocks)
    count = ConditionReport(
        ok=total == d - 1,
        detail=f"sum(len(block)-1) = {total}, degree-1 = {d - 1}",
    )

    return PortraitReport(common_image, unlinked, count)


def quadratic_portrait(theta: Angle) -> CriticalPortrait:
    """Degree-2 portrait {theta/2, (theta+1)/2} attached to the angle theta."""
    half = Angle(theta.num, 2 * theta.den)
    other = Angle(theta.num + theta.den, 2 * theta.den)
    return CriticalPortrait(2, [PortraitBlock([half, other])])


class PortraitClass(Enum):
    CONTAINS_PERIODIC = "contains_periodic"
    STRICTLY_PREPERIODIC = "strictly_preperiodic"


def classify_portrait(portrait: CriticalPortrait) -> PortraitClass:
    """A portrait contains a periodic angle iff some angle has preperiod 0."""
    d = portrait.degree
    for angle in portrait.all_angles():
        if angle_orbit(angle, d).preperiod == 0:
            return PortraitClass.CONTAINS_PERIODIC
    return PortraitClass.STRICTLY_PREPERIODIC


def _angles_up_to(max_den: int) -> list[Angle]:
    out = []
    for den in range(1, max_den + 1):
        for num in range(den):
            if gcd(num, den) == 1:
                out.append(Angle(num, den))
    return sorted(out, key=lambda a: a.fraction)


def _size_multisets(total: int) -> list[tuple[int, ...]]:
    """Block-size multisets: partitions of ``total`` shifted up by one."""
    results: list[tuple[int, ...]] = []

    def rec(remaining: int, max_part: int, acc: list[int]):
        if remaining == 0:
            results.append(tuple(p + 1 for p in acc))
            return
        for part in range(min(remaining, max_part), 0, -1):
            rec(remaining - part, part, acc + [part])

    rec(total, total, [])
    return results


def enumerate_portraits(
    degree: int, max_den: int, cap: int = 200_000
) -> list[CriticalPortrait]:
    """All valid degree-``degree`` portraits whose angle denominators are at
    most ``max_den``, in a deterministic order.

    Brute force over fibers of the multiplier map, pruned by the block-size
    count condition.  Raises :class:`CapExceededError` when the number of
    candidate block combinations passes ``cap``.
    """
    if degree < 2:
        raise ValueError("degree must be at least 2")
    angles = _angles_up_to(max_den)

    fibers: dict[Angle, list[Angle]] = {}
    for a in angles:
        fibers.setdefault(a.times(degree), []).append(a)

    # Candidate blocks grouped by size.
    blocks_by_size: dict[int, list[PortraitBlock]] = {}
    sizes_needed = {s for sizes in _size_multisets(degree - 1) for s in sizes}
    budget = cap
    for size in sizes_needed:
        found = []
        for members in fibers.values():
            if len(members) < size:
                continue
            for combo in itertools.combinations(members, size):
                budget -= 1
                if budget < 0:
                    raise CapExceededError(
                        f"portrait enumeration passed the cap of {cap} candidates"
                    )
                found.append(PortraitBlock(combo))
        blocks_by_size[size] = found

    portraits: set[CriticalPortrait] = set()
    for sizes in _size_multisets(degree - 1):
        pools = [blocks_by_size[s] for s in sizes]
        for choice in itertools.product(*pools):
            budget -= 1
            if budget < 0:
                raise CapExceededError(
                    f"portrait enumeration passed the cap of {cap} candidates"
                )
            if len(sizes) > 1:
                seen_angles: set[Angle] = set()
                dup = False
                for block in choice:
                    for a in block:
                        if a in seen_angles:
                            dup = True
                            break
                        seen_angles.add(a)
                    if dup:
                        break
                if dup:
                    continue
                # Skip multiset duplicates (same unordered block selection).
                if any(choice[i] == choice[j]
                       for i in range(len(choice))
                       for j in range(i + 1, len(choice))):
                    continue
                if not all(
                    blocks_unlinked(x, y)
                    for x, y in itertools.combinations(choice, 2)
                ):
                    continue
            portraits.add(CriticalPortrait(degree, choice))

    def key(p: CriticalPortrait):
        return tuple(
            (a.num, a.den) for block in p.blocks for a in block
        ) + (len(p.blocks),)

    return sorted(portraits, key=key)
