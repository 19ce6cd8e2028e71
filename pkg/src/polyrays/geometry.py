"""Distortion geometry: shapes of plane regions, annulus moduli, cylinder
areas on the punctured plane, round disk systems, and backward orbits of
small disks under polynomial iteration.

Areas and moduli refer to the flat cylinder metric |dw| / (2 pi |w|) on
C*, under which a round annulus centered at the origin is a straight
cylinder of circumference 1 and height equal to its modulus.  The density
1 / (4 pi^2 |w|^2) has the exact primitive log|w| d(arg w), so all areas
here reduce to boundary circulations and never need 2-d quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import ConvexHull, QhullError

from .errors import (
    BranchCollisionError,
    DegenerateAnnulusError,
    DomainError,
    NumericError,
    OriginInRegionError,
)
from .poly import MonicPolynomial, critical_values

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Disk:
    """Open round disk with positive finite radius."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise DomainError("disk radius must be positive and finite")

    def contains_point(self, z: complex) -> bool:
        return abs(complex(z) - self.center) < self.radius

    def contains_disk(self, other: "Disk") -> bool:
        """Open-in-open containment; the closures may touch."""
        return abs(other.center - self.center) + other.radius <= self.radius

    def contains_closure(self, other: "Disk") -> bool:
        return abs(other.center - self.center) + other.radius < self.radius

    def meets(self, other: "Disk") -> bool:
        return abs(other.center - self.center) < self.radius + other.radius


def _winding(pts: np.ndarray, z: complex) -> int:
    """Winding number of the closed polyline around z."""
    rel = pts - z
    turns = np.angle(np.roll(rel, -1) / rel)
    return int(round(float(np.sum(turns)) / TWO_PI))


def _segment_distances(pts: np.ndarray, z: complex) -> np.ndarray:
    a = pts
    b = np.roll(pts, -1)
    ab = b - a
    den = np.abs(ab) ** 2
    t = np.clip(((z - a) * np.conj(ab)).real / np.where(den > 0, den, 1.0), 0.0, 1.0)
    return np.abs(a + t * ab - z)


def _polyline_is_simple(pts: np.ndarray) -> bool:
    """Check that no two non-adjacent edges of the closed polyline meet.

    Works in blocks so memory stays O(block * n) while the orientation
    tests remain vectorized.
    """
    n = len(pts)
    a = pts
    b = np.roll(pts, -1)
    scale = float(np.max(np.abs(pts - np.mean(pts)))) or 1.0
    eps = 1e-14 * scale * scale
    idx = np.arange(n)
    for start in range(0, n, 64):
        blk = idx[start : start + 64]
        p0 = a[blk][:, None]
        p1 = b[blk][:, None]
        q0 = a[None, :]
        q1 = b[None, :]
        d1 = np.imag(np.conj(p1 - p0) * (q0 - p0))
        d2 = np.imag(np.conj(p1 - p0) * (q1 - p0))
        d3 = np.imag(np.conj(q1 - q0) * (p0 - q0))
        d4 = np.imag(np.conj(q1 - q0) * (p1 - q0))
        cross = (
            (np.minimum(d1, d2) < -eps)
            & (np.maximum(d1, d2) > eps)
            & (np.minimum(d3, d4) < -eps)
            & (np.maximum(d3, d4) > eps)
        )
        # mask self and adjacent edge pairs (cyclic)
        j = idx[None, :]
        i = blk[:, None]
        adjacent = (
            (j == i)
            | (j == (i + 1) % n)
            | (j == (i - 1) % n)
        )
        if np.any(cross & ~adjacent):
            return False
    return True


@dataclass(frozen=True)
class Region:
    """Jordan region bounded by a positively oriented closed polyline.

    ``boundary`` lists each vertex once; the edge from the last vertex
    back to the first is implicit.
    """

    boundary: tuple[complex, ...]
    basepoint: complex | None = None

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.boundary)
        object.__setattr__(self, "boundary", pts)
        if len(pts) < 3:
            raise DomainError("boundary needs at least three vertices")
        arr = np.asarray(pts, dtype=complex)
        if np.min(np.abs(np.roll(arr, -1) - arr)) == 0.0:
            raise DomainError("boundary repeats consecutive vertices")
        if self._signed_area(arr) <= 0.0:
            raise DomainError("boundary must be positively oriented")
        if not _polyline_is_simple(arr):
            raise DomainError("boundary polyline crosses itself")
        if self.basepoint is not None:
            bp = complex(self.basepoint)
            object.__setattr__(self, "basepoint", bp)
            if _winding(arr, bp) != 1 or float(np.min(_segment_distances(arr, bp))) == 0.0:
                raise DomainError("basepoint must lie strictly inside")

    @staticmethod
    def _signed_area(arr: np.ndarray) -> float:
        nxt = np.roll(arr, -1)
        return 0.5 * float(np.sum(arr.real * nxt.imag - arr.imag * nxt.real))

    def area(self) -> float:
        return self._signed_area(np.asarray(self.boundary, dtype=complex))

    def contains(self, z: complex) -> bool:
        arr = np.asarray(self.boundary, dtype=complex)
        if float(np.min(_segment_distances(arr, complex(z)))) == 0.0:
            return False
        return _winding(arr, complex(z)) == 1

    def diameter(self) -> float:
        return _point_set_diameter(np.asarray(self.boundary, dtype=complex))


def disk_region(center: complex, radius: float, n: int = 256) -> Region:
    """Regular n-gon inscribed in the circle |z - center| = radius."""
    if radius <= 0.0:
        raise DomainError("radius must be positive")
    t = np.arange(n) * (TWO_PI / n)
    pts = complex(center) + radius * np.exp(1j * t)
    return Region(tuple(pts), basepoint=complex(center))


@dataclass(frozen=True)
class RoundConcentric:
    """Annulus r_in < |w - center| < r_out."""

    center: complex
    r_in: float
    r_out: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "r_in", float(self.r_in))
        object.__setattr__(self, "r_out", float(self.r_out))
        if not (0.0 < self.r_in < self.r_out):
            raise DegenerateAnnulusError("need 0 < r_in < r_out")


@dataclass(frozen=True)
class CirclePair:
    """Ring between two circles, the inner closed disk inside the outer
    open disk."""

    outer: Disk
    inner: Disk

    def __post_init__(self):
        if not self.outer.contains_closure(self.inner):
            raise DegenerateAnnulusError(
                "inner closure must sit inside the open outer disk"
            )


AnnulusSpec = RoundConcentric | CirclePair


@dataclass(frozen=True)
class DiskTriple:
    """Concentric-free nest of three disks D'' in D' in D around a label."""

    label: complex
    d_inner: Disk
    d_mid: Disk
    d_outer: Disk

    def __post_init__(self):
        object.__setattr__(self, "label", complex(self.label))
        if not self.d_inner.contains_point(self.label):
            raise DomainError("label must lie inside the innermost disk")
        if not self.d_mid.contains_disk(self.d_inner):
            raise DomainError("innermost disk must lie in the middle disk")
        if not self.d_outer.contains_disk(self.d_mid):
            raise DomainError("middle disk must lie in the outer disk")


@dataclass(frozen=True)
class NestedDiskSystem:
    """Labeled disk triples whose outer disks are nested or disjoint."""

    triples: tuple[DiskTriple, ...]

    def __post_init__(self):
        trip = tuple(self.triples)
        object.__setattr__(self, "triples", trip)
        labels = [t.label for t in trip]
        if len(set(labels)) != len(labels):
            raise DomainError("labels must be distinct")
        for i, s in enumerate(trip):
            for t in trip[i + 1 :]:
                if not s.d_outer.meets(t.d_outer):
                    continue
                if s.d_outer.contains_disk(t.d_outer) and s.d_outer != t.d_outer:
                    continue
                if t.d_outer.contains_disk(s.d_outer) and s.d_outer != t.d_outer:
                    continue
                raise DomainError(
                    "outer disks must be pairwise nested or disjoint"
                )


def shape(region: Region, z: complex) -> float:
    """Ratio of the farthest to the nearest boundary distance from z.

    Equals 1 exactly when the region is a round disk about z; it is the
    roundness certificate feeding the area and distortion bounds.
    """
    pts = np.asarray(region.boundary, dtype=complex)
    z = complex(z)
    dmax = float(np.max(np.abs(pts - z)))
    dmin = float(np.min(_segment_distances(pts, z)))
    if dmin <= 1e-13 * dmax:
        raise DomainError("point lies on the region boundary")
    if _winding(pts, z) != 1:
        raise DomainError("point must lie strictly inside the region")
    # distance to a segment is convex, so the max over the boundary is
    # attained at a vertex
    return dmax / dmin


def modulus(spec) -> float:
    """Conformal modulus of a round annulus.

    RoundConcentric is the definition; a CirclePair reduces to concentric
    position by the Moebius map fixing the common symmetric point pair of
    the two circles.
    """
    if isinstance(spec, RoundConcentric):
        return math.log(spec.r_out / spec.r_in) / TWO_PI
    if isinstance(spec, CirclePair):
        return _circle_pair_modulus(spec.outer, spec.inner)
    raise DomainError("modulus expects RoundConcentric or CirclePair")


def _circle_pair_modulus(outer: Disk, inner: Disk) -> float:
    e = abs(inner.center - outer.center) / outer.radius
    rho = inner.radius / outer.radius
    if e + rho >= 1.0:
        raise DegenerateAnnulusError("circles touch or cross")
    if e < 1e-15:
        return math.log(1.0 / rho) / TWO_PI
    # p and 1/p are symmetric in both circles: p * (1/p) = 1 and
    # (p - e)(1/p - e) = rho^2 give e p^2 - (1 + e^2 - rho^2) p + e = 0.
    b = 1.0 + e * e - rho * rho
    p = (b - math.sqrt(b * b - 4.0 * e * e)) / (2.0 * e)
    q = 1.0 / p
    # (z - p)/(z - q) sends the pair to {0, inf}, both circles to
    # concentric circles; |T| is constant on each image circle
    t_outer = abs((1.0 - p) / (1.0 - q))
    t_inner = abs((e + rho - p) / (e + rho - q))
    return abs(math.log(t_outer / t_inner)) / TWO_PI


_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(20)
_GAUSS_T = 0.5 * (_GAUSS_T + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


def _polyline_log_circulation(pts: np.ndarray) -> float:
    """Circulation of log|w| d(arg w) along the closed polyline.

    Segments are split until shorter than half their distance to the
    origin, which keeps the 20-point Gauss rule at machine accuracy.
    """
    a_list = []
    b_list = []
    stack = list(zip(pts, np.roll(pts, -1)))
    while stack:
        a, b = stack.pop()
        ab = b - a
        den = abs(ab) ** 2
        t = min(1.0, max(0.0, (-a * ab.conjugate()).real / den)) if den > 0 else 0.0
        dist = abs(a + t * ab)
        if dist == 0.0:
            raise OriginInRegionError("boundary touches the origin")
        if abs(ab) > 0.5 * dist:
            mid = 0.5 * (a + b)
            stack.append((a, mid))
            stack.append((mid, b))
        else:
            a_list.append(a)
            b_list.append(b)
    a_arr = np.asarray(a_list, dtype=complex)[:, None]
    b_arr = np.asarray(b_list, dtype=complex)[:, None]
    w = a_arr + _GAUSS_T[None, :] * (b_arr - a_arr)
    vals = np.log(np.abs(w)) * ((b_arr - a_arr) / w).imag
    return float(np.sum(vals * _GAUSS_W[None, :]))


def _circle_log_circulation(center: complex, radius: float) -> float:
    """Circulation of log|w| d(arg w) along |w - center| = radius.

    The integrand is periodic and analytic, so the trapezoid rule
    converges geometrically; the node count doubles until stable.
    """
    gap = abs(abs(center) - radius)
    if gap <= 1e-13 * (abs(center) + radius):
        raise OriginInRegionError("circle passes through the origin")
    n = 256
    prev = None
    while n <= 1 << 20:
        t = np.arange(n) * (TWO_PI / n)
        e = np.exp(1j * t)
        w = center + radius * e
        vals = np.log(np.abs(w)) * ((1j * radius * e) / w).imag
        total = float(np.sum(vals)) * (TWO_PI / n)
        if prev is not None and abs(total - prev) <= 1e-12 * max(1.0, abs(total)):
            return total
        prev = total
        n *= 2
    raise NumericError("circle circulation failed to converge")


def area_rho_star(obj) -> float:
    """Area in the cylinder metric |dw| / (2 pi |w|).

    The density 1/(4 pi^2 |w|^2) integrates by Stokes to the boundary
    circulation of log|w| d(arg w); the region must avoid the origin.
    """
    if isinstance(obj, Region):
        pts = np.asarray(obj.boundary, dtype=complex)
        if _winding(pts, 0.0 + 0.0j) != 0:
            raise OriginInRegionError("region contains the origin")
        scale = float(np.max(np.abs(pts)))
        if float(np.min(_segment_distances(pts, 0.0 + 0.0j))) <= 1e-12 * scale:
            raise OriginInRegionError("boundary touches the origin")
        return _polyline_log_circulation(pts) / (4.0 * math.pi**2)
    if isinstance(obj, Disk):
        if abs(obj.center) <= obj.radius * (1.0 + 1e-13):
            raise OriginInRegionError("disk contains the origin")
        return _circle_log_circulation(obj.center, obj.radius) / (4.0 * math.pi**2)
    if isinstance(obj, RoundConcentric):
        d0 = abs(obj.center)
        if obj.r_in <= d0 <= obj.r_out:
            raise OriginInRegionError("annulus ring contains the origin")
        outer = _circle_log_circulation(obj.center, obj.r_out)
        inner = _circle_log_circulation(obj.center, obj.r_in)
        return (outer - inner) / (4.0 * math.pi**2)
    if isinstance(obj, CirclePair):
        in_outer = abs(obj.outer.center) <= obj.outer.radius
        in_hole = abs(obj.inner.center) < obj.inner.radius
        if in_outer and not in_hole:
            raise OriginInRegionError("ring contains the origin")
        outer = _circle_log_circulation(obj.outer.center, obj.outer.radius)
        inner = _circle_log_circulation(obj.inner.center, obj.inner.radius)
        return (outer - inner) / (4.0 * math.pi**2)
    raise DomainError("area_rho_star expects a Region, Disk, or annulus spec")


@dataclass(frozen=True)
class NestedViolation:
    clause: int
    labels: tuple[complex, ...]
    detail: str


@dataclass(frozen=True)
class NestedReport:
    passed: bool
    min_modulus: float
    violations: tuple[NestedViolation, ...]


def validate_m_nested(system: NestedDiskSystem, m: float) -> NestedReport:
    """Check the three nesting clauses of a disk system at level m.

    Clause 1: each label sits in its inner disk and the triple is nested.
    Clause 2: an outer disk entering another triple's inner disk must fall
    inside that triple's middle disk.  Clause 3: every gap D minus the
    closed middle disk has modulus at least m.  Violations are returned
    as data, never raised.
    """
    violations = []
    min_mod = math.inf
    for t in system.triples:
        ok = (
            t.d_inner.contains_point(t.label)
            and t.d_mid.contains_disk(t.d_inner)
            and t.d_outer.contains_disk(t.d_mid)
        )
        if not ok:
            violations.append(
                NestedViolation(1, (t.label,), "triple is not nested around its label")
            )
    for t in system.triples:
        for s in system.triples:
            if s.label == t.label:
                continue
            if not t.d_outer.contains_disk(s.d_outer):
                continue
            if s.d_outer.meets(t.d_inner) and not t.d_mid.contains_disk(s.d_outer):
                violations.append(
                    NestedViolation(
                        2,
                        (t.label, s.label),
                        "disk meets an inner disk but escapes the middle disk",
                    )
                )
    for t in system.triples:
        if not t.d_outer.contains_closure(t.d_mid):
            gap = 0.0
        else:
            gap = _circle_pair_modulus(t.d_outer, t.d_mid)
        min_mod = min(min_mod, gap)
        if gap < m:
            violations.append(
                NestedViolation(
                    3, (t.label,), f"modulus {gap:.6g} below the bound {m:.6g}"
                )
            )
    return NestedReport(not violations, min_mod, tuple(violations))


@dataclass(frozen=True)
class AnalyticMap:
    """Analytic map with derivative, assumed univalent where applied."""

    name: str
    func: object
    deriv: object

    def __call__(self, z):
        return self.func(z)


@dataclass(frozen=True)
class ScatterEntry:
    label: complex
    worst_ratio: float
    worst_map: str


@dataclass(frozen=True)
class ScatterReport:
    passed: bool
    bound: float
    entries: tuple[ScatterEntry, ...]


def _image_disk_area(h: AnalyticMap, disk: Disk) -> float:
    """Cylinder area of h(disk) from the circulation along the image of
    the boundary circle."""
    n = 512
    prev = None
    while n <= 1 << 18:
        t = np.arange(n) * (TWO_PI / n)
        z = disk.center + disk.radius * np.exp(1j * t)
        w = np.asarray(h.func(z), dtype=complex)
        dw = np.asarray(h.deriv(z), dtype=complex) * (1j * disk.radius * np.exp(1j * t))
        if float(np.min(np.abs(w))) <= 1e-12 * float(np.max(np.abs(w))):
            raise OriginInRegionError(f"map {h.name} sends the boundary to 0")
        if _winding(w, 0.0 + 0.0j) != 0:
            raise OriginInRegionError(f"map {h.name} wraps a disk around 0")
        vals = np.log(np.abs(w)) * (dw / w).imag
        total = float(np.sum(vals)) * (TWO_PI / n) / (4.0 * math.pi**2)
        if prev is not None and abs(total - prev) <= 1e-10 * max(
            1e-12, abs(total)
        ):
            return abs(total)
        prev = total
        n *= 2
    raise NumericError("image area quadrature failed to converge")


def validate_scattered(
    system: NestedDiskSystem, maps, bound: float
) -> ScatterReport:
    """Evidence check of the scattering inequality on a disk system.

    For each label, the contained outer disks are pooled and the cylinder
    area of their image is compared against the image of the containing
    disk, for every supplied test map.  The quantifier over all univalent
    maps is not decidable; the supplied catalogue is evidence only.
    """
    if not 0.0 < bound:
        raise DomainError("bound must be positive")
    entries = []
    for t in system.triples:
        inside = [
            s.d_outer
            for s in system.triples
            if s.label != t.label
            and t.d_outer.contains_disk(s.d_outer)
            and s.d_outer != t.d_outer
        ]
        # nested-or-disjoint makes the maximal contained disks disjoint
        maximal = [
            d
            for d in inside
            if not any(o is not d and o.contains_disk(d) for o in inside)
        ]
        worst = 0.0
        worst_map = ""
        for h in maps:
            denom = _image_disk_area(h, t.d_outer)
            numer = sum(_image_disk_area(h, d) for d in maximal)
            ratio = numer / denom if denom > 0 else math.inf
            if ratio > worst:
                worst = ratio
                worst_map = h.name
        entries.append(ScatterEntry(t.label, worst, worst_map))
    passed = all(e.worst_ratio <= bound for e in entries)
    return ScatterReport(passed, bound, tuple(entries))


def standard_test_maps(system: NestedDiskSystem, seed: int = 0) -> tuple[AnalyticMap, ...]:
    """Catalogue of analytic maps safe on the system's hull.

    Affine motions placed away from the origin, an inversion centered off
    the hull, and exponentials of low-degree polynomials tame enough to
    stay univalent.  Every image omits 0 by construction.
    """
    centers = np.array([t.d_outer.center for t in system.triples], dtype=complex)
    radii = np.array([t.d_outer.radius for t in system.triples])
    hc = complex(np.mean(centers)) if len(centers) else 0.0 + 0.0j
    hr = float(np.max(np.abs(centers - hc) + radii)) if len(centers) else 1.0
    rng = np.random.default_rng(seed)

    maps = []
    for k in range(2):
        a = complex(*rng.uniform(-1, 1, 2))
        a = a / abs(a) * rng.uniform(0.5, 2.0)
        target = 4.0 * abs(a) * hr * np.exp(1j * rng.uniform(0, TWO_PI))
        b = complex(target) - a * hc
        maps.append(
            AnalyticMap(f"affine{k}", lambda z, a=a, b=b: a * z + b, lambda z, a=a: np.full_like(np.asarray(z, dtype=complex), a))
        )
    for k in range(2):
        q = hc + 2.0 * hr * complex(np.exp(1j * rng.uniform(0, TWO_PI)))
        maps.append(
            AnalyticMap(
                f"inversion{k}",
                lambda z, q=q: 1.0 / (z - q),
                lambda z, q=q: -1.0 / (z - q) ** 2,
            )
        )
    alpha = complex(min(1.0, 0.5 * math.pi / max(hr, 1e-9)))
    beta = -alpha * hc
    maps.append(
        AnalyticMap(
            "exp_affine",
            lambda z, a=alpha, b=beta: np.exp(a * z + b),
            lambda z, a=alpha, b=beta: a * np.exp(a * z + b),
        )
    )
    eps = alpha * 0.02 / max(hr, 1e-9)
    maps.append(
        AnalyticMap(
            "exp_quadratic",
            lambda z, a=alpha, b=beta, e=eps: np.exp(e * (z - hc) ** 2 + a * z + b),
            lambda z, a=alpha, b=beta, e=eps: (2.0 * e * (z - hc) + a)
            * np.exp(e * (z - hc) ** 2 + a * z + b),
        )
    )
    return tuple(maps)


@dataclass(frozen=True)
class PreimageComponent:
    """One component of f^{-k} of a base region, described by its lifted
    outer boundary.

    ``degree`` is the covering degree of f^k from the component onto the
    base.  Components whose boundary lifts close up around one another
    are merged, with the extra curves kept as holes.
    """

    boundary: tuple[complex, ...]
    degree: int
    holes: tuple[tuple[complex, ...], ...] = ()


def _resample_closed(pts: np.ndarray, n: int) -> np.ndarray:
    """Arclength resampling of a closed polyline to n points."""
    seg = np.abs(np.roll(pts, -1) - pts)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = np.arange(n) * (total / n)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(pts) - 1)
    local = (targets - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    nxt = np.roll(pts, -1)
    return pts[idx] + local * (nxt[idx] - pts[idx])


def _quadratic_fibers(a0: complex, w: np.ndarray):
    """Threaded square-root lift for z^2 + a0 = w.

    The sign flips whenever consecutive principal roots land on opposite
    branches; the cumulative flip carries one thread continuously, the
    other is its negative.  Returns the two threads and the wrap swap.
    """
    s = np.sqrt(w - a0)
    prev = s[:-1]
    nxt = s[1:]
    keep = np.abs(nxt - prev)
    swap = np.abs(nxt + prev)
    ratio = np.maximum(keep, swap) / np.maximum(np.minimum(keep, swap), 1e-300)
    flips = swap < keep
    sign = np.concatenate([[1.0], np.where(flips, -1.0, 1.0)]).cumprod()
    thread = sign * s
    # wrap step decides the monodromy: does the continued branch return
    # to +s[0] or to -s[0]?
    wrap_keep = abs(thread[-1] - s[0])
    wrap_swap = abs(thread[-1] + s[0])
    wrap_ratio = max(wrap_keep, wrap_swap) / max(min(wrap_keep, wrap_swap), 1e-300)
    ambiguous = bool(np.min(ratio) < 2.0 or wrap_ratio < 2.0)
    swapped = wrap_swap < wrap_keep
    paths = np.stack([thread, -thread], axis=1)
    sigma = (1, 0) if swapped else (0, 1)
    return paths, sigma, ambiguous


def _stacked_roots(f: MonicPolynomial, w: np.ndarray) -> np.ndarray:
    """Roots of f(z) = w_i for every sample, via stacked companions."""
    d = f.degree
    n = len(w)
    coeffs = f.coeffs_descending()
    comp = np.zeros((n, d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, 0, :] = -coeffs[1:][None, :]
    comp[:, 0, -1] = -(coeffs[-1] - w)
    return np.linalg.eigvals(comp)


def _general_fibers(f: MonicPolynomial, w: np.ndarray):
    """Continuously threaded root paths over the sample loop.

    Matching between consecutive fibers is a d x d assignment; the
    wrap-around assignment is the monodromy permutation whose cycles
    are the closed boundary lifts.
    """
    roots = _stacked_roots(f, w)
    n, d = roots.shape
    paths = np.empty((n, d), dtype=complex)
    paths[0] = roots[0]
    ambiguous = False
    cur = roots[0]
    for i in range(1, n + 1):
        fiber = roots[i % n]
        cost = np.abs(cur[:, None] - fiber[None, :])
        rows, cols = linear_sum_assignment(cost)
        chosen = cost[rows, cols]
        masked = cost.copy()
        masked[rows, cols] = np.inf
        runner_up = masked.min(axis=1)
        if np.any(runner_up < 2.0 * chosen):
            ambiguous = True
        cur = fiber[cols]
        if i < n:
            paths[i] = cur
    sigma = tuple(int(c) for c in cols)
    return paths, sigma, ambiguous


def _permutation_cycles(sigma) -> list[list[int]]:
    seen = [False] * len(sigma)
    cycles = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        cyc = []
        j = start
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = sigma[j]
        cycles.append(cyc)
    return cycles


def _lift_curve(
    f: MonicPolynomial,
    curve: np.ndarray,
    crit_vals,
    parent_degree: int,
) -> list[PreimageComponent]:
    """All closed lifts of one boundary curve through f, grouped into
    components."""
    scale = 1.0 + float(np.max(np.abs(curve)))
    n = int(min(512, max(64, len(curve))))
    for _ in range(4):
        samples = _resample_closed(curve, n)
        for cv in crit_vals:
            if float(np.min(np.abs(samples - cv))) < 1e-11 * scale:
                raise BranchCollisionError(
                    "boundary passes through a critical value"
                )
        if f.degree == 2:
            paths, sigma, ambiguous = _quadratic_fibers(f.lower_coeffs[0], samples)
        else:
            paths, sigma, ambiguous = _general_fibers(f, samples)
        if not ambiguous:
            break
        n *= 2
    else:
        raise BranchCollisionError(
            "boundary lift stayed ambiguous near a critical value"
        )

    curves = []
    for cyc in _permutation_cycles(sigma):
        pts = np.concatenate([paths[:, j] for j in cyc])
        curves.append((pts, len(cyc)))

    # group curves that close up around one another: even nesting depth
    # gives an outer boundary, odd depth a hole of its parent
    m = len(curves)
    inside = np.zeros((m, m), dtype=bool)
    for i, (ci, _) in enumerate(curves):
        for j, (cj, _) in enumerate(curves):
            if i != j:
                inside[i, j] = _winding(cj, complex(ci[0])) != 0
    depth = inside.sum(axis=1)
    comps = []
    for i, (ci, deg_i) in enumerate(curves):
        if depth[i] % 2:
            continue
        hole_idx = [
            j for j in range(m) if inside[j, i] and depth[j] == depth[i] + 1
        ]
        degree = deg_i + sum(curves[j][1] for j in hole_idx)
        comps.append(
            PreimageComponent(
                tuple(ci),
                degree * parent_degree,
                tuple(tuple(curves[j][0]) for j in hole_idx),
            )
        )
    return comps


def preimage_components(
    f: MonicPolynomial, disk: Region, depth: int
) -> list[list[PreimageComponent]]:
    """Components of f^{-k}(disk) for k = 1..depth via boundary lifting.

    Each level lifts every component boundary of the previous level
    through all root branches of f; the monodromy permutation of the
    closed loop groups the lifts into components and gives their
    covering degrees, so the degrees at level k always sum to d^k.
    """
    if depth < 1:
        raise DomainError("depth must be at least 1")
    crit_vals = critical_values(f)
    levels: list[list[PreimageComponent]] = []
    frontier = [PreimageComponent(tuple(disk.boundary), 1)]
    for _ in range(depth):
        children: list[PreimageComponent] = []
        for comp in frontier:
            children.extend(
                _lift_curve(
                    f,
                    np.asarray(comp.boundary, dtype=complex),
                    crit_vals,
                    comp.degree,
                )
            )
        children.sort(
            key=lambda c: (
                round(float(np.mean(np.asarray(c.boundary).real)), 9),
                round(float(np.mean(np.asarray(c.boundary).imag)), 9),
            )
        )
        levels.append(children)
        frontier = children
    return levels


def _point_set_diameter(pts: np.ndarray) -> float:
    xy = np.column_stack([pts.real, pts.imag])
    if len(xy) >= 4:
        try:
            hull = xy[ConvexHull(xy).vertices]
        except QhullError:
            hull = xy
    else:
        hull = xy
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((diff**2).sum(-1).max()))


@dataclass(frozen=True)
class LevelStats:
    level: int
    count: int
    max_diameter: float
    max_degree: int


@dataclass(frozen=True)
class StabilityReport:
    levels: tuple[LevelStats, ...]
    stable: bool
    note: str


def backward_stability_probe(
    f: MonicPolynomial,
    disk: Region,
    n_max: int,
    burn_in: int = 2,
    degree_bound: int | None = None,
) -> StabilityReport:
    """Track diameters and degrees of iterated preimages of a small disk.

    The disk behaves stably when component diameters shrink monotonically
    past the burn-in level and no covering degree exceeds the bound
    (default: the degree of f).
    """
    if degree_bound is None:
        degree_bound = f.degree
    levels = preimage_components(f, disk, n_max)
    stats = []
    for k, comps in enumerate(levels, start=1):
        diam = max(
            _point_set_diameter(np.asarray(c.boundary, dtype=complex))
            for c in comps
        )
        stats.append(
            LevelStats(k, len(comps), diam, max(c.degree for c in comps))
        )
    notes = []
    for prev, cur in zip(stats, stats[1:]):
        if prev.level > burn_in and cur.max_diameter >= prev.max_diameter:
            notes.append(f"diameter did not shrink at level {cur.level}")
    worst_degree = max(s.max_degree for s in stats)
    if worst_degree > degree_bound:
        notes.append(f"degree {worst_degree} exceeds the bound {degree_bound}")
    return StabilityReport(tuple(stats), not notes, "; ".join(notes))
