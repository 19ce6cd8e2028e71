import math
import random

import numpy as np
import pytest

from polyrays import MonicPolynomial
from polyrays.errors import (
    BranchCollisionError,
    DegenerateAnnulusError,
    DomainError,
    OriginInRegionError,
)
from polyrays.geometry import (
    CirclePair,
    Disk,
    DiskTriple,
    NestedDiskSystem,
    Region,
    RoundConcentric,
    AnalyticMap,
    area_rho_star,
    backward_stability_probe,
    disk_region,
    modulus,
    preimage_components,
    shape,
    standard_test_maps,
    validate_m_nested,
    validate_scattered,
)

from oracles import (
    annulus_cylinder_area,
    extremal_length_modulus,
    grid_preimage_count,
    offcenter_disk_cylinder_area,
)

TWO_PI = 2.0 * math.pi


def test_shape_square_center():
    sq = Region((1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j))
    assert abs(shape(sq, 0.0) - math.sqrt(2.0)) < 1e-12


def test_shape_round_disk():
    circle = disk_region(0.3 + 0.1j, 2.0, 1024)
    assert abs(shape(circle, 0.3 + 0.1j) - 1.0) < 1e-5
    # point at distance a from the center sees (R+a)/(R-a)
    assert abs(shape(circle, 0.3 + 0.1j + 0.5) - 2.5 / 1.5) < 1e-4


def test_shape_rejects_bad_points():
    circle = disk_region(0.0, 1.0, 256)
    with pytest.raises(DomainError):
        shape(circle, 3.0)
    with pytest.raises(DomainError):
        shape(circle, circle.boundary[7])


def test_region_invariants():
    with pytest.raises(DomainError):
        Region((0j, 1 + 1j, 1 + 0j, 0 + 1j))  # bowtie
    with pytest.raises(DomainError):
        Region((0j, 0 + 1j, 1 + 1j, 1 + 0j))  # clockwise
    with pytest.raises(DomainError):
        Region((0j, 1 + 0j, 1 + 1j, 0 + 1j), basepoint=5.0)
    reg = Region((0j, 1 + 0j, 1 + 1j, 0 + 1j), basepoint=0.5 + 0.5j)
    assert reg.contains(0.25 + 0.75j)
    assert not reg.contains(2.0 + 0j)


def test_modulus_concentric():
    assert abs(modulus(RoundConcentric(0, 1.0, math.exp(TWO_PI))) - 1.0) < 1e-14
    assert abs(modulus(RoundConcentric(0, 1.0, math.e)) - 1.0 / TWO_PI) < 1e-15


def test_modulus_circle_pair_concentric_limit():
    pair = CirclePair(Disk(1.0 + 2.0j, 3.0), Disk(1.0 + 2.0j, 1.0))
    assert abs(modulus(pair) - math.log(3.0) / TWO_PI) < 1e-14


def test_modulus_circle_pair_frozen_value():
    pair = CirclePair(Disk(0.0, 1.0), Disk(0.3, 0.2))
    assert abs(modulus(pair) - 0.24041114126415392) < 1e-12


def test_modulus_degenerate_circles():
    with pytest.raises(DegenerateAnnulusError):
        CirclePair(Disk(0.0, 1.0), Disk(0.5, 0.5))
    with pytest.raises(DegenerateAnnulusError):
        RoundConcentric(0.0, 2.0, 2.0)


def test_modulus_mobius_invariance():
    rng = random.Random(11)
    for _ in range(5):
        outer = Disk(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), 2.0)
        inner = Disk(
            outer.center + complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
            rng.uniform(0.2, 0.6),
        )
        if not outer.contains_closure(inner):
            continue
        base = modulus(CirclePair(outer, inner))
        # a Moebius map with pole far from the configuration sends both
        # circles to circles; recover them from three image points
        pole = outer.center + 10.0 + 3.0j

        def mob(z):
            return 1.0 / (z - pole) + 0.7 - 0.2j

        def image_disk(disk):
            zs = [disk.center + disk.radius * cmath_exp(k) for k in range(3)]
            ws = [mob(z) for z in zs]
            return _circle_through(ws)

        im_outer = image_disk(outer)
        im_inner = image_disk(inner)
        if im_outer.contains_closure(im_inner):
            moved = modulus(CirclePair(im_outer, im_inner))
        else:
            moved = modulus(CirclePair(im_inner, im_outer))
        assert abs(moved - base) < 1e-9


def cmath_exp(k):
    return complex(math.cos(2.1 * k + 0.3), math.sin(2.1 * k + 0.3))


def _circle_through(ws):
    """Circle through three points via the circumcenter."""
    a, b, c = ws
    d = 2.0 * ((a - c).conjugate() * (b - c)).imag
    ux = (
        abs(a - c) ** 2 * (b - c).imag - abs(b - c) ** 2 * (a - c).imag
    ) / d
    uy = (
        abs(b - c) ** 2 * (a - c).real - abs(a - c) ** 2 * (b - c).real
    ) / d
    center = c + complex(ux, uy)
    return Disk(center, abs(a - center))


def test_modulus_against_extremal_length():
    pairs = [
        (Disk(0.0, 1.0), Disk(0.3, 0.2)),
        (Disk(1.0 + 1.0j, 2.0), Disk(0.4 + 1.3j, 0.5)),
        (Disk(-2.0j, 1.5), Disk(-0.6 - 2.2j, 0.4)),
    ]
    for outer, inner in pairs:
        exact = modulus(CirclePair(outer, inner))
        est = extremal_length_modulus(
            outer.center, outer.radius, inner.center, inner.radius
        )
        assert abs(est / exact - 1.0) < 0.02


def test_area_annulus_closed_form():
    rng = random.Random(3)
    for _ in range(20):
        r1 = rng.uniform(0.2, 2.0)
        r2 = r1 * rng.uniform(1.1, 8.0)
        got = area_rho_star(RoundConcentric(0.0, r1, r2))
        assert abs(got / annulus_cylinder_area(r1, r2) - 1.0) < 1e-6


def test_area_offcenter_disk():
    got = area_rho_star(Disk(5.0, 1.0))
    assert abs(got / offcenter_disk_cylinder_area(5.0, 1.0) - 1.0) < 1e-9
    # thin disk far out: density is nearly constant
    got = area_rho_star(Disk(10.0, 1e-3))
    approx = math.pi * 1e-6 / (4.0 * math.pi**2 * 100.0)
    assert abs(got / approx - 1.0) < 1e-5


def test_area_polyline_region():
    # square [9,11] x [-1,1]: the boundary rule must agree with direct
    # 2-d quadrature of the density
    from scipy.integrate import dblquad

    reg = Region((9.0 - 1j, 11.0 - 1j, 11.0 + 1j, 9.0 + 1j))
    val, err = dblquad(
        lambda y, x: 1.0 / (4.0 * math.pi**2 * (x * x + y * y)),
        9.0,
        11.0,
        -1.0,
        1.0,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    assert abs(area_rho_star(reg) / val - 1.0) < 1e-6


def test_area_shifted_annulus_origin_in_hole():
    # origin inside the hole: integrate the exact angular average
    # 1/(rho^2 - |a|^2) of the density over radii
    a = 0.25 + 0.25j
    got = area_rho_star(RoundConcentric(a, 1.0, 2.0))
    d2 = abs(a) ** 2
    expect = math.log((4.0 - d2) / (1.0 - d2)) / (4.0 * math.pi)
    assert abs(got / expect - 1.0) < 1e-9


def test_area_rejects_origin():
    with pytest.raises(OriginInRegionError):
        area_rho_star(Disk(0.1, 1.0))
    with pytest.raises(OriginInRegionError):
        area_rho_star(RoundConcentric(1.5, 1.0, 2.0))
    with pytest.raises(OriginInRegionError):
        area_rho_star(Region((1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j)))


def test_area_shape_euclidean_bound():
    rng = random.Random(7)
    for _ in range(50):
        center = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        n = rng.randrange(8, 24)
        radii = [rng.uniform(0.5, 2.0) for _ in range(n)]
        pts = tuple(
            center + radii[k] * complex(math.cos(TWO_PI * k / n), math.sin(TWO_PI * k / n))
            for k in range(n)
        )
        reg = Region(pts)
        s = shape(reg, center)
        area = reg.area()
        diam = reg.diameter()
        assert area <= (math.pi / 4.0) * s * s * diam * diam + 1e-12


def test_area_comparison_for_bounded_shape():
    # nested disks E in U far from the origin with Shape(E,x) <= C and
    # diam U <= C diam E keep a definite share of the cylinder area
    for c_bound in (2.0, 4.0):
        rng = random.Random(int(c_bound))
        for _ in range(100):
            phi = rng.uniform(0, TWO_PI)
            x = 50.0 * complex(math.cos(phi), math.sin(phi))
            n = rng.randrange(12, 20)
            radii = [rng.uniform(1.0, 0.95 * c_bound) for _ in range(n)]
            pts = tuple(
                x + radii[k] * complex(math.cos(TWO_PI * k / n), math.sin(TWO_PI * k / n))
                for k in range(n)
            )
            e_reg = Region(pts)
            assert shape(e_reg, x) <= c_bound
            diam_e = e_reg.diameter()
            u_reg = disk_region(x, 0.5 * c_bound * diam_e, 128)
            ratio = area_rho_star(e_reg) / area_rho_star(u_reg)
            assert ratio >= 1.0 / (2.0 * c_bound**4)


def test_nested_system_invariants():
    t1 = DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, 4.0))
    t2 = DiskTriple(10.0, Disk(10.0, 1.0), Disk(10.0, 2.0), Disk(10.0, 3.0))
    NestedDiskSystem((t1, t2))
    overlap = DiskTriple(3.0, Disk(3.0, 1.0), Disk(3.0, 1.5), Disk(3.0, 2.0))
    with pytest.raises(DomainError):
        NestedDiskSystem((t1, overlap))
    with pytest.raises(DomainError):
        DiskTriple(5.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, 4.0))


def test_validate_m_nested_pass_with_margin():
    m = 0.5
    r_out = 2.0 * math.exp(TWO_PI * (m + 0.05))
    t = DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, r_out))
    report = validate_m_nested(NestedDiskSystem((t,)), m)
    assert report.passed
    assert abs(report.min_modulus - (m + 0.05)) < 1e-12
    assert report.violations == ()


def test_validate_m_nested_clause2_violation():
    # D_y enters D''_x but pokes out of D'_x
    tx = DiskTriple(0.0, Disk(0.0, 2.0), Disk(0.0, 3.0), Disk(0.0, 10.0))
    ty = DiskTriple(2.5 + 0j, Disk(2.5, 0.3), Disk(2.5, 0.8), Disk(1.5, 3.0))
    report = validate_m_nested(NestedDiskSystem((tx, ty)), 0.01)
    clauses = {v.clause for v in report.violations}
    assert 2 in clauses
    labels = [v.labels for v in report.violations if v.clause == 2]
    assert (0.0 + 0j, 2.5 + 0j) in labels


def test_validate_m_nested_clause3_reports_achieved():
    m = 0.4
    r_out = 2.0 * math.exp(TWO_PI * m / 2.0)
    t = DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, r_out))
    report = validate_m_nested(NestedDiskSystem((t,)), m)
    assert not report.passed
    assert any(v.clause == 3 for v in report.violations)
    assert abs(report.min_modulus - m / 2.0) < 1e-12


def test_scattered_empty_interior():
    t = DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, 4.0))
    sys1 = NestedDiskSystem((t,))
    maps = standard_test_maps(sys1, seed=5)
    report = validate_scattered(sys1, maps, 0.5)
    assert report.passed
    assert report.entries[0].worst_ratio == 0.0


def test_scattered_identity_half_radius():
    x = 50.0 + 0j
    outer = DiskTriple(x, Disk(x, 0.25), Disk(x, 0.5), Disk(x, 1.0))
    inner = DiskTriple(x + 0.01, Disk(x + 0.01, 0.1), Disk(x + 0.01, 0.2), Disk(x, 0.5))
    sys2 = NestedDiskSystem((outer, inner))
    ident = AnalyticMap("identity", lambda z: z, lambda z: np.ones_like(z))
    report = validate_scattered(sys2, (ident,), 0.5)
    expect = offcenter_disk_cylinder_area(50.0, 0.5) / offcenter_disk_cylinder_area(
        50.0, 1.0
    )
    entry = next(e for e in report.entries if e.label == x)
    assert abs(entry.worst_ratio - expect) < 1e-8
    assert abs(entry.worst_ratio - 0.25) < 0.01
    assert report.passed


def test_scattered_inversion_matches_image_disks():
    x = 50.0 + 0j
    outer = DiskTriple(x, Disk(x, 0.25), Disk(x, 0.5), Disk(x, 1.0))
    inner = DiskTriple(x + 0.01, Disk(x + 0.01, 0.1), Disk(x + 0.01, 0.2), Disk(x, 0.5))
    sys2 = NestedDiskSystem((outer, inner))
    inv = AnalyticMap("inversion", lambda z: 1.0 / z, lambda z: -1.0 / z**2)
    report = validate_scattered(sys2, (inv,), 0.5)
    # 1/w sends |w-a|<R to the disk with center a/(a^2-R^2), radius R/(a^2-R^2)
    def image(a, r):
        return a / (a * a - r * r), r / (a * a - r * r)

    ci, ri = image(50.0, 0.5)
    co, ro = image(50.0, 1.0)
    expect = offcenter_disk_cylinder_area(ci, ri) / offcenter_disk_cylinder_area(co, ro)
    entry = next(e for e in report.entries if e.label == x)
    assert abs(entry.worst_ratio - expect) < 1e-6
    assert abs(entry.worst_ratio - 0.25) < 0.01


def test_scattered_flags_origin_hitting_map():
    t = DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, 4.0))
    bad = AnalyticMap("bad", lambda z: z, lambda z: np.ones_like(z))
    with pytest.raises(OriginInRegionError):
        validate_scattered(NestedDiskSystem((t,)), (bad,), 0.5)


def test_standard_maps_avoid_origin():
    t1 = DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, 4.0))
    maps = standard_test_maps(NestedDiskSystem((t1,)), seed=2)
    assert len(maps) >= 5
    zs = 4.0 * np.exp(1j * np.linspace(0, TWO_PI, 64))
    for h in maps:
        assert float(np.min(np.abs(np.asarray(h.func(zs))))) > 1e-6
        # derivative consistency by central differences
        step = 1e-6
        fd = (np.asarray(h.func(zs + step)) - np.asarray(h.func(zs - step))) / (
            2.0 * step
        )
        assert float(np.max(np.abs(fd - np.asarray(h.deriv(zs))))) < 1e-4


def test_preimage_square_map_split():
    f = MonicPolynomial(2, (0.0,))
    comps = preimage_components(f, disk_region(4.0, 1.0, 128), 1)[0]
    assert len(comps) == 2
    assert sorted(c.degree for c in comps) == [1, 1]
    centroids = sorted(
        (complex(np.mean(np.asarray(c.boundary))) for c in comps),
        key=lambda z: z.real,
    )
    assert abs(centroids[0] + 2.0) < 1e-2
    assert abs(centroids[1] - 2.0) < 1e-2


def test_preimage_critical_disk_single_cover():
    f = MonicPolynomial(2, (0.0,))
    comps = preimage_components(f, disk_region(0.0, 1.0, 128), 1)[0]
    assert len(comps) == 1
    assert comps[0].degree == 2
    radii = np.abs(np.asarray(comps[0].boundary))
    assert float(np.max(np.abs(radii - 1.0))) < 1e-12


def test_preimage_degree_sums():
    f = MonicPolynomial(2, (1j,))
    levels = preimage_components(f, disk_region(-1j, 0.05, 256), 6)
    for k, comps in enumerate(levels, start=1):
        assert sum(c.degree for c in comps) == 2**k


def test_preimage_counts_match_grid_oracle():
    f = MonicPolynomial(2, (1j,))
    levels = preimage_components(f, disk_region(-1j, 0.05, 256), 3)
    for k, comps in enumerate(levels, start=1):
        for res in (1024, 2048):
            assert len(comps) == grid_preimage_count(1j, -1j, 0.05, k, res)


def test_preimage_cubic_fibers():
    f = MonicPolynomial(3, (0.0, 0.0))  # z^3
    comps = preimage_components(f, disk_region(8.0, 0.5, 192), 1)[0]
    assert len(comps) == 3
    for c in comps:
        assert c.degree == 1
        assert abs(abs(complex(np.mean(np.asarray(c.boundary)))) - 2.0) < 1e-2


def test_preimage_branch_collision():
    f = MonicPolynomial(2, (0.0,))
    ring = disk_region(1.0, 1.0, 64)  # boundary passes through the critical value 0
    with pytest.raises(BranchCollisionError):
        preimage_components(f, ring, 1)


def test_degree_d_modulus_law():
    for d in (2, 3, 5):
        f = MonicPolynomial(d, tuple([0.0] * (d - 1)))  # z^d
        r_u, r_v = 1.2, 2.0
        lifted = {}
        for name, r in (("u", r_u), ("v", r_v)):
            comp = preimage_components(f, disk_region(0.0, r, 256), 1)[0][0]
            assert comp.degree == d
            radii = np.abs(np.asarray(comp.boundary))
            assert float(np.ptp(radii)) < 1e-12
            lifted[name] = float(np.mean(radii))
        mod_base = modulus(RoundConcentric(0.0, r_u, r_v))
        mod_lift = modulus(RoundConcentric(0.0, lifted["u"], lifted["v"]))
        assert abs(mod_lift - mod_base / d) < 1e-9
        assert mod_lift <= mod_base + 1e-12 <= d * mod_lift + 1e-9


def test_backward_stability_chebyshev_fixed_point():
    f = MonicPolynomial(2, (-2.0,))
    report = backward_stability_probe(f, disk_region(2.0, 0.1, 128), 8)
    assert report.stable
    diams = [s.max_diameter for s in report.levels]
    assert all(b < a for a, b in zip(diams[1:], diams[2:]))
    assert all(s.max_degree <= 2 for s in report.levels)
    strict = backward_stability_probe(
        f, disk_region(2.0, 0.1, 128), 4, degree_bound=1
    )
    assert not strict.stable
    assert "degree" in strict.note


def test_backward_stability_geometric_shrink():
    f = MonicPolynomial(2, (0.0,))
    report = backward_stability_probe(f, disk_region(1.0, 0.1, 128), 8)
    assert report.stable
    diams = [s.max_diameter for s in report.levels]
    for a, b in zip(diams, diams[1:]):
        assert 0.4 < b / a < 0.62
    assert all(s.max_degree == 1 for s in report.levels)
    assert all(s.count == 2**s.level for s in report.levels)


def test_backward_stability_misiurewicz():
    f = MonicPolynomial(2, (1j,))
    report = backward_stability_probe(f, disk_region(-1j, 0.05, 256), 8)
    assert report.stable
    diams = [s.max_diameter for s in report.levels]
    # the critical orbit hits the disk center at step 3, so a component of
    # square-root size appears at level 3 before the decay sets in
    assert diams[2] > diams[1]
    assert all(b < a for a, b in zip(diams[2:], diams[3:]))
    assert max(s.max_degree for s in report.levels) == 2


def test_preimage_determinism():
    f = MonicPolynomial(2, (1j,))
    one = preimage_components(f, disk_region(-1j, 0.05, 256), 4)
    two = preimage_components(f, disk_region(-1j, 0.05, 256), 4)
    assert one == two
