import pytest

from polyrays.angles import Angle, quadratic_portrait, validate_portrait
from polyrays.errors import DomainError
from polyrays.geometry import (
    Disk,
    DiskTriple,
    NestedDiskSystem,
    backward_stability_probe,
    disk_region,
)
from polyrays.poly import MonicPolynomial
from polyrays.rays import Bifurcated, Landed, trace_ray
from polyrays.serialize import (
    disk_system_from_json,
    disk_system_to_json,
    dumps,
    equipotential_csv,
    landing_report_to_json,
    loads,
    param_ray_csv,
    poly_from_json,
    poly_to_json,
    portrait_from_json,
    portrait_report_to_json,
    portrait_to_json,
    ray_csv,
    ray_sidecar,
    stability_report_to_json,
)
from polyrays.potential import equipotential
from polyrays.shiftlocus import continue_param_ray, landing_probe


def make_cubic_portrait():
    from polyrays.angles import CriticalPortrait, PortraitBlock

    return CriticalPortrait(
        3, (PortraitBlock((Angle(1, 9), Angle(4, 9), Angle(7, 9))),)
    )


def test_poly_round_trip():
    f = MonicPolynomial(3, (0.5 - 0.25j, -1.0 + 2.0j))
    doc = poly_to_json(f)
    assert poly_from_json(doc) == f
    text = dumps(doc)
    assert dumps(loads(text)) == text


def test_poly_parse_rejects_malformed():
    with pytest.raises(DomainError):
        poly_from_json({"degree": 2})
    with pytest.raises(DomainError):
        poly_from_json({"degree": 2, "coeffs": [[0.0, 0.0]], "extra": 1})
    with pytest.raises(DomainError):
        poly_from_json({"degree": 2, "coeffs": [[0.0, 0.0], [1.0, 0.0]]})
    with pytest.raises(DomainError):
        poly_from_json({"degree": 1, "coeffs": []})
    with pytest.raises(DomainError):
        poly_from_json({"degree": 2, "coeffs": [[0.0]]})
    with pytest.raises(DomainError):
        poly_from_json([2, [[0.0, 0.0]]])


def test_portrait_round_trip():
    for p in (quadratic_portrait(Angle(1, 6)), make_cubic_portrait()):
        doc = portrait_to_json(p)
        assert portrait_from_json(doc) == p
        text = dumps(doc)
        assert dumps(loads(text)) == text


def test_portrait_json_matches_documented_shape():
    doc = portrait_to_json(quadratic_portrait(Angle(1, 6)))
    assert doc == {
        "degree": 2,
        "blocks": [[{"num": 1, "den": 12}, {"num": 7, "den": 12}]],
    }


def test_portrait_parse_rejects_malformed():
    with pytest.raises(DomainError):
        portrait_from_json({"degree": 2, "blocks": []})
    with pytest.raises(DomainError):
        portrait_from_json({"degree": 2, "blocks": [[{"num": 1, "den": 0}]]})
    with pytest.raises(DomainError):
        portrait_from_json({"degree": 2, "blocks": [[{"num": 1}]]})
    with pytest.raises(DomainError):
        # one angle is not a block
        portrait_from_json({"degree": 2, "blocks": [[{"num": 1, "den": 12}]]})


def test_portrait_report_json_mirrors_report():
    report = validate_portrait(quadratic_portrait(Angle(1, 6)))
    doc = portrait_report_to_json(report)
    assert doc["valid"] is True
    assert set(doc) == {"valid", "common_image", "unlinked", "count"}
    for key in ("common_image", "unlinked", "count"):
        assert set(doc[key]) == {"ok", "detail", "offenders"}
    text = dumps(doc)
    assert dumps(loads(text)) == text


def test_ray_csv_and_sidecar():
    f = MonicPolynomial.quadratic(0.0)
    ray = trace_ray(f, 0.0, s_end=1e-3)
    text = ray_csv(f, ray)
    lines = text.strip().split("\n")
    assert lines[0] == "s,re,im,green_residual"
    assert len(lines) == len(ray.samples) + 1
    cells = [float(v) for v in lines[-1].split(",")]
    assert len(cells) == 4
    assert cells[3] < 1e-9
    # potentials decrease down the file
    pots = [float(line.split(",")[0]) for line in lines[1:]]
    assert all(b < a for a, b in zip(pots, pots[1:]))

    side = ray_sidecar(ray)
    assert side["status"] == "landed"
    assert isinstance(ray.terminal, Landed)
    assert side["point"] == [ray.terminal.point.real, ray.terminal.point.imag]
    assert dumps(loads(dumps(side))) == dumps(side)


def test_ray_sidecar_bifurcated():
    # c = -6: the critical value sits on the 1/2-ray, so the 1/4-ray
    # bifurcates at the critical point
    f = MonicPolynomial.quadratic(-6.0)
    ray = trace_ray(f, 0.25)
    assert isinstance(ray.terminal, Bifurcated)
    side = ray_sidecar(ray)
    assert side["status"] == "bifurcated"
    assert side["r_f"] > 0.0


def test_equipotential_csv_header():
    f = MonicPolynomial.quadratic(0.25j)
    text = equipotential_csv(equipotential(f, 1.0, 16))
    lines = text.strip().split("\n")
    assert lines[0] == "angle_index,re,im,green_residual"
    assert len(lines) == 17
    assert lines[1].split(",")[0] == "0"


def test_param_ray_csv_layout():
    portrait = make_cubic_portrait()
    points = continue_param_ray(portrait, 2.0, 1.0)
    text = param_ray_csv(points)
    lines = text.strip().split("\n")
    assert lines[0] == "r,a0_re,a0_im,a1_re,a1_im,residual"
    assert len(lines) == len(points) + 1
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == 2.0
    assert first[-1] < 1e-9


def test_param_ray_csv_rejects_empty():
    with pytest.raises(DomainError):
        param_ray_csv([])


def test_landing_report_fields():
    diag = landing_probe(quadratic_portrait(Angle(1, 2)), r_min=1e-4)
    doc = landing_report_to_json(diag)
    assert doc["verdict"] in ("landed", "inconclusive")
    assert len(doc["schedule"]) == len(doc["increments"]) + 1
    assert doc["extrapolated"]["degree"] == 2
    assert abs(doc["extrapolated"]["coeffs"][0][0] - (-2.0)) < 1e-3
    text = dumps(doc)
    assert dumps(loads(text)) == text


def test_disk_system_round_trip():
    system = NestedDiskSystem(
        (
            DiskTriple(0.0, Disk(0.0, 1.0), Disk(0.0, 2.0), Disk(0.0, 8.0)),
            DiskTriple(5.0 + 0j, Disk(5.0, 0.5), Disk(5.0, 1.0), Disk(5.0, 2.0)),
        )
    )
    doc = disk_system_to_json(system)
    assert disk_system_from_json(doc) == system
    assert doc[0]["inner"] == {"c": [0.0, 0.0], "r": 1.0}
    text = dumps(doc)
    assert dumps(loads(text)) == text


def test_disk_system_parse_rejects_malformed():
    with pytest.raises(DomainError):
        disk_system_from_json([])
    with pytest.raises(DomainError):
        disk_system_from_json([{"label": [0.0, 0.0]}])
    with pytest.raises(DomainError):
        disk_system_from_json(
            [
                {
                    "label": [0.0, 0.0],
                    "inner": {"c": [0.0, 0.0], "r": -1.0},
                    "mid": {"c": [0.0, 0.0], "r": 2.0},
                    "outer": {"c": [0.0, 0.0], "r": 3.0},
                }
            ]
        )


def test_region_round_trip():
    from polyrays.geometry import Region
    from polyrays.serialize import region_from_json, region_to_json

    region = disk_region(1.0 + 1.0j, 0.5, 32)
    doc = region_to_json(region)
    assert region_from_json(doc) == region
    assert dumps(loads(dumps(doc))) == dumps(doc)
    square = Region((0j, 1.0, 1.0 + 1.0j, 1.0j))
    doc = region_to_json(square)
    assert doc["basepoint"] is None
    assert region_from_json(doc) == square
    with pytest.raises(DomainError):
        region_from_json({"boundary": [[0.0, 0.0], [1.0, 0.0]], "basepoint": None})


def test_stability_report_arrays():
    f = MonicPolynomial.quadratic(0.0)
    report = backward_stability_probe(f, disk_region(1.0, 0.1, 128), 3)
    doc = stability_report_to_json(report)
    assert doc["levels"] == [1, 2, 3]
    assert doc["counts"] == [2, 4, 8]
    assert len(doc["max_diameters"]) == 3
    assert doc["max_degrees"] == [1, 1, 1]
    assert doc["stable"] is True
    text = dumps(doc)
    assert dumps(loads(text)) == text


def test_emission_is_deterministic():
    f = MonicPolynomial(3, (0.1 + 0.2j, -0.3 + 0.7j))
    assert dumps(poly_to_json(f)) == dumps(poly_to_json(f))
    ray = trace_ray(f, Angle(1, 3), s_end=0.05)
    again = trace_ray(f, Angle(1, 3), s_end=0.05)
    assert ray_csv(f, ray) == ray_csv(f, again)
