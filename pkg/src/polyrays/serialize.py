"""Readers and writers for the artifact file formats.

Emitters are deterministic: equal values produce identical text, and
re-emitting a parsed document reproduces it byte for byte (floats print
in shortest round-trip form).  Parsers validate structure and raise
DomainError on malformed input.

Formats:
  polynomial JSON   {"degree": d, "coeffs": [[re, im], ...]} for a_0..a_{d-2}
  portrait JSON     {"degree": d, "blocks": [[{"num": n, "den": m}, ...], ...]}
  ray CSV           s, re, im, green_residual (sidecar JSON holds the terminal)
  equipotential CSV angle_index, re, im, green_residual
  param-ray CSV     r, a0_re, a0_im, ..., residual
  landing JSON      schedule, increments, decay_ratio, extrapolated, verdict
  disk-system JSON  [{"label": [re, im], "inner": {"c": [re, im], "r": r},
                      "mid": {...}, "outer": {...}}, ...]
  region JSON       {"boundary": [[re, im], ...], "basepoint": [re, im]|null}
  probe JSON        per-level arrays of counts, diameters, degrees
"""

import json

from .angles import Angle, CriticalPortrait, PortraitBlock, PortraitReport
from .errors import DomainError
from .geometry import Disk, DiskTriple, NestedDiskSystem, Region, StabilityReport
from .poly import MonicPolynomial
from .potential import green
from .rays import Bifurcated, Landed, RayPath, Truncated
from .shiftlocus import LandingDiagnostics


def dumps(data) -> str:
    """Canonical JSON text: two-space indent, trailing newline."""
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON: {exc}") from None


def _require(ok: bool, message: str):
    if not ok:
        raise DomainError(message)


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _as_complex(value, what: str) -> complex:
    _require(
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value),
        f"{what} must be a [re, im] pair",
    )
    return complex(value[0], value[1])


def _as_int(value, what: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), f"{what} must be an integer")
    return value


def _keys(data, required: set, what: str) -> None:
    _require(isinstance(data, dict), f"{what} must be a JSON object")
    _require(
        set(data) == required,
        f"{what} must have exactly the keys {sorted(required)}, got {sorted(data)}",
    )


def poly_to_json(f: MonicPolynomial) -> dict:
    return {"degree": f.degree, "coeffs": [_pair(c) for c in f.lower_coeffs]}


def poly_from_json(data) -> MonicPolynomial:
    _keys(data, {"degree", "coeffs"}, "polynomial")
    d = _as_int(data["degree"], "degree")
    _require(isinstance(data["coeffs"], list), "coeffs must be a list")
    coeffs = [_as_complex(c, "coefficient") for c in data["coeffs"]]
    try:
        return MonicPolynomial(d, coeffs)
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def portrait_to_json(p: CriticalPortrait) -> dict:
    return {
        "degree": p.degree,
        "blocks": [
            [{"num": a.num, "den": a.den} for a in block.angles] for block in p.blocks
        ],
    }


def portrait_from_json(data) -> CriticalPortrait:
    _keys(data, {"degree", "blocks"}, "portrait")
    d = _as_int(data["degree"], "degree")
    _require(isinstance(data["blocks"], list) and data["blocks"], "blocks must be a nonempty list")
    blocks = []
    for raw in data["blocks"]:
        _require(isinstance(raw, list) and raw, "each block must be a nonempty list of angles")
        angles = []
        for entry in raw:
            _keys(entry, {"num", "den"}, "angle")
            num = _as_int(entry["num"], "num")
            den = _as_int(entry["den"], "den")
            try:
                angles.append(Angle(num, den))
            except ValueError as exc:
                raise DomainError(str(exc)) from None
        try:
            blocks.append(PortraitBlock(tuple(angles)))
        except ValueError as exc:
            raise DomainError(str(exc)) from None
    try:
        return CriticalPortrait(d, tuple(blocks))
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def portrait_report_to_json(report: PortraitReport) -> dict:
    def condition(c):
        return {"ok": c.ok, "detail": c.detail, "offenders": [str(o) for o in c.offenders]}

    return {
        "valid": report.valid,
        "common_image": condition(report.common_image),
        "unlinked": condition(report.unlinked),
        "count": condition(report.count),
    }


def ray_csv(f: MonicPolynomial, ray: RayPath) -> str:
    """Sample table for a traced ray; residuals are recomputed from scratch
    so the file stands on its own."""
    rows = ["s,re,im,green_residual"]
    for sample in ray.samples:
        resid = abs(green(f, sample.point).green - sample.potential)
        rows.append(
            f"{sample.potential!r},{sample.point.real!r},{sample.point.imag!r},{resid!r}"
        )
    return "\n".join(rows) + "\n"


def ray_sidecar(ray: RayPath) -> dict:
    """Terminal status of a traced ray as a small JSON document."""
    doc = {"angle": ray.angle, "samples": len(ray.samples)}
    terminal = ray.terminal
    if isinstance(terminal, Landed):
        doc["status"] = "landed"
        doc["point"] = _pair(terminal.point)
    elif isinstance(terminal, Bifurcated):
        doc["status"] = "bifurcated"
        doc["point"] = _pair(terminal.point)
        doc["r_f"] = terminal.r_f
    elif isinstance(terminal, Truncated):
        doc["status"] = "truncated"
        doc["reason"] = terminal.reason
    else:
        raise DomainError(f"unknown terminal status {terminal!r}")
    return doc


def equipotential_csv(samples) -> str:
    rows = ["angle_index,re,im,green_residual"]
    for s in samples:
        rows.append(
            f"{s.angle_index},{s.point.real!r},{s.point.imag!r},{s.green_residual!r}"
        )
    return "\n".join(rows) + "\n"


def param_ray_csv(points) -> str:
    points = list(points)
    _require(bool(points), "parameter ray must contain at least one sample")
    d = points[0].poly.degree
    header = "r," + ",".join(f"a{k}_re,a{k}_im" for k in range(d - 1)) + ",residual"
    rows = [header]
    for p in points:
        cells = [repr(p.r)]
        for c in p.poly.lower_coeffs:
            cells.append(repr(c.real))
            cells.append(repr(c.imag))
        cells.append(repr(p.residual))
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def landing_report_to_json(diag: LandingDiagnostics) -> dict:
    return {
        "verdict": diag.verdict,
        "schedule": [float(r) for r in diag.r_schedule],
        "increments": [float(x) for x in diag.cauchy_increments],
        "decay_ratio": diag.decay_ratio,
        "extrapolated": poly_to_json(diag.extrapolated_limit),
        "note": diag.note,
    }


def _disk_to_json(d: Disk) -> dict:
    return {"c": _pair(d.center), "r": d.radius}


def _disk_from_json(data) -> Disk:
    _keys(data, {"c", "r"}, "disk")
    center = _as_complex(data["c"], "disk center")
    r = data["r"]
    _require(isinstance(r, (int, float)) and not isinstance(r, bool), "disk radius must be a number")
    return Disk(center, float(r))


def disk_system_to_json(system: NestedDiskSystem) -> list:
    return [
        {
            "label": _pair(t.label),
            "inner": _disk_to_json(t.d_inner),
            "mid": _disk_to_json(t.d_mid),
            "outer": _disk_to_json(t.d_outer),
        }
        for t in system.triples
    ]


def disk_system_from_json(data) -> NestedDiskSystem:
    _require(isinstance(data, list) and data, "disk system must be a nonempty list")
    triples = []
    for entry in data:
        _keys(entry, {"label", "inner", "mid", "outer"}, "disk triple")
        triples.append(
            DiskTriple(
                _as_complex(entry["label"], "label"),
                _disk_from_json(entry["inner"]),
                _disk_from_json(entry["mid"]),
                _disk_from_json(entry["outer"]),
            )
        )
    return NestedDiskSystem(tuple(triples))


def region_to_json(region: Region) -> dict:
    doc = {"boundary": [_pair(p) for p in region.boundary]}
    doc["basepoint"] = None if region.basepoint is None else _pair(region.basepoint)
    return doc


def region_from_json(data) -> Region:
    _keys(data, {"boundary", "basepoint"}, "region")
    _require(isinstance(data["boundary"], list), "boundary must be a list")
    pts = tuple(_as_complex(p, "boundary point") for p in data["boundary"])
    base = data["basepoint"]
    if base is not None:
        base = _as_complex(base, "basepoint")
    return Region(pts, base)


def stability_report_to_json(report: StabilityReport) -> dict:
    return {
        "levels": [s.level for s in report.levels],
        "counts": [s.count for s in report.levels],
        "max_diameters": [s.max_diameter for s in report.levels],
        "max_degrees": [s.max_degree for s in report.levels],
        "stable": report.stable,
        "note": report.note,
    }
