"""Command-line interface over portraits, rays, parameter rays, and the
geometry validators.

Exit codes: 0 success, 1 usage error, 2 domain or validation failure,
3 numeric failure (partial output is written when available).

Options resolve in three layers: command-line flags override config-file
entries, which override the built-in defaults listed in ``_DEFAULTS``.
The config file is plain text, one ``key = value`` per line with ``#``
comments, keyed by flag names with dashes replaced by underscores.  The
POLYRAYS_OUT_DIR environment variable sets the default directory for
file artifacts; identical inputs, config, and seed produce byte-identical
outputs.
"""

import argparse
import os
import sys
from pathlib import Path

from . import serialize
from .angles import (
    Angle,
    angle_orbit,
    classify_portrait,
    enumerate_portraits,
    quadratic_portrait,
    validate_portrait,
)
from .errors import ContinuationStallError, DomainError, NumericError, PolyraysError
from .geometry import (
    CirclePair,
    Disk,
    RoundConcentric,
    area_rho_star,
    backward_stability_probe,
    disk_region,
    modulus,
    shape,
    standard_test_maps,
    validate_m_nested,
    validate_scattered,
)
from .rays import StepControl, Truncated, trace_ray
from .render import Viewport, render_svg
from .shiftlocus import continue_param_ray, landing_probe

_DEFAULTS = {
    "out_dir": (str, None),  # resolved against POLYRAYS_OUT_DIR, then "."
    "seed": (int, 0),
    "cap": (int, 200_000),
    "s_end": (float, 1e-12),
    "ratio": (float, StepControl().ratio),
    "max_samples": (int, StepControl().max_samples),
    "rho": (float, 0.85),
    "tol": (float, 0.95),
    "depth": (int, 8),
    "boundary_samples": (int, 256),
    "degree_bound": (int, None),
    "px": (int, 512),
    "max_iter": (int, 120),
    "half_width": (float, None),
}


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit status 2 for usage errors; remap to 1 so 2
    stays free for domain validation failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_angle(text: str) -> Angle:
    parts = text.split("/")
    if len(parts) == 1:
        return Angle(int(parts[0]))
    if len(parts) == 2:
        return Angle(int(parts[0]), int(parts[1]))
    raise ValueError(f"expected an angle like 7/12, got {text!r}")


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"expected a point like 0.5,-1, got {text!r}")


def _parse_disk(text: str) -> Disk:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected a disk like cx,cy,r, got {text!r}")
    return Disk(complex(float(parts[0]), float(parts[1])), float(parts[2]))


def _read_config(path: str) -> dict:
    cfg = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno} is not key = value: {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _opt(args, cfg: dict, name: str):
    """Flag if given, else config entry, else the built-in default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    cast, default = _DEFAULTS[name]
    if name in cfg:
        try:
            return cast(cfg[name])
        except ValueError:
            raise DomainError(
                f"config value {name} = {cfg[name]!r} is not a {cast.__name__}"
            ) from None
    return default


def _out_dir(args, cfg) -> Path:
    explicit = _opt(args, cfg, "out_dir")
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get("POLYRAYS_OUT_DIR", "."))


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(text)


def _emit(doc, args) -> None:
    text = serialize.dumps(doc)
    if getattr(args, "out", None):
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from None
    return serialize.loads(text)


def _load_poly(path: str):
    return serialize.poly_from_json(_load_json(path))


def _load_portrait(path: str):
    return serialize.portrait_from_json(_load_json(path))


def _cmd_portrait(args, cfg) -> int:
    if args.action == "quadratic":
        _emit(serialize.portrait_to_json(quadratic_portrait(args.theta)), args)
        return 0
    if args.action == "enumerate":
        portraits = enumerate_portraits(args.degree, args.max_den, _opt(args, cfg, "cap"))
        _emit(
            {
                "degree": args.degree,
                "max_den": args.max_den,
                "count": len(portraits),
                "portraits": [serialize.portrait_to_json(p) for p in portraits],
            },
            args,
        )
        return 0
    portrait = _load_portrait(args.file)
    if args.action == "classify":
        _emit(
            {
                "class": classify_portrait(portrait).value,
                "orbits": [
                    {
                        "angle": str(a),
                        "preperiod": angle_orbit(a, portrait.degree).preperiod,
                        "period": angle_orbit(a, portrait.degree).period,
                    }
                    for a in portrait.all_angles()
                ],
            },
            args,
        )
        return 0
    report = validate_portrait(portrait)
    _emit(serialize.portrait_report_to_json(report), args)
    return 0 if report.valid else 2


def _cmd_ray(args, cfg) -> int:
    f = _load_poly(args.poly)
    control = StepControl(
        ratio=_opt(args, cfg, "ratio"), max_samples=_opt(args, cfg, "max_samples")
    )
    ray = trace_ray(f, args.theta, _opt(args, cfg, "s_end"), control)
    csv_path = Path(args.csv) if args.csv else _out_dir(args, cfg) / "ray.csv"
    _write(csv_path, serialize.ray_csv(f, ray))
    sidecar = serialize.ray_sidecar(ray)
    _write(csv_path.with_suffix(".terminal.json"), serialize.dumps(sidecar))
    if args.svg:
        half_width = _opt(args, cfg, "half_width")
        viewport = (
            Viewport(0j, half_width, _opt(args, cfg, "px"))
            if half_width is not None
            else Viewport.around(f, _opt(args, cfg, "px"))
        )
        _write(
            Path(args.svg),
            render_svg(f, rays=[ray], viewport=viewport, max_iter=_opt(args, cfg, "max_iter")),
        )
    _emit(sidecar, args)
    if isinstance(ray.terminal, Truncated):
        print(f"ray truncated: {ray.terminal.reason}", file=sys.stderr)
        return 3
    return 0


def _cmd_paramray(args, cfg) -> int:
    portrait = _load_portrait(args.portrait)
    rho = _opt(args, cfg, "rho")
    csv_path = Path(args.csv) if args.csv else _out_dir(args, cfg) / "paramray.csv"
    try:
        points = continue_param_ray(portrait, args.r_from, args.r_to, rho)
    except ContinuationStallError as exc:
        if exc.samples:
            _write(csv_path, serialize.param_ray_csv(exc.samples))
        last = exc.last_good.r if exc.last_good is not None else None
        print(f"continuation stalled: {exc} (last good r = {last})", file=sys.stderr)
        return 3
    _write(csv_path, serialize.param_ray_csv(points))
    if args.land:
        diag = landing_probe(
            portrait,
            r_min=args.r_to,
            tol=_opt(args, cfg, "tol"),
            r_start=args.r_from,
            rho=rho,
            seed=points[0],
        )
        _emit(serialize.landing_report_to_json(diag), args)
    else:
        _emit({"samples": len(points), "r_end": points[-1].r}, args)
    return 0


def _annulus_from_flags(args):
    if args.concentric is not None:
        r_in, r_out = args.concentric
        center = args.center if args.center is not None else 0j
        return RoundConcentric(center, r_in, r_out)
    if args.outer is not None and args.inner is not None:
        return CirclePair(args.outer, args.inner)
    raise DomainError("give either --concentric R_IN R_OUT or --outer and --inner")


def _cmd_geometry(args, cfg) -> int:
    if args.action == "shape":
        region = serialize.region_from_json(_load_json(args.region))
        _emit({"shape": shape(region, args.z)}, args)
        return 0
    if args.action == "modulus":
        _emit({"modulus": modulus(_annulus_from_flags(args))}, args)
        return 0
    if args.action == "rhostar":
        if args.region is not None:
            target = serialize.region_from_json(_load_json(args.region))
        elif args.disk is not None:
            target = args.disk
        else:
            target = _annulus_from_flags(args)
        _emit({"area": area_rho_star(target)}, args)
        return 0
    if args.action == "nested":
        system = serialize.disk_system_from_json(_load_json(args.file))
        report = validate_m_nested(system, args.m)
        _emit(
            {
                "passed": report.passed,
                "m": args.m,
                "min_modulus": report.min_modulus,
                "violations": [
                    {"clause": v.clause, "labels": [str(x) for x in v.labels], "detail": v.detail}
                    for v in report.violations
                ],
            },
            args,
        )
        return 0 if report.passed else 2
    if args.action == "scattered":
        system = serialize.disk_system_from_json(_load_json(args.file))
        maps = standard_test_maps(system, _opt(args, cfg, "seed"))
        report = validate_scattered(system, maps, args.bound)
        _emit(
            {
                "passed": report.passed,
                "bound": report.bound,
                "entries": [
                    {
                        "label": str(e.label),
                        "worst_ratio": e.worst_ratio,
                        "worst_map": e.worst_map,
                    }
                    for e in report.entries
                ],
            },
            args,
        )
        return 0 if report.passed else 2
    # mane: backward stability probe
    f = _load_poly(args.poly)
    disk = disk_region(args.center, args.radius, _opt(args, cfg, "boundary_samples"))
    report = backward_stability_probe(
        f,
        disk,
        _opt(args, cfg, "depth"),
        degree_bound=_opt(args, cfg, "degree_bound"),
    )
    _emit(serialize.stability_report_to_json(report), args)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="polyrays", description=__doc__.split("\n\n")[0])
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value options file")
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--out-dir", dest="out_dir", help="directory for file artifacts")
    common.add_argument("--seed", type=int, help="seed for randomized validators")
    sub = parser.add_subparsers(dest="command", required=True)

    portrait = sub.add_parser("portrait", help="critical portrait tools", parents=[common])
    pact = portrait.add_subparsers(dest="action", required=True)
    quad = pact.add_parser("quadratic", parents=[common])
    quad.add_argument("--theta", type=_parse_angle, required=True)
    val = pact.add_parser("validate", parents=[common])
    val.add_argument("--file", required=True)
    cls = pact.add_parser("classify", parents=[common])
    cls.add_argument("--file", required=True)
    enum = pact.add_parser("enumerate", parents=[common])
    enum.add_argument("--degree", type=int, required=True)
    enum.add_argument("--max-den", dest="max_den", type=int, required=True)
    enum.add_argument("--cap", type=int)

    ray = sub.add_parser("ray", help="trace one dynamical ray", parents=[common])
    ray.add_argument("--poly", required=True)
    ray.add_argument("--theta", type=_parse_angle, required=True)
    ray.add_argument("--s-end", dest="s_end", type=float)
    ray.add_argument("--ratio", type=float)
    ray.add_argument("--max-samples", dest="max_samples", type=int)
    ray.add_argument("--csv", help="sample table path (default OUT_DIR/ray.csv)")
    ray.add_argument("--svg", help="also render the ray over a membership raster")
    ray.add_argument("--px", type=int)
    ray.add_argument("--max-iter", dest="max_iter", type=int)
    ray.add_argument("--half-width", dest="half_width", type=float)

    param = sub.add_parser("paramray", help="continue one parameter ray", parents=[common])
    param.add_argument("--portrait", required=True)
    param.add_argument("--r-from", dest="r_from", type=float, required=True)
    param.add_argument("--r-to", dest="r_to", type=float, required=True)
    param.add_argument("--rho", type=float)
    param.add_argument("--tol", type=float)
    param.add_argument("--land", action="store_true", help="also emit a landing report")
    param.add_argument("--csv", help="sample table path (default OUT_DIR/paramray.csv)")

    geometry = sub.add_parser("geometry", help="distortion geometry tools", parents=[common])
    gact = geometry.add_subparsers(dest="action", required=True)
    gshape = gact.add_parser("shape", parents=[common])
    gshape.add_argument("--region", required=True)
    gshape.add_argument("--z", type=_parse_complex, required=True)
    gmod = gact.add_parser("modulus", parents=[common])
    gmod.add_argument("--concentric", nargs=2, type=float, metavar=("R_IN", "R_OUT"))
    gmod.add_argument("--center", type=_parse_complex)
    gmod.add_argument("--outer", type=_parse_disk)
    gmod.add_argument("--inner", type=_parse_disk)
    grho = gact.add_parser("rhostar", parents=[common])
    grho.add_argument("--region")
    grho.add_argument("--disk", type=_parse_disk)
    grho.add_argument("--concentric", nargs=2, type=float, metavar=("R_IN", "R_OUT"))
    grho.add_argument("--center", type=_parse_complex)
    grho.add_argument("--outer", type=_parse_disk)
    grho.add_argument("--inner", type=_parse_disk)
    gnest = gact.add_parser("nested", parents=[common])
    gnest.add_argument("--file", required=True)
    gnest.add_argument("--m", type=float, required=True)
    gscat = gact.add_parser("scattered", parents=[common])
    gscat.add_argument("--file", required=True)
    gscat.add_argument("--bound", type=float, required=True)
    gmane = gact.add_parser("mane", parents=[common])
    gmane.add_argument("--poly", required=True)
    gmane.add_argument("--center", type=_parse_complex, required=True)
    gmane.add_argument("--radius", type=float, required=True)
    gmane.add_argument("--depth", type=int)
    gmane.add_argument("--boundary-samples", dest="boundary_samples", type=int)
    gmane.add_argument("--degree-bound", dest="degree_bound", type=int)

    portrait.set_defaults(handler=_cmd_portrait)
    ray.set_defaults(handler=_cmd_ray)
    param.set_defaults(handler=_cmd_paramray)
    geometry.set_defaults(handler=_cmd_geometry)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _read_config(args.config) if getattr(args, "config", None) else {}
        return args.handler(args, cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PolyraysError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
