"""Plot artifacts: escape-time rasters of the filled Julia set with rays
and equipotential curves overlaid as stroked polylines in a single SVG.

The raster is embedded as a base64 PNG so the SVG is one self-contained
file.  Output is deterministic for fixed inputs.
"""

import base64
import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .poly import MonicPolynomial, default_escape_radius


@dataclass(frozen=True)
class Viewport:
    """Square window of the plane mapped onto a px-by-px raster."""

    center: complex = 0j
    half_width: float = 2.0
    px: int = 512

    def __post_init__(self):
        if self.half_width <= 0.0:
            raise ValueError("half_width must be positive")
        if self.px < 8:
            raise ValueError("px must be at least 8")

    def grid(self) -> np.ndarray:
        """Complex pixel centers, row 0 at the top of the window."""
        t = np.linspace(-self.half_width, self.half_width, self.px)
        return (self.center.real + t[None, :]) + 1j * (self.center.imag - t[:, None])

    def to_pixel(self, z: complex) -> tuple[float, float]:
        scale = (self.px - 1) / (2.0 * self.half_width)
        x = (z.real - self.center.real + self.half_width) * scale
        y = (self.center.imag + self.half_width - z.imag) * scale
        return x, y

    @classmethod
    def around(cls, f: MonicPolynomial, px: int = 512) -> "Viewport":
        """Window guaranteed to contain the filled Julia set of f."""
        return cls(0j, default_escape_radius(f) / 2.0, px)


def escape_counts(
    f: MonicPolynomial, viewport: Viewport, max_iter: int = 120
) -> np.ndarray:
    """Iterations until escape per pixel; pixels still bounded after the
    cap hold max_iter and approximate the filled Julia set."""
    radius = default_escape_radius(f)
    z = viewport.grid()
    counts = np.full(z.shape, max_iter, dtype=np.int32)
    alive = np.ones(z.shape, dtype=bool)
    for k in range(max_iter):
        escaped = alive & (np.abs(z) > radius)
        counts[escaped] = k
        alive &= ~escaped
        if not alive.any():
            break
        z[alive] = f(z[alive])
    return counts


def raster_png(counts: np.ndarray, max_iter: int) -> bytes:
    """Grayscale PNG: bounded pixels black, escaping pixels lighter the
    faster they escape."""
    t = counts.astype(float) / max_iter
    shade = np.where(counts >= max_iter, 0.0, 245.0 - 190.0 * t)
    img = Image.fromarray(shade.astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def _overlay_points(curve) -> list[complex]:
    if hasattr(curve, "samples"):
        return [s.point for s in curve.samples]
    pts = list(curve)
    if pts and hasattr(pts[0], "point"):
        return [s.point for s in pts]
    return [complex(p) for p in pts]


def _polyline(points, viewport: Viewport, color: str, close: bool) -> str:
    pts = list(points)
    if close and pts:
        pts.append(pts[0])
    coords = " ".join(
        "{:.2f},{:.2f}".format(*viewport.to_pixel(p)) for p in pts
    )
    return (
        f'<polyline points="{coords}" fill="none" '
        f'stroke="{color}" stroke-width="1.2"/>'
    )


def render_svg(
    f: MonicPolynomial,
    rays=(),
    equipotentials=(),
    viewport: Viewport | None = None,
    max_iter: int = 120,
) -> str:
    """Self-contained SVG: membership raster, rays in red, equipotential
    curves (closed) in blue.

    ``rays`` accepts RayPath objects or bare point sequences;
    ``equipotentials`` accepts EquipotentialSample lists or point sequences.
    """
    if viewport is None:
        viewport = Viewport.around(f)
    counts = escape_counts(f, viewport, max_iter)
    encoded = base64.b64encode(raster_png(counts, max_iter)).decode("ascii")
    n = viewport.px
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{n}" '
        f'viewBox="0 0 {n} {n}">',
        f'<image x="0" y="0" width="{n}" height="{n}" '
        f'href="data:image/png;base64,{encoded}"/>',
    ]
    for curve in equipotentials:
        parts.append(_polyline(_overlay_points(curve), viewport, "#1971c2", True))
    for ray in rays:
        parts.append(_polyline(_overlay_points(ray), viewport, "#e03131", False))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
