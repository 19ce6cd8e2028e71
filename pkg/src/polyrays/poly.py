"""Monic centered polynomials, their critical sets, and escape orbits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RootFindingError


@dataclass(frozen=True)
class MonicPolynomial:
    """f(z) = z^d + a_{d-2} z^{d-2} + ... + a_1 z + a_0 with d >= 2.

    ``lower_coeffs`` stores (a_0, a_1, ..., a_{d-2}); the z^{d-1} coefficient
    is identically zero (centered normalization).
    """

    degree: int
    lower_coeffs: tuple[complex, ...]

    def __init__(self, degree: int, lower_coeffs):
        if degree < 2:
            raise ValueError("degree must be at least 2")
        lower = tuple(complex(c) for c in lower_coeffs)
        if len(lower) != degree - 1:
            raise ValueError(
                f"need {degree - 1} lower coefficients, got {len(lower)}"
            )
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "lower_coeffs", lower)

    @classmethod
    def quadratic(cls, c) -> "MonicPolynomial":
        """z^2 + c."""
        return cls(2, (c,))

    def coeffs_descending(self) -> np.ndarray:
        """[1, 0, a_{d-2}, ..., a_1, a_0]."""
        out = np.zeros(self.degree + 1, dtype=complex)
        out[0] = 1.0
        for k, a in enumerate(self.lower_coeffs):
            out[self.degree - k] = a
        return out

    def derivative_coeffs_descending(self) -> np.ndarray:
        c = self.coeffs_descending()[:-1]
        return c * np.arange(self.degree, 0, -1)

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z):
        """f'(z), same scalar/array convention as evaluate."""
        return _horner(self.derivative_coeffs_descending(), z)


def _horner(coeffs: np.ndarray, z):
    if isinstance(z, (complex, float, int)):
        acc = complex(coeffs[0])
        zz = complex(z)
        for c in coeffs[1:]:
            acc = acc * zz + complex(c)
        return acc
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        acc = np.full_like(z, coeffs[0])
        for c in coeffs[1:]:
            acc = acc * z + c
    return acc


def evaluate(f: MonicPolynomial, z):
    """Horner evaluation; overflow propagates as inf (reported as escape)."""
    if isinstance(z, (complex, float, int)):
        try:
            return _horner(f.coeffs_descending(), complex(z))
        except OverflowError:
            return complex("inf")
    return _horner(f.coeffs_descending(), z)


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    multiplicity: int


@dataclass(frozen=True)
class CriticalSet:
    """Critical points with multiplicities; multiplicities sum to degree-1."""

    points: tuple[CriticalPoint, ...]

    def locations(self) -> tuple[complex, ...]:
        return tuple(p.location for p in self.points)

    def total_multiplicity(self) -> int:
        return sum(p.multiplicity for p in self.points)


def aberth_roots(
    coeffs,
    tol: float = 1e-13,
    max_iter: int = 600,
    restarts: int = 8,
    seed: int = 0,
) -> np.ndarray:
    """All roots of a complex polynomial (descending coefficients) by
    simultaneous Aberth-Ehrlich iteration with random-perturbation restarts.

    Raises :class:`RootFindingError` after the restart budget is exhausted.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1 or len(coeffs) < 2 or coeffs[0] == 0:
        raise ValueError("need a nonzero leading coefficient")
    coeffs = coeffs / coeffs[0]
    n = len(coeffs) - 1
    if n == 1:
        return np.array([-coeffs[1]])
    dcoeffs = coeffs[:-1] * np.arange(n, 0, -1)
    radius = 1.0 + np.max(np.abs(coeffs[1:]))
    rng = np.random.default_rng(seed)

    for attempt in range(restarts):
        if attempt == 0:
            # Slightly detuned circle so no start aligns with an axis.
            phases = 2 * np.pi * (np.arange(n) / n + 0.3619)
            w = 0.7 * radius * np.exp(1j * phases)
        else:
            w = radius * (0.4 + 0.6 * rng.random(n)) * np.exp(
                2j * np.pi * rng.random(n)
            )
        ok = False
        for _ in range(max_iter):
            p = _horner(coeffs, w)
            dp = _horner(dcoeffs, w)
            bad = np.abs(dp) == 0
            if np.any(bad):
                w = w + 1e-8 * radius * (1 + 1j)
                continue
            ratio = p / dp
            diff = w[:, None] - w[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - ratio * s
            denom = np.where(np.abs(denom) < 1e-30, 1e-30, denom)
            step = ratio / denom
            w = w - step
            if np.all(np.abs(step) <= tol * (1.0 + np.abs(w))):
                ok = True
                break
        if ok:
            residual = np.abs(_horner(coeffs, w))
            scale = np.maximum(1.0, np.abs(w)) ** n
            if np.all(residual <= 1e-8 * scale):
                return w
    raise RootFindingError(
        f"Aberth iteration failed to converge after {restarts} restarts"
    )


def _polish_multiple_root(f: MonicPolynomial, z0: complex, mult: int) -> complex:
    """A multiplicity-m root of f' is a simple root of the (m-1)-th
    derivative of f'; polish it there with plain Newton."""
    coeffs = f.derivative_coeffs_descending()
    for _ in range(mult - 1):
        coeffs = coeffs[:-1] * np.arange(len(coeffs) - 1, 0, -1)
    dcoeffs = coeffs[:-1] * np.arange(len(coeffs) - 1, 0, -1)
    z = complex(z0)
    for _ in range(40):
        val = _horner(coeffs, z)
        der = _horner(dcoeffs, z)
        if der == 0:
            break
        step = val / der
        z -= step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            break
    return z


def critical_points(
    f: MonicPolynomial, cluster_tol: float = 1e-8, seed: int = 0
) -> CriticalSet:
    """Critical set of f: roots of f' clustered into multiplicities.

    Roots closer than ``cluster_tol`` (relative to the root-radius scale)
    merge into one critical point; merged locations are re-polished on the
    appropriate derivative so multiple roots come back at full precision.
    """
    roots = aberth_roots(f.derivative_coeffs_descending(), seed=seed)
    scale = 1.0 + float(np.max(np.abs(roots), initial=0.0))
    tol = cluster_tol * scale

    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    used = np.zeros(len(roots), dtype=bool)
    clusters: list[list[complex]] = []
    for i in range(len(roots)):
        if used[i]:
            continue
        group = [roots[i]]
        used[i] = True
        frontier = [roots[i]]
        while frontier:
            base = frontier.pop()
            for j in range(len(roots)):
                if not used[j] and abs(roots[j] - base) <= tol:
                    used[j] = True
                    group.append(roots[j])
                    frontier.append(roots[j])
        clusters.append(group)

    pts = []
    for group in clusters:
        mult = len(group)
        center = complex(np.mean(group))
        if mult > 1:
            center = _polish_multiple_root(f, center, mult)
        pts.append(CriticalPoint(center, mult))
    pts.sort(key=lambda p: (p.location.real, p.location.imag))
    cs = CriticalSet(tuple(pts))
    if cs.total_multiplicity() != f.degree - 1:
        raise RootFindingError(
            "critical point multiplicities do not sum to degree-1; "
            "try a different cluster tolerance"
        )
    return cs


def critical_values(f: MonicPolynomial, seed: int = 0) -> tuple[complex, ...]:
    return tuple(f(p.location) for p in critical_points(f, seed=seed).points)


def default_escape_radius(f: MonicPolynomial) -> float:
    """Radius beyond which |f(z)| > |z| is guaranteed with slack."""
    return max(4.0, 2.0 * (1.0 + sum(abs(a) for a in f.lower_coeffs)))


@dataclass(frozen=True)
class PointOrbit:
    """Forward orbit truncated at the first exit from the escape disk."""

    points: tuple[complex, ...]
    escaped: bool


def orbit(
    f: MonicPolynomial, z, n: int, escape_radius: float | None = None
) -> PointOrbit:
    """[z, f(z), ..., f^n(z)] while the points stay in the escape disk.

    The first point outside the disk is dropped and sets ``escaped``.
    """
    radius = default_escape_radius(f) if escape_radius is None else escape_radius
    points: list[complex] = []
    current = complex(z)
    for _ in range(n + 1):
        if abs(current) > radius:
            return PointOrbit(tuple(points), True)
        points.append(current)
        current = f(current)
    return PointOrbit(tuple(points), False)
