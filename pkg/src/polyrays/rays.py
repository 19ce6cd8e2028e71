"""Dynamical external rays.

A ray of angle theta (in turns) is the preimage under the Böttcher
coordinate of the straight line {e^{s + 2*pi*i*theta} : s > 0}.  Tracing
walks s downward with a gradient predictor and a Newton corrector on the
lifted log-Böttcher equation.  A ray either extends to arbitrarily small
potential (and may land), or terminates at a precritical point whose
forward image is a critical point; the potential of that event is returned
as ``r_f`` on the Bifurcated terminal.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import (
    DomainError,
    NewtonDivergenceError,
    NumericError,
)
from .poly import MonicPolynomial, _horner, critical_points
from .potential import (
    _descend_fixed_angle,
    _newton_log_psi,
    _seed_potential,
    green,
)


@dataclass(frozen=True)
class StepControl:
    """Knobs for the potential schedule of the tracer.

    The potential shrinks by ``ratio`` per step (``fine_ratio`` once below
    ``fine_below``), with each decrement capped at ``max_decrement`` so the
    corrector always starts inside its Newton basin.  A failed corrector
    halves the decrement until the relative gap drops under
    ``halving_floor``, which is treated as a stall.
    """

    ratio: float = 0.85
    fine_ratio: float = 0.95
    fine_below: float = 1e-4
    max_decrement: float = 0.4
    halving_floor: float = 1e-10
    max_samples: int = 50_000


@dataclass(frozen=True)
class RaySample:
    potential: float
    point: complex


@dataclass(frozen=True)
class Landed:
    point: complex


@dataclass(frozen=True)
class Bifurcated:
    """Ray hit a precritical point at potential r_f."""

    point: complex
    r_f: float


@dataclass(frozen=True)
class Truncated:
    reason: str


@dataclass(frozen=True)
class RayPath:
    angle: float  # turns in [0, 1)
    samples: tuple[RaySample, ...]
    terminal: Landed | Bifurcated | Truncated


def _bifurcation_candidates(
    f: MonicPolynomial, s_min: float
) -> list[tuple[float, complex, int]]:
    """Potentials where rays can terminate: G(c)/d^j for critical points c,
    as (potential, critical_point, j) with f^j(x) = c at the terminal x."""
    out = []
    for p in critical_points(f).points:
        rate = green(f, f(p.location)).green
        if rate <= 0.0:
            continue
        s = rate / f.degree
        j = 0
        while s >= 0.5 * s_min and j <= 400:
            out.append((s, p.location, j))
            s /= f.degree
            j += 1
    return out


def _precritical_newton(coeffs, dcoeffs, c: complex, j: int, x0: complex) -> complex:
    """Solve f^j(x) = c by Newton from x0."""
    x = complex(x0)
    scale = 1.0 + abs(c)
    for _ in range(80):
        v = x
        dv = 1.0 + 0j
        for _ in range(j):
            dv *= _horner(dcoeffs, v)
            v = _horner(coeffs, v)
        res = v - c
        if abs(res) <= 1e-12 * scale:
            return x
        if dv == 0:
            break
        x = x - res / dv
    raise NewtonDivergenceError(f"no precritical point near {x0} at depth {j}")


def _iterated_aitken(points, rounds: int = 4) -> tuple[complex, float]:
    """Repeated Aitken delta-squared acceleration.

    Returns the estimate from whichever round had the tightest spread:
    once the signal is exhausted further rounds only amplify noise.
    """
    seq = list(points)
    best = (seq[-1], max(abs(x - seq[-1]) for x in seq[-3:]))
    for _ in range(rounds):
        if len(seq) < 5:
            # too short to both transform and still judge the result
            break
        nxt = []
        for a, b, c in zip(seq, seq[1:], seq[2:]):
            den = (c - b) - (b - a)
            nxt.append(c if den == 0 else c - (c - b) ** 2 / den)
        seq = nxt
        est = seq[-1]
        spread = max(abs(x - est) for x in seq[-3:])
        if spread < best[1]:
            best = (est, spread)
    return best


_BAND = 1e-3  # relative half-width of the guarded zone around a candidate


def _root_span(coeffs) -> float:
    """Radius bound on the roots of a monic polynomial (Fujiwara-style);
    sets the spatial scale of the Julia set."""
    d = len(coeffs) - 1
    return 1.0 + 2.0 * max(
        abs(coeffs[i]) ** (1.0 / i) for i in range(1, d + 1)
    )


def _hit_test(
    coeffs, dcoeffs, z: complex, s: float, deriv: complex, cand, span: float
) -> complex | None:
    """Decide whether the ray currently at z (potential s, slightly above the
    candidate potential) terminates at a precritical point.

    Near such a point x the lifted log-Böttcher map is quadratic,
    L(z) = s* + i*A + a*(z - x)^2 + ..., and on a ray that actually hits x
    the ratio q = L'(z)*(z - x) / (2*(s - s*)) tends to 1.  Rays passing by
    give q far from 1; the distance guard only rejects polish runaways, the
    q test is the one carrying the band-width spatial scale.
    """
    s_star, c, j = cand
    try:
        x = _precritical_newton(coeffs, dcoeffs, c, j, z)
    except NewtonDivergenceError:
        return None
    if abs(z - x) > 0.5 * (1.0 + abs(x)) + span:
        return None
    q = deriv * (z - x) / (2.0 * (s - s_star))
    if abs(q - 1.0) > 0.5:
        return None
    return x


def trace_ray(
    f: MonicPolynomial,
    theta,
    s_end: float = 1e-12,
    control: StepControl = StepControl(),
) -> RayPath:
    """Trace the external ray of angle theta (turns; Angle or float) from
    the seed potential down to s_end."""
    turns = float(theta) % 1.0
    lifted = 2.0 * math.pi * turns
    if s_end <= 0.0:
        raise ValueError("s_end must be positive")
    coeffs = f.coeffs_descending()
    dcoeffs = f.derivative_coeffs_descending()
    s_top = _seed_potential(f)
    if s_end >= s_top:
        raise ValueError(f"s_end must be below the seed potential {s_top:g}")

    cands = sorted(
        (c for c in _bifurcation_candidates(f, s_end) if c[0] < s_top),
        key=lambda c: -c[0],
    )
    ci = 0
    span = _root_span(coeffs)

    z, lb, _ = _newton_log_psi(
        coeffs, complex(s_top, lifted), cmath.exp(complex(s_top, lifted))
    )
    samples = [RaySample(s_top, z)]
    deriv = lb.deriv
    s = s_top
    terminal = None

    while s > s_end:
        if len(samples) >= control.max_samples:
            terminal = Truncated(f"sample cap {control.max_samples} reached")
            break
        while ci < len(cands) and cands[ci][0] >= s * (1.0 - 1e-12):
            ci += 1

        in_band = (
            ci < len(cands) and s <= cands[ci][0] * (1.0 + _BAND) * (1.0 + 1e-9)
        )

        if in_band:
            # Sitting just above a candidate potential: decide hit or
            # pass-through, for every candidate sharing this level.
            k = ci + 1
            while k < len(cands) and cands[k][0] >= cands[ci][0] * (
                1.0 - 3.0 * _BAND
            ):
                k += 1
            hit = None
            for cand in cands[ci:k]:
                x = _hit_test(coeffs, dcoeffs, z, s, deriv, cand, span)
                if x is not None:
                    hit = Bifurcated(x, cand[0])
                    break
            if hit is not None:
                terminal = hit
                break
            s_floor = cands[k - 1][0]
            s_try = max(s_end, s_floor * (1.0 - _BAND))
            if s_end >= s_floor:
                s_try = s_end
            ci = k
        else:
            ratio = control.fine_ratio if s < control.fine_below else control.ratio
            s_try = max(s_end, s * ratio, s - control.max_decrement)
            if ci < len(cands):
                band_hi = cands[ci][0] * (1.0 + _BAND)
                if s_try < band_hi:
                    s_try = band_hi

        while True:
            z_pred = z + (s_try - s) / deriv
            try:
                z_new, lb, _ = _newton_log_psi(
                    coeffs, complex(s_try, lifted), z_pred
                )
            except NewtonDivergenceError:
                if s - s_try <= control.halving_floor * s:
                    terminal = Truncated(
                        f"corrector stalled at potential {s:.6e}"
                    )
                    break
                s_try = 0.5 * (s + s_try)
                continue
            z = z_new
            deriv = lb.deriv
            s = s_try
            samples.append(RaySample(s, z))
            break
        if terminal is not None:
            break
        # Near a landing point the ray can crowd spatially much faster than
        # the potential shrinks; once samples stop moving, stop descending.
        if len(samples) >= 6:
            tail = [p.point for p in samples[-5:]]
            scale = 1.0 + abs(tail[-1])
            if max(abs(w - tail[-1]) for w in tail) <= 1e-12 * scale:
                terminal = Landed(tail[-1])
                break

    if terminal is None:
        tail = [p.point for p in samples[-14:]]
        est, spread = _iterated_aitken(tail)
        scale = 1.0 + abs(est)
        if len(tail) >= 10 and spread <= 1e-7 * scale:
            terminal = Landed(est)
        else:
            terminal = Truncated(
                f"reached s_end={s_end:g} without a stable landing extrapolation"
            )
    return RayPath(turns, tuple(samples), terminal)


def landing_point(f: MonicPolynomial, theta, s_end: float = 1e-13) -> complex:
    """Landing point of the theta-ray, or an error if it does not land."""
    path = trace_ray(f, theta, s_end=s_end)
    if isinstance(path.terminal, Landed):
        return path.terminal.point
    if isinstance(path.terminal, Bifurcated):
        raise DomainError(
            f"ray at angle {path.angle} terminates at a precritical point "
            f"(potential {path.terminal.r_f:.6e})"
        )
    raise NumericError(path.terminal.reason)


def ray_point(f: MonicPolynomial, theta, s: float) -> complex:
    """Single point of the theta-ray at potential s."""
    if s <= 0.0:
        raise ValueError("potential must be positive")
    turns = float(theta) % 1.0
    lifted = 2.0 * math.pi * turns
    coeffs = f.coeffs_descending()
    s_top = max(_seed_potential(f), s)
    seed = cmath.exp(complex(s_top, lifted))
    z, _ = _descend_fixed_angle(coeffs, lifted, s_top, s, seed, ratio=0.85)
    return z
