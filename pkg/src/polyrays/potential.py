"""Escape potential and Böttcher logarithms for monic polynomials.

The engine iterates a point until it reaches the near-identity region
|z| >= R_IDENTITY, where the Böttcher coordinate psi satisfies
psi(z) = z * (f(z)/z^d)^{1/d} * ... to machine accuracy, then telescopes the
functional equation psi(f(z)) = psi(z)^d back down the orbit.  The potential
(escape-rate Green function) is Re log psi and needs no branch choice.  The
argument of log psi does: it is selected either from a caller-supplied
expected argument ("witness": the nearest lift of the top-level argument is
taken, which is stable whenever the expectation is accurate to pi/d^n), or,
with no witness, by chaining first-order direction estimates down the orbit,
which is reliable above the critical value level.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BranchAmbiguityError,
    LevelBelowCriticalError,
    NewtonDivergenceError,
    NonEscapingPointError,
)
from .poly import MonicPolynomial, _horner, critical_points

R_IDENTITY = 1e12
MAX_ESCAPE_ITER = 2048
_CHAIN_GUARD = 0.4  # fraction of the candidate spacing 2*pi/d


@dataclass(frozen=True)
class LogBottcher:
    """Lifted log psi: re = potential, im = lifted argument.

    ``noise`` estimates the absolute double-precision error of ``value``:
    rounding at orbit point z_t enters as eps * |z_t| * |d log psi / d z_t|,
    and the worst orbit point governs.
    """

    value: complex
    deriv: complex  # d/dz log psi
    iterations: int
    noise: float = 0.0
    param_deriv: tuple[complex, ...] | None = None


def _tail_ratio(coeffs, z: complex) -> complex:
    """f(z)/z^d evaluated with negative powers only; safe for huge |z|."""
    w = 1.0 / z
    acc = complex(coeffs[-1])
    for c in coeffs[-2:0:-1]:
        acc = complex(c) + w * acc
    return 1.0 + w * acc


def _wrap_angle(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def _log_bottcher_coeffs(
    coeffs: np.ndarray,
    z,
    expected_arg: float | None = None,
    *,
    want_arg: bool = True,
    refine: int = 1,
    r_id: float = R_IDENTITY,
    max_iter: int = MAX_ESCAPE_ITER,
    tangent_seed=None,
    coeff_tangents=None,
) -> LogBottcher:
    """Lifted log of the Böttcher coordinate at an escaping point.

    ``coeffs`` are descending coefficients of a monic polynomial (the
    z^{d-1} slot may be nonzero here; public wrappers always pass centered
    ones).  With ``tangent_seed``/``coeff_tangents`` the total derivative of
    log psi with respect to external parameters is propagated along the
    orbit (main telescoping term; the identity-region corrections contribute
    O(1e-24) relatively and are ignored).
    """
    d = len(coeffs) - 1
    dcoeffs = coeffs[:-1] * np.arange(d, 0, -1)

    current = complex(z)
    orbit = [current]
    for _ in range(max_iter):
        if abs(current) >= r_id:
            break
        current = _horner(coeffs, current)
        orbit.append(current)
    else:
        if abs(current) < r_id:
            raise NonEscapingPointError(
                f"orbit stayed below {r_id:g} within {max_iter} iterations"
            )
    n = len(orbit) - 1
    top = orbit[-1]

    # Asymptotic log psi at the top of the orbit, telescoped `refine`+1 terms.
    val = cmath.log(top)
    y = top
    denom = float(d)
    for _ in range(refine + 1):
        u = _tail_ratio(coeffs, y)
        if abs(u - 1.0) > 0.5:
            raise BranchAmbiguityError(
                "identity-region expansion unreliable; coefficients too large "
                "for the configured identity radius"
            )
        val += cmath.log(u) / denom
        denom *= d
        if abs(y) > 10.0 ** (280.0 / d):
            break
        y = _horner(coeffs, y)

    deriv = 1.0 + 0j
    worst = abs(complex(z))
    for z_t in orbit[:-1]:
        if deriv != 0:
            worst = max(worst, abs(z_t) / abs(deriv))
        deriv *= _horner(dcoeffs, z_t) / d
    deriv /= top
    noise = 2.3e-16 * abs(deriv) * worst

    param_deriv = None
    if tangent_seed is not None:
        tangents = np.asarray(tangent_seed, dtype=complex).copy()
        scale = 1.0
        for z_t in orbit[:-1]:
            fp = _horner(dcoeffs, z_t) / d
            shift = np.array(
                [_horner(ct, z_t) for ct in coeff_tangents], dtype=complex
            )
            tangents = fp * tangents + shift / (d * scale)
            scale *= d
        param_deriv = tuple(tangents / top)

    big_d = float(d) ** n
    if not want_arg:
        return LogBottcher(complex(val.real / big_d, 0.0), deriv, n, noise, param_deriv)

    if expected_arg is not None:
        k = round((expected_arg * big_d - val.imag) / (2.0 * math.pi))
        lifted = (val.imag + 2.0 * math.pi * k) / big_d
        return LogBottcher(complex(val.real / big_d, lifted), deriv, n, noise, param_deriv)

    # No witness: chain direction estimates down the orbit.  At each level the
    # d candidate arguments are spaced 2*pi/d apart; the estimate must fall
    # within the guard band of exactly one of them.
    lifted = val.imag
    for j in range(n - 1, -1, -1):
        z_j = orbit[j]
        u0 = _tail_ratio(coeffs, z_j)
        u1 = _tail_ratio(coeffs, orbit[j + 1])
        if u0.real <= 0 or u1.real <= 0:
            raise BranchAmbiguityError(
                f"direction estimate undefined at orbit level {j}"
            )
        est = z_j * u0 ** (1.0 / d) * u1 ** (1.0 / (d * d))
        est_arg = cmath.phase(est)
        base = lifted / d
        spacing = 2.0 * math.pi / d
        k = round((est_arg - base) / spacing)
        cand = base + spacing * k
        if abs(_wrap_angle(cand - est_arg)) > _CHAIN_GUARD * spacing:
            raise BranchAmbiguityError(
                f"no candidate branch within the guard band at orbit level {j}"
            )
        lifted = cand
    return LogBottcher(complex(val.real / big_d, lifted), deriv, n, noise, param_deriv)


@dataclass(frozen=True)
class PotentialSample:
    """Escape potential at a point; ``green`` is 0 iff not ``escaped``."""

    point: complex
    green: float
    iterations_used: int
    gradient: complex
    escaped: bool


def green(f: MonicPolynomial, z, max_iter: int = MAX_ESCAPE_ITER) -> PotentialSample:
    """Escape-rate potential G(z) = lim log|f^n(z)| / d^n with its gradient.

    Non-escaping points are flagged, not errors: they come back with
    green = 0 and escaped = False.
    """
    coeffs = f.coeffs_descending()
    try:
        lb = _log_bottcher_coeffs(coeffs, z, want_arg=False, max_iter=max_iter)
    except NonEscapingPointError:
        return PotentialSample(complex(z), 0.0, max_iter, 0j, False)
    return PotentialSample(
        complex(z), lb.value.real, lb.iterations, lb.deriv.conjugate(), True
    )


def green_gradient(f: MonicPolynomial, z) -> complex:
    """Gradient of the potential packed as a complex number (G_x + i G_y)."""
    sample = green(f, z)
    if not sample.escaped:
        raise NonEscapingPointError("gradient needs an escaping point")
    return sample.gradient


@lru_cache(maxsize=512)
def critical_value_rates(f: MonicPolynomial) -> tuple[float, ...]:
    """Escape rates of the critical values, deduplicated by critical value,
    ascending.  Bounded critical orbits contribute rate 0."""
    values = [f(p.location) for p in critical_points(f).points]
    scale = 1.0 + max(abs(v) for v in values)
    distinct: list[complex] = []
    for v in values:
        if all(abs(v - w) > 1e-9 * scale for w in distinct):
            distinct.append(v)
    return tuple(sorted(green(f, v).green for v in distinct))


def max_critical_rate(f: MonicPolynomial) -> float:
    rates = critical_value_rates(f)
    return rates[-1] if rates else 0.0


@dataclass(frozen=True)
class BottcherValue:
    point: complex
    value: complex
    branch_witness: complex


def bottcher(f: MonicPolynomial, z, witness=None) -> BottcherValue:
    """Böttcher coordinate psi(z), normalized psi(z)/z -> 1 at infinity.

    Without a witness the point must sit strictly above the critical value
    level, where the branch is determined by continuity from infinity; below
    it a witness (a previous nearby value, or a BottcherValue) is required.
    """
    coeffs = f.coeffs_descending()
    if witness is None:
        sample = green(f, z)
        if not sample.escaped:
            raise NonEscapingPointError("Böttcher coordinate needs escape")
        if sample.green <= max_critical_rate(f):
            raise BranchAmbiguityError(
                "point at or below the critical value level; supply a witness"
            )
        lb = _log_bottcher_coeffs(coeffs, z)
    else:
        if isinstance(witness, BottcherValue):
            witness = witness.value
        lb = _log_bottcher_coeffs(
            coeffs, z, expected_arg=cmath.phase(complex(witness))
        )
    value = cmath.exp(lb.value)
    return BottcherValue(complex(z), value, value)


def log_bottcher(
    f: MonicPolynomial, z, expected_arg: float | None = None
) -> LogBottcher:
    """Lifted log psi on a MonicPolynomial; see the engine docstring."""
    return _log_bottcher_coeffs(f.coeffs_descending(), z, expected_arg)


def _newton_log_psi(
    coeffs: np.ndarray,
    target: complex,
    z0: complex,
    *,
    tol: float | None = None,
    max_newton: int = 40,
) -> tuple[complex, LogBottcher, int]:
    """Solve log psi(z) = target (lifted) by Newton from seed z0."""
    s = target.real
    if tol is None:
        tol = 1e-13 + 1e-10 * abs(s)
    z = complex(z0)
    for k in range(max_newton):
        try:
            lb = _log_bottcher_coeffs(coeffs, z, expected_arg=target.imag)
        except NonEscapingPointError as exc:
            raise NewtonDivergenceError(
                f"iterate fell into the non-escaping region at step {k}"
            ) from exc
        res = lb.value - target
        # Demanding residuals below the evaluation noise would never converge.
        if abs(res) <= max(tol, 8.0 * lb.noise):
            return z, lb, k
        step = res / lb.deriv
        if not cmath.isfinite(step) or abs(step) > 1e6 * (1.0 + abs(z)):
            raise NewtonDivergenceError(
                f"Newton step exploded at iteration {k}"
            )
        limit = 0.5 * (1.0 + abs(z))
        if abs(step) > limit:
            step *= limit / abs(step)
        z = z - step
    raise NewtonDivergenceError(
        f"no convergence to |residual| <= {tol:g} in {max_newton} steps"
    )


def _seed_potential(f: MonicPolynomial) -> float:
    """Potential level where e^{s + i theta} is a safe Newton seed."""
    bound = 1.0 + sum(abs(a) for a in f.lower_coeffs)
    return math.log(max(100.0, 10.0 * bound))


def _descend_fixed_angle(
    coeffs: np.ndarray,
    lifted_angle: float,
    s_from: float,
    s_to: float,
    z_seed: complex,
    ratio: float = 0.7,
) -> tuple[complex, LogBottcher]:
    """Walk a fixed-argument line of log psi from s_from down to s_to.

    Each decrement is capped at 0.4 in potential so the previous point stays
    inside the Newton basin of the next target.
    """
    s = s_from
    z = z_seed
    lb = None
    while s > s_to:
        s = max(s_to, s * ratio, s - 0.4)
        z, lb, _ = _newton_log_psi(coeffs, complex(s, lifted_angle), z)
    if lb is None:
        z, lb, _ = _newton_log_psi(coeffs, complex(s_to, lifted_angle), z)
    return z, lb


@dataclass(frozen=True)
class EquipotentialSample:
    angle_index: int
    point: complex
    green_residual: float


def equipotential(
    f: MonicPolynomial, r: float, n_samples: int
) -> list[EquipotentialSample]:
    """Sample the level curve {G = r} at n_samples equally spaced external
    angles.  The level must lie strictly above every critical value rate."""
    if n_samples < 4:
        raise ValueError("need at least 4 samples")
    if r <= 0:
        raise LevelBelowCriticalError("potential level must be positive")
    top_rate = max_critical_rate(f)
    if r <= top_rate:
        raise LevelBelowCriticalError(
            f"level {r:g} does not exceed the critical value rate {top_rate:g}"
        )
    coeffs = f.coeffs_descending()
    s_top = max(_seed_potential(f), r)
    out = []
    for k in range(n_samples):
        angle = 2.0 * math.pi * k / n_samples
        seed = cmath.exp(complex(s_top, angle))
        z, lb = _descend_fixed_angle(coeffs, angle, s_top, r, seed)
        out.append(EquipotentialSample(k, z, abs(lb.value.real - r)))
    return out
