"""Parameter-space solver: polynomials realizing a critical portrait.

A critical portrait with blocks Theta_1..Theta_m (multiplicities
m_j = |Theta_j| - 1) and a potential r > 0 pin down a unique monic centered
polynomial whose critical points all escape, with every critical value at
potential r, and whose external rays at the block angles crash into the
corresponding critical points.  The solver treats the critical points and
the constant coefficient as unknowns, enforces centering linearly, and
applies Newton's method to the lifted log-Böttcher values of the critical
values, with an exact forward-mode Jacobian propagated along the escape
orbits.  Parameter rays are then traced by continuation in r, and their
landing behavior as r -> 0 is probed with extrapolation diagnostics.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .angles import Angle, CriticalPortrait, PortraitBlock, validate_portrait
from .errors import (
    AngleResolutionError,
    BranchAmbiguityError,
    ContinuationStallError,
    DomainError,
    MultiplicityCollisionError,
    NewtonDivergenceError,
    NonEscapingPointError,
    NotInShiftLocusError,
)
from .poly import MonicPolynomial, _horner, critical_points
from .potential import (
    _log_bottcher_coeffs,
    _newton_log_psi,
    _seed_potential,
    green,
)
from .rays import Bifurcated, _iterated_aitken, trace_ray

TOP_POTENTIAL = 5.0  # above this the asymptotic seed is inside Newton's basin


@dataclass(frozen=True)
class ParamRayPoint:
    """One polynomial on a parameter ray: the portrait at potential r."""

    r: float
    poly: MonicPolynomial
    residual: float
    newton_steps: int
    portrait: CriticalPortrait
    crit_points: tuple[complex, ...]  # one per block, in block order
    crit_values: tuple[complex, ...]


@dataclass(frozen=True)
class LandingDiagnostics:
    """Outcome of a landing probe.

    ``verdict`` is "landed" when the coefficient increments along the final
    stretch of the schedule stayed safely geometric, else "inconclusive";
    ``extrapolated_limit`` is the accelerated coefficient-vector limit and is
    meaningful in both cases.
    """

    verdict: str
    r_schedule: tuple[float, ...]
    limits: tuple[MonicPolynomial, ...]
    cauchy_increments: tuple[float, ...]
    extrapolated_limit: MonicPolynomial
    decay_ratio: float
    note: str
    final: ParamRayPoint


def _portrait_data(portrait: CriticalPortrait):
    d = portrait.degree
    mults = tuple(len(b) - 1 for b in portrait.blocks)
    target_args = tuple(
        2.0 * math.pi * float(b.min_angle.times(d)) for b in portrait.blocks
    )
    return d, mults, target_args


def _synthetic_div(coeffs: np.ndarray, root: complex) -> np.ndarray:
    """Quotient of a descending-coefficient polynomial by (z - root)."""
    out = np.empty(len(coeffs) - 1, dtype=complex)
    acc = 0j
    for i in range(len(coeffs) - 1):
        acc = coeffs[i] + root * acc
        out[i] = acc
    return out


def _config_coeffs(cvec, mults, a0: complex, d: int):
    """Monic polynomial with critical points cvec (given multiplicities)
    and constant term a0, plus the product P = prod (z-c_j)^{m_j}."""
    prod = np.array([1.0 + 0j])
    for c, m in zip(cvec, mults):
        for _ in range(m):
            prod = np.convolve(prod, np.array([1.0, -c], dtype=complex))
    coeffs = np.empty(d + 1, dtype=complex)
    for i in range(d):
        coeffs[i] = d * prod[i] / (d - i)
    coeffs[d] = a0
    return coeffs, prod


def _coeff_tangents(prod, cvec, mults, d: int) -> list[np.ndarray]:
    """d(coeffs)/d(c_k) for each critical point, then d(coeffs)/d(a0)."""
    out = []
    for k, (c, m) in enumerate(zip(cvec, mults)):
        quot = _synthetic_div(prod, c)
        dcoef = np.zeros(d + 1, dtype=complex)
        for i in range(d - 1):
            dcoef[i + 1] = -d * m * quot[i] / (d - 1 - i)
        out.append(dcoef)
    da0 = np.zeros(d + 1, dtype=complex)
    da0[d] = 1.0
    out.append(da0)
    return out


def _newton_portrait(
    portrait: CriticalPortrait,
    r: float,
    cvec0,
    a00: complex,
    max_iter: int = 60,
) -> ParamRayPoint:
    d, mults, target_args = _portrait_data(portrait)
    m = len(mults)
    p = np.array(list(cvec0) + [a00], dtype=complex)
    prev = None
    backtracks = 0

    for step in range(max_iter):
        scale = 1.0 + max(abs(x) for x in p)
        if m > 1:
            for i in range(m):
                for j in range(i + 1, m):
                    if abs(p[i] - p[j]) < 1e-10 * scale:
                        raise MultiplicityCollisionError(
                            f"critical points {i} and {j} collided"
                        )
        coeffs, prod = _config_coeffs(p[:m], mults, p[m], d)
        tangents = _coeff_tangents(prod, p[:m], mults, d)

        F = np.zeros(m + 1, dtype=complex)
        J = np.zeros((m + 1, m + 1), dtype=complex)
        F[0] = sum(mults[k] * p[k] for k in range(m))
        J[0, :m] = mults
        noise = 0.0
        try:
            for j in range(m):
                vj = _horner(coeffs, p[j])
                seed = [_horner(tangents[k], p[j]) for k in range(m + 1)]
                lb = _log_bottcher_coeffs(
                    coeffs,
                    vj,
                    expected_arg=target_args[j],
                    tangent_seed=seed,
                    coeff_tangents=tangents,
                )
                F[j + 1] = lb.value - complex(r, target_args[j])
                J[j + 1, :] = lb.param_deriv
                noise = max(noise, lb.noise)
        except (NonEscapingPointError, BranchAmbiguityError) as exc:
            if prev is None:
                raise NewtonDivergenceError(
                    f"seed configuration is not escaping: {exc}",
                    last_iterate=tuple(p),
                ) from exc
            backtracks += 1
            if backtracks > 12:
                raise NewtonDivergenceError(
                    "repeated escapes from the escaping region",
                    last_iterate=tuple(p),
                ) from exc
            p = 0.5 * (p + prev)
            continue

        err = float(np.max(np.abs(F)))
        if err <= max(1e-12 * (1.0 + r), 8.0 * noise):
            # Project onto exact centering so the z^(d-1) coefficient,
            # dropped below, really is zero.
            w = np.array(mults, dtype=float)
            cpts = p[:m] - np.dot(w, p[:m]) / w.sum()
            coeffs, _ = _config_coeffs(cpts, mults, p[m], d)
            crit = tuple(complex(x) for x in cpts)
            vals = tuple(complex(_horner(coeffs, c)) for c in crit)
            lower = tuple(complex(x) for x in coeffs[:1:-1])
            poly = MonicPolynomial(d, lower)
            return ParamRayPoint(r, poly, err, step, portrait, crit, vals)

        try:
            delta = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergenceError(
                "singular portrait Jacobian", last_iterate=tuple(p)
            ) from exc
        top = float(np.max(np.abs(delta)))
        limit = 0.5 * scale
        if top > limit:
            delta *= limit / top
        prev = p
        p = p - delta

    raise NewtonDivergenceError(
        f"portrait Newton did not converge at potential {r:g}",
        last_iterate=tuple(p),
    )


def _seed_config(portrait: CriticalPortrait, r: float, picks=None):
    """Asymptotic seed at large r: critical points on the ray bundle at
    potential r/d, centered, with a0 matched to the first critical value."""
    d, mults, _ = _portrait_data(portrait)
    if picks is None:
        picks = [b.min_angle for b in portrait.blocks]
    cvec = np.array(
        [cmath.exp(complex(r / d, 2.0 * math.pi * float(t))) for t in picks],
        dtype=complex,
    )
    w = np.array(mults, dtype=float)
    cvec = cvec - np.dot(w, cvec) / w.sum()
    coeffs0, _ = _config_coeffs(cvec, mults, 0j, d)
    theta0 = portrait.blocks[0].min_angle.times(d)
    w0 = cmath.exp(complex(r, 2.0 * math.pi * float(theta0)))
    a0 = w0 - _horner(coeffs0, cvec[0])
    return cvec, a0


def initial_guess(portrait: CriticalPortrait, r_large: float) -> MonicPolynomial:
    """Newton seed polynomial at a large potential, from the identity
    asymptotics of the Böttcher coordinate: critical points on the ray
    bundle at potential r/d and the constant term matched so the first
    critical value sits at exp(r + 2*pi*i*(image angle))."""
    if r_large < TOP_POTENTIAL:
        raise ValueError(f"initial_guess needs r_large >= {TOP_POTENTIAL}")
    d, mults, _ = _portrait_data(portrait)
    cvec, a0 = _seed_config(portrait, r_large)
    coeffs, _ = _config_coeffs(cvec, mults, a0, d)
    # cvec is centered by construction, so the z^(d-1) slot dropped here
    # holds only rounding residue.
    return MonicPolynomial(d, tuple(complex(x) for x in coeffs[:1:-1]))


def _ascend_ray_angle(f: MonicPolynomial, v: complex, r: float) -> float:
    """External angle (turns) of the dynamic ray through the escaping
    point v at potential r.

    The orbit-direction chain reads the argument directly when every orbit
    point stays clear of the coefficient scale; otherwise the point rides
    up its ray (tangent predictor, potential corrector) and the argument
    is read at the top where the chain is unambiguous.
    """
    coeffs = f.coeffs_descending()
    try:
        lb = _log_bottcher_coeffs(coeffs, v)
        return (lb.value.imag / (2.0 * math.pi)) % 1.0
    except BranchAmbiguityError:
        pass
    s_top = max(_seed_potential(f), r + 0.5)
    lb = _log_bottcher_coeffs(coeffs, v, expected_arg=0.0)
    z = complex(v)
    s = lb.value.real
    while s < s_top:
        s_next = min(s_top, s + 0.4)
        z_pred = z + (s_next - s) / lb.deriv
        z, lb, _ = _newton_log_psi(coeffs, complex(s_next, 0.0), z_pred)
        s = lb.value.real
    top = _log_bottcher_coeffs(coeffs, z)
    return (top.value.imag / (2.0 * math.pi)) % 1.0


def _assign_critical_points(
    f: MonicPolynomial, portrait: CriticalPortrait
) -> tuple[complex, ...]:
    """Order the critical points of f block by block, matching each block's
    multiplicity and image angle against the ray angle through the critical
    value."""
    d, mults, target_args = _portrait_data(portrait)
    pts = critical_points(f).points
    if sorted(p.multiplicity for p in pts) != sorted(mults):
        raise DomainError(
            "guess critical multiplicities do not match the portrait blocks"
        )
    alphas = []
    for p in pts:
        sample = green(f, f(p.location))
        if not sample.escaped or sample.green <= 0.0:
            raise DomainError("guess has a non-escaping critical value")
        alphas.append(_ascend_ray_angle(f, f(p.location), sample.green))

    def circ(a: float, b: float) -> float:
        return abs((a - b + 0.5) % 1.0 - 0.5)

    targets = [t / (2.0 * math.pi) for t in target_args]
    best = None
    for perm in itertools.permutations(range(len(pts))):
        if any(pts[perm[j]].multiplicity != mults[j] for j in range(len(mults))):
            continue
        cost = sum(circ(alphas[perm[j]], targets[j]) for j in range(len(mults)))
        if best is None or cost < best[0]:
            best = (cost, perm)
    assert best is not None
    return tuple(pts[best[1][j]].location for j in range(len(mults)))


def solve_f_r(
    portrait: CriticalPortrait, r: float, guess=None, witness=None
) -> ParamRayPoint:
    """Polynomial with the given critical portrait and all critical values
    at potential r.

    ``witness`` carries branch data from a previous solve (a ParamRayPoint
    or a (critical points, a0) pair) and takes precedence over ``guess``,
    a polynomial whose critical points seed the solve.  With neither, the
    solver seeds itself at a large potential and continues down to r.
    """
    if r <= 0.0:
        raise DomainError("potential must be positive")
    if not validate_portrait(portrait).valid:
        raise DomainError("portrait fails its admissibility conditions")
    if witness is not None:
        if isinstance(witness, ParamRayPoint):
            return _newton_portrait(
                portrait, r, witness.crit_points, witness.poly.lower_coeffs[0]
            )
        cvec, a0 = witness
        return _newton_portrait(portrait, r, cvec, a0)
    if guess is not None:
        if isinstance(guess, ParamRayPoint):
            return _newton_portrait(
                portrait, r, guess.crit_points, guess.poly.lower_coeffs[0]
            )
        pts = _assign_critical_points(guess, portrait)
        return _newton_portrait(portrait, r, pts, guess.lower_coeffs[0])
    if r >= TOP_POTENTIAL:
        return _solve_from_seed(portrait, r)
    path = continue_param_ray(portrait, TOP_POTENTIAL, r)
    return path[-1]


def _solve_from_seed(portrait: CriticalPortrait, r: float) -> ParamRayPoint:
    """Solve at large r from the asymptotic seed, searching the block-angle
    choices of the seed until the recovered portrait matches."""
    combos = itertools.islice(
        itertools.product(*(tuple(b) for b in portrait.blocks)), 64
    )
    last_exc: Exception | None = None
    for picks in combos:
        try:
            cvec, a0 = _seed_config(portrait, r, picks)
            sol = _newton_portrait(portrait, r, cvec, a0)
        except (NewtonDivergenceError, MultiplicityCollisionError) as exc:
            last_exc = exc
            continue
        try:
            if portrait_of(sol.poly, r) == portrait:
                return sol
        except (AngleResolutionError, NotInShiftLocusError) as exc:
            last_exc = exc
            continue
    raise NewtonDivergenceError(
        f"no asymptotic seed converged to the requested portrait: {last_exc}"
    )


def _walk_ray(
    portrait: CriticalPortrait,
    r_from: float,
    r_to: float,
    rho: float,
    seed: ParamRayPoint | None,
    max_steps: int,
):
    """Continuation core: geometric schedule with on-failure refinement.

    Returns (samples, step_rhos, stall_note); step_rhos[k] is the ratio that
    produced samples[k+1], so diagnostics can tell refined stretches apart.
    """
    if not (r_from > r_to > 0.0):
        raise DomainError("need r_from > r_to > 0")
    if seed is not None and abs(seed.r - r_from) > 1e-9 * max(1.0, r_from):
        seed = None
    sol = seed if seed is not None else solve_f_r(portrait, r_from)
    samples = [sol]
    step_rhos: list[float] = []
    r = sol.r
    current = rho
    streak = 0
    note = ""
    for _ in range(max_steps):
        if r <= r_to * (1.0 + 1e-12):
            break
        r_next = max(r_to, r * current)
        try:
            nxt = _newton_portrait(
                portrait, r_next, sol.crit_points, sol.poly.lower_coeffs[0]
            )
        except (NewtonDivergenceError, MultiplicityCollisionError) as exc:
            if 1.0 - current < 1e-8:
                note = f"continuation stalled at r={r:.6e}: {exc}"
                break
            current = math.sqrt(current)
            streak = 0
            continue
        sol = nxt
        r = r_next
        samples.append(sol)
        step_rhos.append(current)
        streak += 1
        if streak >= 5 and current < rho:
            current = max(rho, current * current)
            streak = 0
    else:
        note = f"step budget exhausted at r={r:.6e}"
    return samples, step_rhos, note


def continue_param_ray(
    portrait: CriticalPortrait,
    r_from: float,
    r_to: float,
    rho: float = 0.85,
    seed: ParamRayPoint | None = None,
    max_steps: int = 100_000,
) -> list[ParamRayPoint]:
    """Walk the parameter ray from potential r_from down to r_to on the
    geometric schedule r_k = r_from * rho^k, reseeding Newton from each
    accepted sample; the ratio refines toward 1 on failure and relaxes
    back after a streak of successes."""
    samples, _, note = _walk_ray(portrait, r_from, r_to, rho, seed, max_steps)
    if note:
        raise ContinuationStallError(note, last_good=samples[-1], samples=samples)
    return samples


def _algebraic_limit(
    portrait: CriticalPortrait,
    samples: list[ParamRayPoint],
    g: float = 1.4,
    l_floor: float = 1.0,
) -> MonicPolynomial | None:
    """Limit of a sub-geometrically converging parameter ray.

    A parabolic-type approach moves like a power series in 1/ln(1/r), so
    fresh solves at nodes where ln(1/r) grows geometrically turn the
    coefficient sequences geometric, where repeated Aitken elimination
    applies.  Returns None when the probed range is too shallow."""
    l_max = math.log(1.0 / samples[-1].r)
    if l_max <= l_floor * g * g:
        return None
    nodes = []
    level = l_max
    while level >= l_floor:
        nodes.append(level)
        level /= g
    nodes.reverse()
    if len(nodes) < 6:
        return None

    pts: list[np.ndarray] = []
    prev: ParamRayPoint | None = None
    for level in nodes:
        r = math.exp(-level)
        wit = min(samples, key=lambda s: abs(math.log(s.r / r)))
        if prev is not None and abs(math.log(prev.r / r)) < abs(
            math.log(wit.r / r)
        ):
            wit = prev
        try:
            sol = _newton_portrait(
                portrait, r, wit.crit_points, wit.poly.lower_coeffs[0]
            )
        except (NewtonDivergenceError, MultiplicityCollisionError):
            break
        pts.append(np.array(sol.poly.lower_coeffs, dtype=complex))
        prev = sol
    if len(pts) < 6:
        return None
    d = portrait.degree
    limit_coeffs = []
    for i in range(d - 1):
        est, _ = _iterated_aitken([c[i] for c in pts], rounds=3)
        limit_coeffs.append(est)
    return MonicPolynomial(d, tuple(limit_coeffs))


def landing_probe(
    portrait: CriticalPortrait,
    r_min: float = 1e-6,
    tol: float = 0.95,
    r_start: float = 1.0,
    rho: float = 0.85,
    seed: ParamRayPoint | None = None,
) -> LandingDiagnostics:
    """Drive the parameter ray toward r = 0 and diagnose its landing.

    Coefficient increments along a geometric schedule decay geometrically
    when the ray converges at a uniform rate; the worst of the final five
    increment ratios must stay below tol for a "landed" verdict, so a ratio
    creeping toward 1 (sub-geometric approach) is flagged inconclusive.
    The extrapolated limit comes from repeated Aitken acceleration of the
    coefficient sequences, which is meaningful in both regimes.
    """
    if not (r_start > r_min > 0.0):
        raise DomainError("need r_start > r_min > 0")
    if not (0.0 < tol < 1.0):
        raise DomainError("tol must sit in (0, 1)")
    samples, step_rhos, note = _walk_ray(
        portrait, r_start, r_min, rho, seed, 100_000
    )

    schedule = tuple(s.r for s in samples)
    polys = tuple(s.poly for s in samples)
    coeff_seq = [np.array(q.lower_coeffs, dtype=complex) for q in polys]
    incs = [
        float(np.max(np.abs(b - a)))
        for a, b in zip(coeff_seq, coeff_seq[1:])
    ]

    if len(samples) < 8:
        return LandingDiagnostics(
            "inconclusive",
            schedule,
            polys,
            tuple(incs),
            polys[-1],
            1.0,
            note or "too few continuation samples",
            samples[-1],
        )

    # Increment ratios are only comparable where the schedule ratio held
    # constant; refined stretches are skipped.
    ratios = [
        b / a
        for a, b, ra, rb in zip(incs, incs[1:], step_rhos, step_rhos[1:])
        if a > 1e-14 and ra == rb
    ]
    decay = max(ratios[-5:]) if len(ratios) >= 5 else 1.0

    d = portrait.degree
    tail = coeff_seq[-16:]
    limit_coeffs = []
    for i in range(d - 1):
        est, _ = _iterated_aitken([c[i] for c in tail])
        limit_coeffs.append(est)
    extrapolated = MonicPolynomial(d, tuple(limit_coeffs))

    landed = bool(decay <= tol) and not note
    if incs[-1] <= 1e-12:
        landed = True
    if not landed and not note:
        refined = _algebraic_limit(portrait, samples)
        if refined is not None:
            extrapolated = refined
    return LandingDiagnostics(
        "landed" if landed else "inconclusive",
        schedule,
        polys,
        tuple(incs),
        extrapolated,
        float(decay),
        note,
        samples[-1],
    )


def portrait_of(
    f: MonicPolynomial, r_hint: float | None = None, snap_den: int = 10**6
) -> CriticalPortrait:
    """Recover the critical portrait of a polynomial whose critical values
    all escape at one common potential.

    For each critical point, the angle of the ray through its critical
    value is read from the lifted argument, and the d preimage angles are
    traced back down; exactly multiplicity+1 of them must crash into the
    critical point.  Recovered angles snap to rationals within 1e-7.
    """
    d = f.degree
    pts = critical_points(f).points
    rates = []
    for p in pts:
        sample = green(f, f(p.location))
        if not sample.escaped or sample.green <= 0.0:
            raise NotInShiftLocusError(
                f"critical value {f(p.location)} does not escape"
            )
        rates.append(sample.green)
    r = sum(rates) / len(rates)
    if max(rates) - min(rates) > 1e-6 * max(r, 1.0):
        raise NotInShiftLocusError(
            "critical values escape at different potentials"
        )
    if r_hint is not None and abs(r - r_hint) > 1e-6 * max(r_hint, 1.0):
        raise NotInShiftLocusError(
            f"critical values escape at potential {r:g}, not the hinted "
            f"{r_hint:g}"
        )
    s_c = r / d

    blocks = []
    for p in pts:
        try:
            alpha = _ascend_ray_angle(f, f(p.location), r)
        except (BranchAmbiguityError, NewtonDivergenceError) as exc:
            raise AngleResolutionError(
                f"could not resolve the critical-value ray argument: {exc}"
            ) from exc
        found = []
        for k in range(d):
            theta = ((alpha + k) / d) % 1.0
            path = trace_ray(f, theta, s_end=0.5 * s_c)
            t = path.terminal
            if (
                isinstance(t, Bifurcated)
                and abs(t.point - p.location) <= 1e-6 * (1.0 + abs(p.location))
                and abs(t.r_f - s_c) <= 1e-6 * max(s_c, 1.0)
            ):
                found.append(theta)
        if len(found) != p.multiplicity + 1:
            raise AngleResolutionError(
                f"found {len(found)} rays at a critical point of "
                f"multiplicity {p.multiplicity}",
                raw_angles=tuple(found),
            )
        blocks.append(found)

    snapped = []
    for found in blocks:
        angles = []
        for t in found:
            fr = Fraction(t).limit_denominator(snap_den)
            if abs(float(fr) - t) > 1e-7:
                raise AngleResolutionError(
                    f"ray angle {t!r} does not snap to a small rational",
                    raw_angles=tuple(found),
                )
            angles.append(Angle(fr.numerator, fr.denominator))
        snapped.append(PortraitBlock(angles))
    portrait = CriticalPortrait(d, snapped)
    if not validate_portrait(portrait).valid:
        raise AngleResolutionError(
            "snapped angles violate the portrait conditions",
            raw_angles=tuple(float(a) for a in portrait.all_angles()),
        )
    return portrait
