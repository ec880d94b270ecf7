"""
Frequency-domain sideband response of the driven cavity.

The probe beats against the pump at detuning delta and drives a pair of
sidebands in the cavity field plus a collective-mode oscillation. Matching
coefficients of e^{-i delta t} and e^{+i delta t} in the linearized equations
of motion gives a 3-unknown complex linear system for
(q_minus, c_minus, conj(c_plus)) which is solved numerically here. A second,
closed-form evaluation path ("printed" mode) is kept for comparison; the two
do not agree in general and their discrepancy is reported, not hidden.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateResponseError, InvalidParameterError,
                     PhaseUndefinedError, PoleError)
from .model import EffectiveParams

DEFAULT_DELAY_STEP = 1e-4  # central-difference step for the group delay


@dataclass(frozen=True)
class SidebandSolution:
    """Steady oscillating amplitudes at one probe detuning."""

    c_s: complex        # steady cavity field
    c_minus: complex    # probe-sideband cavity amplitude
    c_plus: complex     # counter-sideband cavity amplitude
    q_minus: complex    # collective-mode amplitude at +delta
    q_plus: complex     # collective-mode amplitude at -delta
    delta: float        # probe-pump detuning, units of omega_b


@dataclass(frozen=True)
class ProbeResponse:
    """Per-detuning observables derived from the sideband solution."""

    delta_bar: float    # delta - omega_b, units of omega_b
    mu: float           # in-phase (absorptive) output quadrature
    nu_out: float       # out-of-phase (dispersive) output quadrature
    t_p: complex        # complex transmission
    phase: float        # arg(t_p), radians
    tau_g: float        # group delay, seconds


def steady_state_cavity(p: EffectiveParams) -> complex:
    """Steady cavity amplitude Omega_l / (kappa + i Delta)."""
    if p.kappa <= 0:
        raise InvalidParameterError("kappa must be > 0")
    return p.Omega_l / (p.kappa + 1j * p.Delta)


def solve_sidebands(p: EffectiveParams, delta: float,
                    include_counter_sideband: bool = True) -> SidebandSolution:
    """Solve the coupled sideband system at probe detuning delta.

    Rows: the collective-mode equation
    (omega_b^2 - delta^2 - i delta gamma_b) q_- = -g (U_eff + nu)(c_- + conj(c_+)),
    the probe-sideband cavity equation
    (kappa + i(Delta - delta)) c_- = -i g q_- + eps_p,
    and the counter-sideband equation
    (kappa - i(Delta + delta)) conj(c_+) = +i g q_-.

    The counter sideband is kept by default; ``include_counter_sideband=False``
    drops its back-action for comparison with the closed form that omits it.
    The system is always solved as an explicit complex linear solve.
    """
    if p.kappa <= 0:
        raise InvalidParameterError("kappa must be > 0")
    G = p.g * (p.U_eff + p.nu)
    wb2 = p.omega_b ** 2
    mech = wb2 - delta ** 2 - 1j * delta * p.gamma_b

    if include_counter_sideband:
        A = np.array([
            [mech, G, G],
            [1j * p.g, p.kappa + 1j * (p.Delta - delta), 0.0],
            [-1j * p.g, 0.0, p.kappa - 1j * (p.Delta + delta)],
        ], dtype=complex)
        b = np.array([0.0, p.eps_p, 0.0], dtype=complex)
    else:
        A = np.array([
            [mech, G],
            [1j * p.g, p.kappa + 1j * (p.Delta - delta)],
        ], dtype=complex)
        b = np.array([0.0, p.eps_p], dtype=complex)

    # Hadamard bound as the scale for the singularity test.
    scale = float(np.prod(np.linalg.norm(A, axis=1)))
    det = np.linalg.det(A)
    if scale == 0.0 or abs(det) < 1e-14 * scale:
        raise DegenerateResponseError(
            "sideband system singular at delta=%g (|det|=%g)"
            % (delta, abs(det)))
    x = np.linalg.solve(A, b)

    q_minus = complex(x[0])
    c_minus = complex(x[1])
    d = complex(x[2]) if include_counter_sideband else 0.0 + 0.0j
    return SidebandSolution(
        c_s=steady_state_cavity(p),
        c_minus=c_minus,
        c_plus=d.conjugate(),
        q_minus=q_minus,
        q_plus=q_minus.conjugate(),
        delta=delta,
    )


def c_minus_printed(p: EffectiveParams, delta: float) -> complex:
    """Closed-form probe-sideband amplitude, reproduced verbatim.

    Returns
    {[kappa + i(Delta-delta)](delta^2 - i delta gamma_b - omega_b^2)
     + i g (nu + U_eff)}
    /
    {[kappa^2 + Delta^2 - delta(delta + i kappa)]
     (delta^2 - i delta gamma_b - omega_b^2) + 2 Delta g (nu + U_eff)}

    evaluated in omega_b = 1 units and treated as already normalized by the
    probe amplitude. The expression is kept exactly in this form, including
    its internal inconsistencies, so deviations from the solver are visible
    rather than silently patched.
    """
    Dm = delta ** 2 - 1j * delta * p.gamma_b - p.omega_b ** 2
    num = (p.kappa + 1j * (p.Delta - delta)) * Dm \
        + 1j * p.g * (p.nu + p.U_eff)
    term_a = (p.kappa ** 2 + p.Delta ** 2 - delta * (delta + 1j * p.kappa)) * Dm
    term_b = 2.0 * p.Delta * p.g * (p.nu + p.U_eff)
    den = term_a + term_b
    scale = max(abs(term_a), abs(term_b), 1e-300)
    if abs(den) < 1e-14 * scale:
        raise PoleError(delta)
    return num / den


def output_field(p: EffectiveParams, delta: float, mode: str = "solver",
                 include_counter_sideband: bool = True) -> complex:
    """Normalized output field sqrt(2 kappa) c_- / eps_p at one detuning."""
    if mode == "solver":
        if p.eps_p <= 0:
            raise InvalidParameterError(
                "eps_p must be > 0 to normalize the output field")
        sol = solve_sidebands(p, delta, include_counter_sideband)
        return math.sqrt(2.0 * p.kappa) * sol.c_minus / p.eps_p
    if mode == "printed":
        return math.sqrt(2.0 * p.kappa) * c_minus_printed(p, delta)
    raise InvalidParameterError("mode must be 'solver' or 'printed'")


def output_quadratures(sol: SidebandSolution, p: EffectiveParams):
    """In-phase and out-of-phase output quadratures (mu, nu_out)."""
    if p.eps_p <= 0:
        raise InvalidParameterError(
            "eps_p must be > 0 to normalize the output field")
    e = math.sqrt(2.0 * p.kappa) * sol.c_minus / p.eps_p
    return e.real, e.imag


def transmission(sol: SidebandSolution, p: EffectiveParams) -> complex:
    """Complex transmission t_p = 1 - sqrt(2 kappa) c_- / eps_p."""
    if p.eps_p <= 0:
        raise InvalidParameterError(
            "eps_p must be > 0 to normalize the output field")
    return 1.0 - math.sqrt(2.0 * p.kappa) * sol.c_minus / p.eps_p


def transmission_at(p: EffectiveParams, delta: float, mode: str = "solver",
                    include_counter_sideband: bool = True) -> complex:
    """Transmission evaluated directly from parameters and detuning."""
    return 1.0 - output_field(p, delta, mode, include_counter_sideband)


def phase_profile(t_p: np.ndarray) -> np.ndarray:
    """Unwrapped transmission phase over an ordered spectrum.

    Consecutive samples are shifted by multiples of 2 pi so no jump exceeds
    pi. Raises if any transmission magnitude is too small to carry a phase.
    """
    t_p = np.asarray(t_p, dtype=complex)
    mags = np.abs(t_p)
    bad = np.nonzero(mags < 1e-14)[0]
    if bad.size:
        raise PhaseUndefinedError(
            "|t_p| < 1e-14 at grid index %d" % int(bad[0]))
    return np.unwrap(np.angle(t_p))


def _wrap_angle(a: float) -> float:
    """Wrap an angle difference into (-pi, pi]."""
    return -((-a + math.pi) % (2.0 * math.pi) - math.pi)


def group_delay(p: EffectiveParams, delta: float,
                h: float = DEFAULT_DELAY_STEP, mode: str = "solver",
                include_counter_sideband: bool = True) -> float:
    """Group delay d(arg t_p)/d(omega_p) in seconds.

    Central difference with step h (units of omega_b) and local unwrapping,
    then converted to seconds through the SI mode frequency.
    """
    return group_delay_norm(p, delta, h, mode,
                            include_counter_sideband) / p.omega_b_si


def group_delay_norm(p: EffectiveParams, delta: float,
                     h: float = DEFAULT_DELAY_STEP, mode: str = "solver",
                     include_counter_sideband: bool = True) -> float:
    """Group delay in units of 1/omega_b (dimensionless grid units)."""
    if h <= 0:
        raise InvalidParameterError("step h must be > 0")
    t_lo = transmission_at(p, delta - h, mode, include_counter_sideband)
    t_hi = transmission_at(p, delta + h, mode, include_counter_sideband)
    if abs(t_lo) < 1e-14 or abs(t_hi) < 1e-14:
        raise PhaseUndefinedError(
            "|t_p| < 1e-14 inside the difference stencil at delta=%g" % delta)
    dphi = _wrap_angle(cmath.phase(t_hi) - cmath.phase(t_lo))
    return dphi / (2.0 * h)


def stability_check(p: EffectiveParams):
    """Eigenvalue test of the homogeneous dynamics.

    Assembles the linear system for (q, qdot, dc, conj(dc)) and returns
    (stable, eigenvalues) where stable is True iff every eigenvalue has a
    negative real part.
    """
    G = p.g * (p.U_eff + p.nu)
    wb2 = p.omega_b ** 2
    M = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-wb2, -p.gamma_b, -G, -G],
        [-1j * p.g, 0.0, -(p.kappa + 1j * p.Delta), 0.0],
        [1j * p.g, 0.0, 0.0, -(p.kappa - 1j * p.Delta)],
    ], dtype=complex)
    eig = np.linalg.eigvals(M)
    return bool(np.all(eig.real < 0.0)), eig


def probe_response(p: EffectiveParams, delta: float, mode: str = "solver",
                   include_counter_sideband: bool = True,
                   h: float = DEFAULT_DELAY_STEP) -> ProbeResponse:
    """All per-detuning observables bundled together."""
    e = output_field(p, delta, mode, include_counter_sideband)
    t_p = 1.0 - e
    return ProbeResponse(
        delta_bar=delta - p.omega_b,
        mu=e.real,
        nu_out=e.imag,
        t_p=t_p,
        phase=cmath.phase(t_p),
        tau_g=group_delay(p, delta, h, mode, include_counter_sideband),
    )


def spectrum(p: EffectiveParams, deltas, mode: str = "solver",
             include_counter_sideband: bool = True,
             h: float = DEFAULT_DELAY_STEP):
    """Evaluate the full observable set over a detuning grid.

    Returns a dict of arrays keyed by the output-table column names. Grid
    points that hit a pole of the closed form are recorded as NaN gaps.
    The phase column is unwrapped across the grid (gaps break the unwrap
    locally, which is the honest thing to do around a pole).
    """
    deltas = np.asarray(deltas, dtype=float)
    n = deltas.size
    e_out = np.full(n, np.nan + 0j, dtype=complex)
    tau = np.full(n, np.nan)
    for i, d in enumerate(deltas):
        try:
            e_out[i] = output_field(p, float(d), mode,
                                    include_counter_sideband)
            tau[i] = group_delay(p, float(d), h, mode,
                                 include_counter_sideband)
        except PoleError:
            continue
    t_p = 1.0 - e_out
    ok = ~np.isnan(e_out.real)
    phase = np.full(n, np.nan)
    if np.any(ok):
        phase[ok] = np.unwrap(np.angle(t_p[ok]))
    return {
        "delta_norm": deltas,
        "mu": e_out.real,
        "nu_out": e_out.imag,
        "t_re": t_p.real,
        "t_im": t_p.imag,
        "t_abs2": np.abs(t_p) ** 2,
        "phase_rad": phase,
        "tau_g_us": tau * 1e6,
    }
