"""
Brute-force time-domain oracle.

Integrates the linearized equations of motion with a fixed-step RK4 scheme
and extracts the steady probe-beat response by demodulation. Exists to
validate the frequency-domain sideband solver: the two share the equations
of motion but nothing else, so agreement is meaningful.

The cavity variable integrated here is the fluctuation about the steady
field, so the constant pump drive is excluded from its equation (including
it would double-count the steady field). An optional full-field mode
integrates the total field with the pump term and subtracts the steady
amplitude before demodulation; both paths agree identically.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (DivergenceError, InvalidParameterError,
                     InvalidWindowError)
from .model import EffectiveParams
from .response import solve_sidebands, stability_check


@dataclass(frozen=True)
class TrajectoryConfig:
    """Integration controls, all in omega_b = 1 units."""

    dt: float             # integrator step
    t_transient: float    # settle time before the measurement window
    n_periods: int        # beat periods used for demodulation
    state0: tuple = (0.0, 0.0, 0.0 + 0.0j)  # (q, qdot, dc)

    def validate(self):
        if self.dt <= 0:
            raise InvalidParameterError("dt must be > 0")
        if self.n_periods < 5:
            raise InvalidParameterError("n_periods must be >= 5")
        if self.t_transient < 0:
            raise InvalidParameterError("t_transient must be >= 0")


def default_config(p: EffectiveParams, delta: float,
                   n_periods: int = 64) -> TrajectoryConfig:
    """Step and window sizes tied to the fastest and slowest rates.

    The step resolves the cavity decay, the mode period and the detuning
    rotation; the transient is ten times the slowest decay, with the
    mechanical rate floored at kappa/100 so a nearly undamped mode does not
    demand absurd run times (its residual ring sits at the mode frequency
    and averages out of the beat-frequency demodulation over whole periods).
    Exactly at delta = omega_b that separation fails, so the window is
    lengthened there.
    """
    dt = min(0.01 / p.kappa,
             0.01 * 2.0 * math.pi / p.omega_b,
             0.01 / max(abs(p.Delta), 1e-12))
    # Snap the step so the beat period is an integer number of steps; the
    # demodulation window then covers whole periods exactly.
    period = 2.0 * math.pi / abs(delta)
    steps_per_period = int(math.ceil(period / dt))
    dt = period / steps_per_period
    gamma_eff = max(p.gamma_b, p.kappa / 100.0)
    t_transient = 10.0 / min(p.kappa, gamma_eff)
    if abs(delta - p.omega_b) < 1e-9:
        n_periods = max(n_periods, 50)
    return TrajectoryConfig(dt=dt, t_transient=t_transient,
                            n_periods=n_periods)


@njit(cache=True)
def _rk4_run(q, qdot, cr, ci, kappa, Delta, gamma_b, wb2, g, force_coef,
             eps, delta, pump, cs_re, cs_im, dt, n_transient, n_window):
    """Fixed-step RK4 over transient + window; stores only the window.

    Returns (q_win, qdot_win, cr_win, ci_win, diverged_step). The state is
    (q, qdot, cr, ci) with the cavity force taken on the fluctuation
    (cr - cs_re); cs is zero unless the caller integrates the full field.
    diverged_step is -1 when the run stays bounded.
    """
    n_total = n_transient + n_window
    q_win = np.empty(n_window + 1)
    qd_win = np.empty(n_window + 1)
    cr_win = np.empty(n_window + 1)
    ci_win = np.empty(n_window + 1)

    guard = 1e9 * max(1.0, abs(q) + abs(qdot) + abs(cr) + abs(ci)
                      + eps / kappa + pump / kappa)

    t = 0.0
    for step in range(n_total + 1):
        if step >= n_transient:
            k = step - n_transient
            q_win[k] = q
            qd_win[k] = qdot
            cr_win[k] = cr
            ci_win[k] = ci
        if step == n_total:
            break
        # One RK4 step of:
        #   q'    = qdot
        #   qdot' = -wb2 q - gamma_b qdot - force_coef * 2 (cr - cs_re)
        #   cr'   = -kappa cr + Delta ci + pump + eps cos(delta t)
        #   ci'   = -Delta cr - kappa ci - g q - eps sin(delta t)
        th = t + 0.5 * dt
        tf = t + dt

        a0 = qdot
        a1 = -wb2 * q - gamma_b * qdot - 2.0 * force_coef * (cr - cs_re)
        a2 = -kappa * cr + Delta * ci + pump + eps * math.cos(delta * t)
        a3 = -Delta * cr - kappa * ci - g * q - eps * math.sin(delta * t)

        s0 = q + 0.5 * dt * a0
        s1 = qdot + 0.5 * dt * a1
        s2 = cr + 0.5 * dt * a2
        s3 = ci + 0.5 * dt * a3
        b0 = s1
        b1 = -wb2 * s0 - gamma_b * s1 - 2.0 * force_coef * (s2 - cs_re)
        b2 = -kappa * s2 + Delta * s3 + pump + eps * math.cos(delta * th)
        b3 = -Delta * s2 - kappa * s3 - g * s0 - eps * math.sin(delta * th)

        s0 = q + 0.5 * dt * b0
        s1 = qdot + 0.5 * dt * b1
        s2 = cr + 0.5 * dt * b2
        s3 = ci + 0.5 * dt * b3
        c0 = s1
        c1 = -wb2 * s0 - gamma_b * s1 - 2.0 * force_coef * (s2 - cs_re)
        c2 = -kappa * s2 + Delta * s3 + pump + eps * math.cos(delta * th)
        c3 = -Delta * s2 - kappa * s3 - g * s0 - eps * math.sin(delta * th)

        s0 = q + dt * c0
        s1 = qdot + dt * c1
        s2 = cr + dt * c2
        s3 = ci + dt * c3
        d0 = s1
        d1 = -wb2 * s0 - gamma_b * s1 - 2.0 * force_coef * (s2 - cs_re)
        d2 = -kappa * s2 + Delta * s3 + pump + eps * math.cos(delta * tf)
        d3 = -Delta * s2 - kappa * s3 - g * s0 - eps * math.sin(delta * tf)

        q = q + dt / 6.0 * (a0 + 2.0 * b0 + 2.0 * c0 + d0)
        qdot = qdot + dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        cr = cr + dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        ci = ci + dt / 6.0 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        t += dt
        if abs(q) + abs(qdot) + abs(cr) + abs(ci) > guard:
            return q_win, qd_win, cr_win, ci_win, step
    return q_win, qd_win, cr_win, ci_win, -1


@dataclass(frozen=True)
class Trajectory:
    """Measurement-window slice of an integration run."""

    t: np.ndarray       # absolute times (phase-referenced to drive turn-on)
    q: np.ndarray
    qdot: np.ndarray
    dc: np.ndarray      # complex cavity fluctuation
    delta: float
    n_periods: int


def integrate(p: EffectiveParams, delta: float, cfg: TrajectoryConfig,
              full_field: bool = False) -> Trajectory:
    """RK4 integration; returns the post-transient measurement window.

    The window covers exactly cfg.n_periods beat periods. Raises on
    divergence, naming the offending step.
    """
    cfg.validate()
    period = 2.0 * math.pi / abs(delta) if delta != 0 else math.inf
    if not math.isfinite(period):
        raise InvalidParameterError("delta must be nonzero")
    n_transient = int(math.ceil(cfg.t_transient / cfg.dt))
    n_window = int(round(cfg.n_periods * period / cfg.dt))
    if n_window < 8:
        raise InvalidParameterError("window too short; decrease dt")

    q0, qd0, dc0 = cfg.state0
    dc0 = complex(dc0)
    pump = 0.0
    cs = 0.0 + 0.0j
    if full_field:
        pump = p.Omega_l
        cs = p.Omega_l / (p.kappa + 1j * p.Delta)
        dc0 = dc0 + cs

    q_w, qd_w, cr_w, ci_w, bad = _rk4_run(
        float(q0), float(qd0), dc0.real, dc0.imag,
        p.kappa, p.Delta, p.gamma_b, p.omega_b ** 2, p.g,
        p.g * (p.U_eff + p.nu), p.eps_p, delta, pump, cs.real, cs.imag,
        cfg.dt, n_transient, n_window)
    if bad >= 0:
        raise DivergenceError(bad)

    t = (n_transient + np.arange(n_window + 1)) * cfg.dt
    dc = cr_w + 1j * ci_w
    if full_field:
        dc = dc - cs
    return Trajectory(t=t, q=q_w, qdot=qd_w, dc=dc, delta=delta,
                      n_periods=cfg.n_periods)


def demodulate(traj: Trajectory, delta: float | None = None,
               n_periods: int | None = None) -> complex:
    """Fourier coefficient of the cavity fluctuation at the probe beat.

    Computes delta/(2 pi n) * integral dc(t) e^{+i delta t} dt over exactly
    n beat periods (trapezoidal rule).
    """
    if delta is None:
        delta = traj.delta
    if n_periods is None:
        n_periods = traj.n_periods
    period = 2.0 * math.pi / abs(delta)
    needed = n_periods * period
    have = traj.t[-1] - traj.t[0]
    if have < needed - 1e-9 * needed:
        raise InvalidWindowError(
            "window covers %.6g time units, need %.6g for %d periods"
            % (have, needed, n_periods))
    # Cut to exactly n periods from the start of the window.
    n_pts = int(round(needed / (traj.t[1] - traj.t[0]))) + 1
    t = traj.t[:n_pts]
    sig = traj.dc[:n_pts] * np.exp(1j * delta * t)
    integral = np.trapezoid(sig, t)
    return complex(abs(delta) / (2.0 * math.pi * n_periods) * integral)


def oracle_compare(p: EffectiveParams, delta: float,
                   cfg: TrajectoryConfig | None = None,
                   full_field: bool = False) -> dict:
    """Demodulated time-domain amplitude vs the sideband solver."""
    if cfg is None:
        cfg = default_config(p, delta)
    traj = integrate(p, delta, cfg, full_field=full_field)
    demod = demodulate(traj)
    ref = solve_sidebands(p, delta).c_minus
    rel = abs(demod - ref) / abs(ref) if ref != 0 else math.inf
    return {"demodulated": demod, "solver": ref, "rel_error": rel}


def draw_stable_params(rng: np.random.Generator,
                       eps_p: float = 1.0) -> EffectiveParams:
    """Rejection-sample a parameter set that passes the stability check.

    Ranges (omega_b units): kappa [0.05, 0.5], g [0, 2], Delta [0.5, 1.5],
    gamma_b [1e-6, 1e-2] log-uniform, U_eff [0.5, 2], nu [1, 100].
    Most of this box is unstable (the optical-spring term overwhelms the
    mode frequency for moderate g when nu is large), so expect many
    rejections per accepted draw.
    """
    for _ in range(100000):
        p = EffectiveParams(
            kappa=rng.uniform(0.05, 0.5),
            gamma_b=10.0 ** rng.uniform(-6, -2),
            Delta=rng.uniform(0.5, 1.5),
            g=rng.uniform(0.0, 2.0),
            U_eff=rng.uniform(0.5, 2.0),
            nu=rng.uniform(1.0, 100.0),
            Omega_l=0.0,
            eps_p=eps_p,
        )
        if stability_check(p)[0]:
            return p
    raise RuntimeError("no stable draw found")  # pragma: no cover
