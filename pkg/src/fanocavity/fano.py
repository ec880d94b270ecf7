"""
Asymmetric (Fano) lineshape: evaluation, parameter mapping, landmark
location, and least-squares fitting of computed spectra.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .model import EffectiveParams


@dataclass(frozen=True)
class FanoShape:
    """Lineshape descriptor in reduced coordinates."""

    q: float                   # asymmetry parameter
    Gamma: float               # linewidth, units of omega_b
    Omega: float               # detuning offset Delta - omega_b
    x_zero: float | None       # reduced coordinate of the zero (= -q)
    x_peak: float | None       # reduced coordinate of the maximum (= 1/q)
    peak_height: float | None  # lineshape value at the maximum
    symmetric: bool = False    # q == 0: anti-resonance, no finite peak


def fano_lineshape(x, q):
    """Reduced lineshape 2 (x+q)^2 / ((1+q^2)(1+x^2)).

    Vanishes at x = -q, reaches its maximum value 2 at x = 1/q (q != 0),
    and degenerates to the symmetric anti-resonance 2x^2/(1+x^2) at q = 0.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    out = 2.0 * (x + q) ** 2 / ((1.0 + q * q) * (1.0 + x * x))
    return out if out.ndim else float(out)


def fano_params_from_system(p: EffectiveParams) -> FanoShape:
    """Map cavity parameters to the reduced lineshape descriptor.

    Omega = Delta - omega_b, q = -Omega/kappa,
    Gamma = 2 kappa Delta g / (kappa^2 + Omega^2).
    """
    if p.kappa <= 0:
        raise InvalidParameterError("kappa must be > 0")
    Omega = p.Delta - p.omega_b
    q = -Omega / p.kappa
    Gamma = 2.0 * p.kappa * p.Delta * p.g / (p.kappa ** 2 + Omega ** 2)
    if q == 0.0:
        return FanoShape(q=0.0, Gamma=Gamma, Omega=Omega, x_zero=0.0,
                         x_peak=None, peak_height=None, symmetric=True)
    return FanoShape(q=q, Gamma=Gamma, Omega=Omega, x_zero=-q,
                     x_peak=1.0 / q, peak_height=2.0)


def _parabolic_refine(xs, ys, i):
    """Refine an interior extremum by a 3-point parabola through i-1, i, i+1.

    Falls back to the grid point when the parabola degenerates or the vertex
    leaves the bracketing interval. Returns (x, y) of the refined extremum.
    """
    x0, x1, x2 = xs[i - 1], xs[i], xs[i + 1]
    y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    if denom == 0.0:
        return x1, y1
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0)
         + x0 * x0 * (y1 - y2)) / denom
    if a == 0.0:
        return x1, y1
    xv = -b / (2.0 * a)
    if not (x0 <= xv <= x2):
        return x1, y1
    c = y1 - a * x1 * x1 - b * x1
    return xv, a * xv * xv + b * xv + c


def locate_landmarks(deltas, mu):
    """Locations and values of the global minimum and maximum of a spectrum.

    Interior extrema are refined by 3-point parabolic interpolation; edge
    extrema are reported at the grid point. Ties break toward the smallest
    detuning. Returns (delta_at_min, mu_min, delta_at_max, mu_max).
    """
    deltas = np.asarray(deltas, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if deltas.size < 3:
        raise InvalidParameterError("need at least 3 grid points")
    if not np.all(np.diff(deltas) > 0):
        raise InvalidParameterError("detuning grid must be strictly increasing")
    i_min = int(np.argmin(mu))   # argmin/argmax take the first hit: tie rule
    i_max = int(np.argmax(mu))
    if 0 < i_min < deltas.size - 1:
        d_min, v_min = _parabolic_refine(deltas, mu, i_min)
    else:
        d_min, v_min = float(deltas[i_min]), float(mu[i_min])
    if 0 < i_max < deltas.size - 1:
        d_max, v_max = _parabolic_refine(deltas, mu, i_max)
    else:
        d_max, v_max = float(deltas[i_max]), float(mu[i_max])
    return d_min, v_min, d_max, v_max


def _fano_model(deltas, theta):
    A, delta0, Gamma, q = theta
    x = (deltas - delta0) / Gamma - q
    return A * fano_lineshape(x, q)


def fit_fano(deltas, mu, init: FanoShape | None = None,
             init_amplitude: float | None = None,
             init_center: float | None = None):
    """Fit mu(delta) to A * fano((delta - delta0)/Gamma - q, q).

    Damped Gauss-Newton least squares over (A, delta0, Gamma, q) with a
    Levenberg-style lambda that grows on rejected steps and shrinks on
    accepted ones. Numeric Jacobian. Converges when the relative step drops
    below 1e-8, gives up after 200 iterations and returns the best point
    found with converged=False rather than raising, so sweeps never abort
    on a stubborn spectrum.

    Returns a dict: {q_fit, Gamma_fit, delta0, amplitude, rms_residual,
    converged}.
    """
    deltas = np.asarray(deltas, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if deltas.size < 10:
        raise InvalidParameterError("need at least 10 grid points to fit")

    span = deltas[-1] - deltas[0]
    q0 = init.q if init is not None and init.q != 0 else 1.0
    G0 = init.Gamma if init is not None and init.Gamma > 0 else span / 10.0
    A0 = init_amplitude if init_amplitude is not None else \
        max(float(np.max(mu)) / 2.0, 1e-12)
    d0 = init_center if init_center is not None else \
        float(deltas[np.argmin(mu)]) + q0 * G0

    theta = np.array([A0, d0, G0, q0], dtype=float)

    def residuals(t):
        return _fano_model(deltas, t) - mu

    r = residuals(theta)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    for _ in range(200):
        # Numeric Jacobian, relative step per parameter.
        J = np.empty((deltas.size, 4))
        for k in range(4):
            step = 1e-7 * max(abs(theta[k]), 1e-7)
            tp = theta.copy()
            tp[k] += step
            J[:, k] = (residuals(tp) - r) / step
        JTJ = J.T @ J
        JTr = J.T @ r
        accepted = False
        for _try in range(25):
            H = JTJ + lam * np.diag(np.maximum(np.diag(JTJ), 1e-12))
            try:
                dtheta = np.linalg.solve(H, -JTr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = theta + dtheta
            if cand[2] <= 0:   # keep the width positive
                lam *= 10.0
                continue
            rc = residuals(cand)
            cc = float(rc @ rc)
            if cc < cost:
                rel = float(np.linalg.norm(dtheta)
                            / max(np.linalg.norm(theta), 1e-300))
                theta, r, cost = cand, rc, cc
                lam = max(lam / 10.0, 1e-12)
                accepted = True
                if rel < 1e-8:
                    converged = True
                break
            lam *= 10.0
        if converged or not accepted:
            break

    rms = math.sqrt(cost / deltas.size)
    return {
        "q_fit": float(theta[3]),
        "Gamma_fit": float(theta[2]),
        "delta0": float(theta[1]),
        "amplitude": float(theta[0]),
        "rms_residual": rms,
        "converged": converged,
    }
