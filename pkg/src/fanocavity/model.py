"""
Physical parameters and unit normalization.

All downstream computation works in normalized units where the collective
(Bogoliubov) mode frequency omega_b equals 1; the SI value is kept on the
side so delays can be restored to seconds at the output boundary.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

from .errors import InvalidParameterError

HBAR = 1.054571817e-34  # J s

TWO_PI = 2.0 * math.pi

# Reference scales used by the figure presets: a 10 kHz collective mode and
# a near-infrared pump.
OMEGA_B_DEFAULT = TWO_PI * 1.0e4
OMEGA_L_DEFAULT = TWO_PI * 3.8e14


class ParameterConsistencyWarning(UserWarning):
    """omega_b disagrees with the value derived from (nu, U_eff)."""


class DegenerateModeWarning(UserWarning):
    """The collective mode frequency degenerates to zero."""


@dataclass(frozen=True)
class SystemParams:
    """User-facing physical inputs, SI units (rad/s, W) unless noted.

    The effective quantities (g, U_eff, nu, Delta) may either be given
    directly (the usual path) or derived from the microscopic inputs
    U0, J0, E0, V_cl, Delta_c, U via :func:`derive_effective`.
    """

    kappa: float = 0.1 * OMEGA_B_DEFAULT        # cavity amplitude decay rate
    gamma_b: float = 7.5e-7 * OMEGA_B_DEFAULT   # collective-mode decay rate
    omega_b: float = OMEGA_B_DEFAULT            # collective-mode frequency
    Delta: float = OMEGA_B_DEFAULT              # effective cavity detuning
    g: float = 0.1 * OMEGA_B_DEFAULT            # condensate-field coupling
    U_eff: float = OMEGA_B_DEFAULT              # on-site interaction energy
    nu: float = 100.0 * OMEGA_B_DEFAULT         # composite frequency shift
    P_l: float = 5.05e-3                        # pump power, W
    P_p: float = 1.0e-12                        # probe power, W
    omega_l: float = OMEGA_L_DEFAULT            # pump angular frequency
    omega_p: float = OMEGA_L_DEFAULT            # probe angular frequency
    N: int = 1000                               # atom count
    M: int = 100                                # lattice site count
    # Optional microscopic inputs, only consumed by derive_effective().
    U0: float | None = None      # light shift per atom, rad/s
    J0: float | None = None      # overlap factor, dimensionless
    E0: float | None = None      # site energy, J
    V_cl: float | None = None    # classical lattice depth, J
    Delta_c: float | None = None  # bare cavity detuning, rad/s
    U: float | None = None       # two-body interaction strength, J
    # When set, omega_b is replaced by the value derived from (nu, U_eff).
    derive_omega_b: bool = False

    def validate(self):
        if self.kappa <= 0:
            raise InvalidParameterError("kappa must be > 0")
        if self.omega_b <= 0:
            raise InvalidParameterError("omega_b must be > 0")
        if self.gamma_b < 0:
            raise InvalidParameterError("gamma_b must be >= 0")
        if self.g < 0:
            raise InvalidParameterError("g must be >= 0")
        if self.U_eff < 0 or self.nu < 0:
            raise InvalidParameterError("U_eff and nu must be >= 0")
        if self.P_l < 0 or self.P_p < 0:
            raise InvalidParameterError("powers must be >= 0")
        if self.omega_l <= 0 or self.omega_p <= 0:
            raise InvalidParameterError("optical frequencies must be > 0")
        if self.N < 1 or self.M < 1:
            raise InvalidParameterError("N and M must be >= 1")


@dataclass(frozen=True)
class EffectiveParams:
    """Model quantities in normalized units (omega_b = 1)."""

    kappa: float
    gamma_b: float
    Delta: float
    g: float
    U_eff: float
    nu: float
    Omega_l: float = 0.0     # pump drive amplitude
    eps_p: float = 1.0       # probe drive amplitude
    omega_b: float = 1.0     # identically 1 after normalization
    omega_b_si: float = OMEGA_B_DEFAULT  # rad/s, for unit restoration

    def validate(self):
        if self.kappa <= 0:
            raise InvalidParameterError("kappa must be > 0")
        if self.omega_b != 1.0:
            raise InvalidParameterError("normalized omega_b must equal 1")
        if self.Omega_l < 0 or self.eps_p < 0:
            raise InvalidParameterError("drive amplitudes must be real >= 0")

    def with_(self, **kw):
        return replace(self, **kw)


def pump_amplitude_from_power(P, omega, kappa):
    """Drive amplitude sqrt(2 kappa P / (hbar omega)) for an optical input.

    P in watts, omega and kappa in rad/s; result in rad/s * sqrt(photon).
    """
    if omega <= 0 or kappa <= 0:
        raise InvalidParameterError("omega and kappa must be > 0")
    if P < 0:
        raise InvalidParameterError("power must be >= 0")
    return math.sqrt(2.0 * kappa * P / (HBAR * omega))


def bogoliubov_frequency(nu, U_eff):
    """Collective-mode frequency sqrt((nu + U_eff)(nu + 3 U_eff)).

    Both arguments in the same rate units; the result shares them.
    """
    if nu < 0 or U_eff < 0:
        raise InvalidParameterError("nu and U_eff must be >= 0")
    if nu == 0 and U_eff == 0:
        warnings.warn("nu = U_eff = 0: collective mode degenerates to zero "
                      "frequency", DegenerateModeWarning, stacklevel=2)
        return 0.0
    return math.sqrt((nu + U_eff) * (nu + 3.0 * U_eff))


def effective_detuning(Delta_c, U0, N, J0):
    """Cavity detuning shifted by the atomic back-action: Delta_c - U0*N*J0."""
    if N < 1:
        raise InvalidParameterError("N must be >= 1")
    return Delta_c - U0 * N * J0


def derive_effective(params: SystemParams) -> SystemParams:
    """Fill (Delta, g, nu, U_eff) from the microscopic inputs.

    Requires U0, J0, E0, V_cl, Delta_c and U to be set. The steady
    intracavity field enters through |c_s|^2 with
    c_s = Omega_l / (kappa + i Delta).
    """
    micro = (params.U0, params.J0, params.E0, params.V_cl,
             params.Delta_c, params.U)
    if any(v is None for v in micro):
        raise InvalidParameterError(
            "derivation requires U0, J0, E0, V_cl, Delta_c and U")
    U0, J0, E0, V_cl, Delta_c, U = micro
    Delta = effective_detuning(Delta_c, U0, params.N, J0)
    Omega_l = pump_amplitude_from_power(params.P_l, params.omega_l,
                                        params.kappa)
    cs_sq = Omega_l ** 2 / (params.kappa ** 2 + Delta ** 2)
    g = 2.0 * U0 * J0 * math.sqrt(params.N) * cs_sq
    nu = U0 * J0 * cs_sq + V_cl * J0 / HBAR + E0 / HBAR
    U_eff = U * params.N / (HBAR * params.M)
    return replace(params, Delta=Delta, g=g, nu=nu, U_eff=U_eff,
                   derive_omega_b=True)


def normalize(params: SystemParams) -> EffectiveParams:
    """Convert SI inputs to normalized units with omega_b = 1.

    When ``derive_omega_b`` is set, omega_b is recomputed from (nu, U_eff);
    otherwise the supplied omega_b is used as-is and a consistency warning is
    emitted if it disagrees with the derived value by more than 1%.
    """
    params.validate()
    wb = params.omega_b
    if params.derive_omega_b:
        wb = bogoliubov_frequency(params.nu, params.U_eff)
        if wb <= 0:
            raise InvalidParameterError(
                "derived omega_b is zero; supply nu or U_eff > 0")
    else:
        derived = bogoliubov_frequency(params.nu, params.U_eff)
        if derived > 0 and abs(derived / wb - 1.0) > 0.01:
            warnings.warn(
                "omega_b=%g rad/s differs from the value %g rad/s derived "
                "from (nu, U_eff); keeping the supplied omega_b"
                % (wb, derived), ParameterConsistencyWarning, stacklevel=2)
    Omega_l = pump_amplitude_from_power(params.P_l, params.omega_l,
                                        params.kappa) / wb
    eps_p = pump_amplitude_from_power(params.P_p, params.omega_p,
                                      params.kappa) / wb
    return EffectiveParams(
        kappa=params.kappa / wb,
        gamma_b=params.gamma_b / wb,
        Delta=params.Delta / wb,
        g=params.g / wb,
        U_eff=params.U_eff / wb,
        nu=params.nu / wb,
        Omega_l=Omega_l,
        eps_p=eps_p,
        omega_b=1.0,
        omega_b_si=wb,
    )
