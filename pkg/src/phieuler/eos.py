"""Polytropic Van der Waals equation of state.

Every quantity is expressed in terms of the internal energy per unit volume
``E = rho * e``.  Functions accept scalars or numpy arrays and broadcast.
The polytropic ideal gas is the special case ``a = b = 0``.

The state can be addressed through any of the supported thermodynamic
variables (see :class:`VariableSet`); :func:`state_from` builds the full
state from ``(rho, phi)`` and :func:`energy_derivatives` returns the two
partial derivatives of ``E(rho, phi)`` needed by the primitive update.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Admissible densities stay strictly below this fraction of the co-volume pole.
COVOLUME_GUARD = 0.999


class EosDomainError(ValueError):
    """Raised when a state lies outside the domain of the equation of state."""


class VariableSet(enum.Enum):
    """Thermodynamic variable stored and updated alongside ``rho`` and ``rho*u``."""

    TEMPERATURE = "T"
    PRESSURE = "P"
    SPECIFIC_ENERGY = "e"
    SPECIFIC_ENTHALPY = "h"
    SPECIFIC_ENTROPY = "s"
    TOTAL_ENERGY = "Et"

    @classmethod
    def parse(cls, value) -> "VariableSet":
        if isinstance(value, cls):
            return value
        key = str(value).strip()
        for member in cls:
            if key == member.value or key.upper() == member.name:
                return member
        aliases = {"temperature": "T", "pressure": "P", "energy": "e",
                   "enthalpy": "h", "entropy": "s", "total-energy": "Et",
                   "total_energy": "Et"}
        if key.lower() in aliases:
            return cls(aliases[key.lower()])
        raise ValueError(f"unknown variable set {value!r}")

    @property
    def is_total_energy(self) -> bool:
        return self is VariableSet.TOTAL_ENERGY


PHI_VARIABLES = tuple(v for v in VariableSet if not v.is_total_energy)


@dataclass(frozen=True)
class VdwParameters:
    """Constants of the polytropic Van der Waals gas.

    Parameters
    ----------
    a : float
        Attraction coefficient [m^5/(kg s^2)].
    b : float
        Co-volume [m^3/kg].
    R : float
        Specific gas constant [J/(kg K)].
    delta : float
        ``gamma - 1``.
    """

    a: float
    b: float
    R: float
    delta: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("a and b must be non-negative")
        if self.R <= 0 or self.delta <= 0:
            raise ValueError("R and delta must be positive")

    @classmethod
    def ideal(cls, R: float = 1.0, gamma: float = 1.4) -> "VdwParameters":
        return cls(a=0.0, b=0.0, R=R, delta=gamma - 1.0)

    @classmethod
    def from_critical_point(cls, T_c: float, P_c: float, R: float,
                            delta: float) -> "VdwParameters":
        """Build parameters from the critical temperature and pressure."""
        a = 27.0 / 64.0 * (R * T_c) ** 2 / P_c
        b = R * T_c / (8.0 * P_c)
        return cls(a=a, b=b, R=R, delta=delta)

    @property
    def gamma(self) -> float:
        return 1.0 + self.delta

    @property
    def rho_max(self) -> float:
        return np.inf if self.b == 0 else COVOLUME_GUARD / self.b


@dataclass
class ThermoState:
    """Complete thermodynamic point, possibly array valued.

    ``E`` is internal energy per unit volume, ``kappa`` and ``chi`` are the
    pressure derivatives at constant ``rho`` and constant ``E`` respectively.
    """

    rho: np.ndarray
    T: np.ndarray
    P: np.ndarray
    e: np.ndarray
    h: np.ndarray
    s: np.ndarray
    E: np.ndarray
    c: np.ndarray
    kappa: np.ndarray
    chi: np.ndarray
    Gamma: np.ndarray
    Z: np.ndarray

    def value_of(self, variable_set: VariableSet) -> np.ndarray:
        name = {VariableSet.TEMPERATURE: "T", VariableSet.PRESSURE: "P",
                VariableSet.SPECIFIC_ENERGY: "e",
                VariableSet.SPECIFIC_ENTHALPY: "h",
                VariableSet.SPECIFIC_ENTROPY: "s"}.get(variable_set)
        if name is None:
            raise ValueError("total energy is not a thermodynamic state variable")
        return getattr(self, name)


def check_density(rho, params: VdwParameters):
    rho = np.asarray(rho, dtype=float)
    if not rho.min() > 0:
        raise EosDomainError("density must be positive")
    if params.b > 0 and rho.max() >= params.rho_max:
        raise EosDomainError(
            f"density {rho.max():.6g} beyond co-volume guard {params.rho_max:.6g}")
    return rho


def _check_temperature(T):
    if not np.asarray(T).min() > 0:
        raise EosDomainError("temperature must be positive")
    return T


def pressure_from_rho_T(rho, T, params: VdwParameters):
    rho = check_density(rho, params)
    _check_temperature(T)
    return rho * params.R * T / (1.0 - params.b * rho) - params.a * rho ** 2


def energy_from_rho_T(rho, T, params: VdwParameters):
    rho = check_density(rho, params)
    _check_temperature(T)
    return rho * params.R * T / params.delta - params.a * rho ** 2


def entropy_from_rho_T(rho, T, params: VdwParameters):
    # Zero additive constant: only differences matter to the scheme.
    rho = check_density(rho, params)
    _check_temperature(T)
    return (params.R / params.delta * np.log(T)
            + params.R * np.log(1.0 / rho - params.b))


def temperature_from(rho, phi, variable_set: VariableSet, params: VdwParameters):
    """Invert ``(rho, phi) -> T`` in closed form."""
    rho = check_density(rho, params)
    phi = np.asarray(phi, dtype=float)
    a, b, R, d = params.a, params.b, params.R, params.delta
    g = 1.0 - b * rho
    if variable_set is VariableSet.TEMPERATURE:
        T = phi
    elif variable_set is VariableSet.PRESSURE:
        T = (phi + a * rho ** 2) * g / (rho * R)
    elif variable_set is VariableSet.SPECIFIC_ENERGY:
        T = d * (phi + a * rho) / R
    elif variable_set is VariableSet.SPECIFIC_ENTHALPY:
        e = (phi * g - a * rho * (d - g)) / (g + d)
        T = d * (e + a * rho) / R
    elif variable_set is VariableSet.SPECIFIC_ENTROPY:
        T = np.exp(d / R * (phi - R * np.log(1.0 / rho - b)))
    else:
        raise ValueError("total energy needs momentum; convert to specific energy first")
    return _check_temperature(T)


def energy_from(rho, phi, variable_set: VariableSet, params: VdwParameters):
    """Internal energy per unit volume ``E(rho, phi)``."""
    if variable_set is VariableSet.SPECIFIC_ENERGY:
        rho = check_density(rho, params)
        E = rho * np.asarray(phi, dtype=float)
        _check_temperature(params.delta * (np.asarray(phi) + params.a * rho) / params.R)
        return E
    T = temperature_from(rho, phi, variable_set, params)
    return rho * params.R * T / params.delta - params.a * rho ** 2


def pressure_from(rho, phi, variable_set: VariableSet, params: VdwParameters):
    T = temperature_from(rho, phi, variable_set, params)
    return pressure_from_rho_T(rho, T, params)


def energy_derivatives(rho, phi, variable_set: VariableSet, params: VdwParameters):
    """Return ``(dE/dphi at fixed rho, dE/drho at fixed phi)``."""
    rho = check_density(rho, params)
    phi = np.asarray(phi, dtype=float)
    a, b, R, d = params.a, params.b, params.R, params.delta
    g = 1.0 - b * rho
    if variable_set is VariableSet.TEMPERATURE:
        _check_temperature(phi)
        return rho * R / d * np.ones_like(phi), R * phi / d - 2.0 * a * rho
    if variable_set is VariableSet.SPECIFIC_ENERGY:
        temperature_from(rho, phi, variable_set, params)
        return rho * np.ones_like(phi), phi * np.ones_like(rho)
    if variable_set is VariableSet.PRESSURE:
        temperature_from(rho, phi, variable_set, params)
        E_P = g / d * np.ones_like(phi)
        E_rho = (2.0 * a * rho * g - b * (phi + a * rho ** 2)) / d - 2.0 * a * rho
        return E_P, E_rho
    if variable_set is VariableSet.SPECIFIC_ENTHALPY:
        temperature_from(rho, phi, variable_set, params)
        D = g + d
        N = rho * phi * g - a * rho ** 2 * (d - g)
        dN = phi * g - b * rho * phi - 2.0 * a * rho * (d - g) - a * b * rho ** 2
        return rho * g / D, dN / D + b * N / D ** 2
    if variable_set is VariableSet.SPECIFIC_ENTROPY:
        T = temperature_from(rho, phi, variable_set, params)
        return rho * T, R * T / d + R * T / g - 2.0 * a * rho
    raise ValueError("total energy has no (rho, phi) derivative pair")


def kappa_chi(rho, E, params: VdwParameters):
    """Pressure derivatives ``(dP/dE)_rho`` and ``(dP/drho)_E``, E per volume."""
    rho = check_density(rho, params)
    a, b, d = params.a, params.b, params.delta
    g = 1.0 - b * rho
    kappa = d / g * np.ones_like(np.asarray(E, dtype=float))
    chi = d * (b * (E - a * rho ** 2) + 2.0 * a * rho) / g ** 2 - 2.0 * a * rho
    return kappa, chi


def pressure_from_rho_E(rho, E, params: VdwParameters):
    rho = check_density(rho, params)
    a, b, d = params.a, params.b, params.delta
    return d * (E + a * rho ** 2) / (1.0 - b * rho) - a * rho ** 2


def sound_speed(rho, E, params: VdwParameters):
    kappa, chi = kappa_chi(rho, E, params)
    P = pressure_from_rho_E(rho, E, params)
    c2 = chi + kappa * (E + P) / rho
    if not np.asarray(c2).min() > 0:
        raise EosDomainError("thermodynamically inadmissible state: c^2 <= 0")
    return np.sqrt(c2)


def fundamental_derivative(rho, P, params: VdwParameters):
    rho = np.asarray(rho, dtype=float)
    a, b, d = params.a, params.b, params.delta
    q = P + a * rho ** 2
    g = 1.0 - rho * b
    num = (d + 1.0) * (d + 2.0) * q / g ** 2 * rho ** 2 - 6.0 * a * rho ** 4
    den = 2.0 * (d + 1.0) * q / g * rho ** 2 - 4.0 * a * rho ** 4
    if np.any(den == 0):
        raise EosDomainError("fundamental derivative undefined: zero denominator")
    return num / den


def compressibility(rho, T, P, params: VdwParameters):
    return P / (rho * params.R * T)


def state_from(rho, phi, variable_set: VariableSet, params: VdwParameters) -> ThermoState:
    """Fully populated :class:`ThermoState` from ``(rho, phi)``."""
    rho = check_density(rho, params)
    T = temperature_from(rho, phi, variable_set, params)
    a, b, R, d = params.a, params.b, params.R, params.delta
    P = rho * R * T / (1.0 - b * rho) - a * rho ** 2
    E = rho * R * T / d - a * rho ** 2
    if variable_set is VariableSet.SPECIFIC_ENERGY:
        # keep the stored value bit-exact
        e = np.asarray(phi, dtype=float) * np.ones_like(rho)
        E = rho * e
    else:
        e = E / rho
    h = e + P / rho
    s = R / d * np.log(T) + R * np.log(1.0 / rho - b)
    kappa, chi = kappa_chi(rho, E, params)
    c2 = chi + kappa * (E + P) / rho
    if not np.asarray(c2).min() > 0:
        raise EosDomainError("thermodynamically inadmissible state: c^2 <= 0")
    return ThermoState(rho=rho, T=T, P=P, e=e, h=h, s=s, E=E, c=np.sqrt(c2),
                       kappa=kappa, chi=chi,
                       Gamma=fundamental_derivative(rho, P, params),
                       Z=P / (rho * R * T))


def flux_quantities(rho, phi, variable_set: VariableSet, params: VdwParameters):
    """``(P, E, c, kappa, chi)``: the subset of the state a flux evaluation needs."""
    rho = check_density(rho, params)
    a, b, R, d = params.a, params.b, params.R, params.delta
    if variable_set is VariableSet.SPECIFIC_ENERGY:
        E = rho * phi
        P = d * (E + a * rho ** 2) / (1.0 - b * rho) - a * rho ** 2
        _check_temperature(d * (phi + a * rho) / R)
    else:
        T = temperature_from(rho, phi, variable_set, params)
        g = 1.0 - b * rho
        P = rho * R * T / g - a * rho ** 2
        E = rho * R * T / d - a * rho ** 2
    kappa, chi = kappa_chi(rho, E, params)
    c2 = chi + kappa * (E + P) / rho
    if not np.asarray(c2).min() > 0:
        raise EosDomainError("thermodynamically inadmissible state: c^2 <= 0")
    return P, E, np.sqrt(c2), kappa, chi


def state_from_rho_P(rho, P, params: VdwParameters) -> ThermoState:
    return state_from(rho, P, VariableSet.PRESSURE, params)


def phi_from_rho_P(rho, P, variable_set: VariableSet, params: VdwParameters):
    """Stored variable for a state given by density and pressure."""
    return state_from(rho, P, VariableSet.PRESSURE, params).value_of(variable_set)


def admissible(rho, phi, variable_set: VariableSet, params: VdwParameters):
    """Element-wise admissibility mask (positive ``rho``, ``T``, ``P``; below co-volume)."""
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ok = rho > 0
    if params.b > 0:
        ok &= rho < params.rho_max
    safe_rho = np.where(ok, rho, 1.0 if params.b == 0 else 0.5 * params.rho_max)
    with np.errstate(all="ignore"):
        try:
            T = _raw_temperature(safe_rho, phi, variable_set, params)
        except ValueError:
            return np.zeros_like(ok)
        P = safe_rho * params.R * T / (1.0 - params.b * safe_rho) - params.a * safe_rho ** 2
    return ok & (T > 0) & (P > 0) & np.isfinite(T)


def _raw_temperature(rho, phi, variable_set, params):
    a, b, R, d = params.a, params.b, params.R, params.delta
    g = 1.0 - b * rho
    if variable_set is VariableSet.TEMPERATURE:
        return phi * np.ones_like(rho)
    if variable_set is VariableSet.PRESSURE:
        return (phi + a * rho ** 2) * g / (rho * R)
    if variable_set is VariableSet.SPECIFIC_ENERGY:
        return d * (phi + a * rho) / R
    if variable_set is VariableSet.SPECIFIC_ENTHALPY:
        return d * ((phi * g - a * rho * (d - g)) / (g + d) + a * rho) / R
    if variable_set is VariableSet.SPECIFIC_ENTROPY:
        return np.exp(d / R * (phi - R * np.log(1.0 / rho - b)))
    raise ValueError("total energy needs momentum")
