"""Uniform 1D grid, per-cell storage and ghost-cell boundaries."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .eos import VariableSet, VdwParameters, energy_from, state_from, ThermoState

N_GHOST = 2


class Boundary(enum.Enum):
    TRANSMISSIVE = "transmissive"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value) -> "Boundary":
        return value if isinstance(value, cls) else cls(str(value).lower())


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int
    n_ghost: int = N_GHOST

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError("need at least 4 cells")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


@dataclass
class CellField:
    """Interior cell values of ``(rho, rho*u, phi)``.

    When ``variable_set`` is total energy, ``phi`` holds ``E_t`` per unit volume.
    """

    rho: np.ndarray
    rhou: np.ndarray
    phi: np.ndarray
    variable_set: VariableSet

    @property
    def n_cells(self) -> int:
        return self.rho.size

    @property
    def u(self) -> np.ndarray:
        return self.rhou / self.rho

    @property
    def kinetic(self) -> np.ndarray:
        return 0.5 * self.rhou ** 2 / self.rho

    def copy(self) -> "CellField":
        return replace(self, rho=self.rho.copy(), rhou=self.rhou.copy(),
                       phi=self.phi.copy())

    def stack(self) -> np.ndarray:
        return np.stack([self.rho, self.rhou, self.phi])


def fill_ghosts(q: np.ndarray, boundary: Boundary, n_ghost: int = N_GHOST) -> np.ndarray:
    """Populate the ghost layers of a padded array in place (last axis is space)."""
    g = n_ghost
    n = q.shape[-1] - 2 * g
    if n < 1:
        raise ValueError("array too small for the ghost layers")
    if boundary is Boundary.PERIODIC:
        q[..., :g] = q[..., n:n + g]
        q[..., n + g:] = q[..., g:2 * g]
    else:
        q[..., :g] = q[..., g:g + 1]
        q[..., n + g:] = q[..., n + g - 1:n + g]
    return q


def padded(field: CellField, boundary: Boundary, n_ghost: int = N_GHOST) -> np.ndarray:
    """``(3, n + 2 g)`` array of stored variables with ghosts filled."""
    q = np.empty((3, field.n_cells + 2 * n_ghost))
    q[:, n_ghost:-n_ghost] = field.stack()
    return fill_ghosts(q, boundary, n_ghost)


def internal_energy(rho, rhou, phi, variable_set: VariableSet, params: VdwParameters):
    """Internal energy per unit volume of stored triples."""
    if variable_set.is_total_energy:
        return phi - 0.5 * rhou ** 2 / rho
    return energy_from(rho, phi, variable_set, params)


def thermo_of(rho, rhou, phi, variable_set: VariableSet,
              params: VdwParameters) -> ThermoState:
    if variable_set.is_total_energy:
        E = phi - 0.5 * rhou ** 2 / rho
        return state_from(rho, E / rho, VariableSet.SPECIFIC_ENERGY, params)
    return state_from(rho, phi, variable_set, params)


def field_thermo(field: CellField, params: VdwParameters) -> ThermoState:
    return thermo_of(field.rho, field.rhou, field.phi, field.variable_set, params)


def total_energy(field: CellField, params: VdwParameters) -> np.ndarray:
    """``E_t`` per cell."""
    if field.variable_set.is_total_energy:
        return field.phi.copy()
    return energy_from(field.rho, field.phi, field.variable_set, params) + field.kinetic


def total_energy_of(field: CellField, i: int, params: VdwParameters) -> float:
    if field.variable_set.is_total_energy:
        return float(field.phi[i])
    E = energy_from(field.rho[i], field.phi[i], field.variable_set, params)
    return float(E + 0.5 * field.rhou[i] ** 2 / field.rho[i])


def convert(field: CellField, target: VariableSet, params: VdwParameters) -> CellField:
    """Re-express a field in another variable set at the same thermodynamic state."""
    if target is field.variable_set:
        return field.copy()
    if target.is_total_energy:
        phi = total_energy(field, params)
    else:
        phi = field_thermo(field, params).value_of(target)
    return CellField(field.rho.copy(), field.rhou.copy(), np.asarray(phi, float).copy(), target)
