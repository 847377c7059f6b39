"""Forward-Euler time update with a conservative primitive-variable step.

Mass and momentum are advanced directly.  The stored thermodynamic
variable ``phi`` is advanced with a linearized update whose linearization
point is searched for (secant iteration, cell by cell) so that the
thermodynamically exact internal-energy jump equals the linearized one,
which makes the update conserve total energy.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .eos import (EosDomainError, VariableSet, VdwParameters, energy_derivatives,
                  energy_from, flux_quantities, pressure_from)
from .grid import Boundary, CellField
from .spatial import ResidualSet, assemble_residuals

TOL = 1e-14
FLAT_TOL = 1e-13
MAX_ITER = 50


class Mode(enum.Enum):
    SECANT = "secant"
    SIMPLIFIED = "simplified"
    REFERENCE_ET = "reference-et"

    @classmethod
    def parse(cls, value) -> "Mode":
        return value if isinstance(value, cls) else cls(str(value).lower())


class RhoBar(enum.Enum):
    """Linearization density: old, new, or the mean of both."""

    N = "n"
    NP1 = "np1"
    MEAN = "mean"

    @classmethod
    def parse(cls, value) -> "RhoBar":
        return value if isinstance(value, cls) else cls(str(value).lower())

    def of(self, rho_n, rho_np1):
        if self is RhoBar.N:
            return rho_n
        if self is RhoBar.NP1:
            return rho_np1
        return 0.5 * (rho_n + rho_np1)


class PositivityError(RuntimeError):
    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = tuple(int(c) for c in cells)


class SecantConvergenceError(RuntimeError):
    def __init__(self, message, cells=(), final_F=(), history=()):
        super().__init__(message)
        self.cells = tuple(int(c) for c in cells)
        self.final_F = tuple(float(f) for f in final_F)
        self.history = history


@dataclass
class LinearizationPoint:
    rho_bar: np.ndarray
    phi_bar: np.ndarray
    E_phi_bar: np.ndarray
    E_rho_bar: np.ndarray

    @property
    def omega_bar(self):
        # cell-average of E_phi collapses for piecewise-constant data
        return self.E_phi_bar

    @classmethod
    def at(cls, rho_bar, phi_bar, variable_set, params):
        E_phi, E_rho = energy_derivatives(rho_bar, phi_bar, variable_set, params)
        return cls(rho_bar, phi_bar, E_phi, E_rho)


@dataclass
class SecantReport:
    """Per-cell outcome of one secant search (arrays over cells).

    ``iterations`` counts secant-formula applications; 0 means one of the two
    bracket evaluations already met the tolerance.
    """

    iterations: np.ndarray
    final_F: np.ndarray
    converged: np.ndarray
    flat: np.ndarray

    @classmethod
    def trivial(cls, n):
        return cls(np.zeros(n, int), np.zeros(n), np.ones(n, bool), np.zeros(n, bool))


def update_mass_momentum(rho, rhou, residuals: ResidualSet, dt, volume):
    rho_np1 = rho - dt / volume * residuals.rho
    rhou_np1 = rhou - dt / volume * residuals.rhou
    bad = np.flatnonzero(~(rho_np1 > 0))
    if bad.size:
        raise PositivityError(
            f"non-positive density in cells {bad[:10].tolist()}; reduce the CFL number",
            bad)
    return rho_np1, rhou_np1


def phi_residual(point: LinearizationPoint, delta_rho, delta_ke, Phi_Et, dt, volume):
    """Pseudo-residual of ``phi`` making the linearized energy balance exact."""
    omega = point.omega_bar
    if np.any(omega == 0):
        raise ZeroDivisionError("omega_bar vanishes: degenerate variable choice at this state")
    return (volume * (point.E_rho_bar * delta_rho + delta_ke) + dt * Phi_Et) / (omega * dt)


def phi_update(phi_n, Phi_phi, dt, volume):
    return phi_n - dt / volume * Phi_phi


@dataclass
class CellContext:
    """Everything the per-cell search needs once ``rho`` and ``rho*u`` are advanced."""

    rho_n: np.ndarray
    rho_np1: np.ndarray
    phi_n: np.ndarray
    E_n: np.ndarray
    delta_ke: np.ndarray
    Phi_Et: np.ndarray
    rho_bar: np.ndarray
    dt: float
    volume: float
    variable_set: VariableSet
    params: VdwParameters
    counters: object = None

    @property
    def delta_rho(self):
        return self.rho_np1 - self.rho_n

    def take(self, idx) -> "CellContext":
        return CellContext(self.rho_n[idx], self.rho_np1[idx], self.phi_n[idx], self.E_n[idx],
                           self.delta_ke[idx], self.Phi_Et[idx], self.rho_bar[idx],
                           self.dt, self.volume, self.variable_set, self.params,
                           self.counters)

    def phi_np1(self, phi_bar):
        """Updated ``phi`` and linearization point for a candidate ``phi_bar``."""
        diagnostics.record(self.counters, diagnostics.SECANT, np.size(phi_bar))
        point = LinearizationPoint.at(self.rho_bar, phi_bar, self.variable_set, self.params)
        Phi_phi = phi_residual(point, self.delta_rho, self.delta_ke, self.Phi_Et,
                               self.dt, self.volume)
        return phi_update(self.phi_n, Phi_phi, self.dt, self.volume), point

    def evaluate(self, phi_bar):
        """``(phi_np1(phi_bar), F(phi_bar))``."""
        phi1, point = self.phi_np1(phi_bar)
        diagnostics.record(self.counters, diagnostics.SECANT, np.size(phi_bar))
        E1 = energy_from(self.rho_np1, phi1, self.variable_set, self.params)
        dE_tmd = E1 - self.E_n
        dE_approx = point.E_phi_bar * (phi1 - self.phi_n) + point.E_rho_bar * self.delta_rho
        return phi1, (dE_tmd - dE_approx) / np.abs(self.E_n)


def conservation_defect(phi_bar, ctx: CellContext):
    """Scaled gap between the exact and linearized internal-energy jumps."""
    return ctx.evaluate(phi_bar)[1]


def secant_search(ctx: CellContext, tol=TOL, flat_tol=FLAT_TOL, max_iter=MAX_ITER):
    """Find ``phi_bar`` with ``|F(phi_bar)| < tol`` in every cell.

    Returns ``(phi_np1, SecantReport)``.  Raises
    :class:`SecantConvergenceError` if any cell fails.
    """
    n = ctx.phi_n.size
    out = np.empty(n)
    iterations = np.zeros(n, int)
    final_F = np.empty(n)
    converged = np.zeros(n, bool)
    flat = np.zeros(n, bool)

    guess, F_a = ctx.evaluate(ctx.phi_n)
    hit = np.abs(F_a) < tol
    out[hit], final_F[hit], converged[hit] = guess[hit], F_a[hit], True
    idx = np.flatnonzero(~hit)
    if idx.size == 0:
        return out, SecantReport(iterations, final_F, converged, flat)

    sub = ctx.take(idx)
    x_a, F_a, guess = ctx.phi_n[idx], F_a[idx], guess[idx]
    x_b = guess
    phi_b, F_b = sub.evaluate(x_b)
    hit = np.abs(F_b) < tol
    is_flat = ~hit & (np.maximum(np.abs(F_a), np.abs(F_b)) < flat_tol)
    done = hit | is_flat
    out[idx[hit]], final_F[idx[hit]], converged[idx[hit]] = phi_b[hit], F_b[hit], True
    out[idx[is_flat]], final_F[idx[is_flat]] = guess[is_flat], F_a[is_flat]
    flat[idx[is_flat]] = True

    keep = ~done
    idx, sub = idx[keep], sub.take(np.flatnonzero(keep))
    x_a, F_a, x_b, F_b, guess = x_a[keep], F_a[keep], x_b[keep], F_b[keep], guess[keep]
    history = [(idx.copy(), x_a.copy(), F_a.copy()), (idx.copy(), x_b.copy(), F_b.copy())]

    k = 0
    while idx.size and k < max_iter:
        k += 1
        # order by F value, then apply the secant formula from the lower end
        lo_is_a = F_a <= F_b
        x_lo, F_lo = np.where(lo_is_a, x_a, x_b), np.where(lo_is_a, F_a, F_b)
        x_hi, F_hi = np.where(lo_is_a, x_b, x_a), np.where(lo_is_a, F_b, F_a)
        dF = F_hi - F_lo
        stalled = dF == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = np.where(stalled, x_b, x_lo - F_lo * (x_hi - x_lo) / np.where(stalled, 1.0, dF))
        phi_new, F_new = sub.evaluate(x_new)
        history.append((idx.copy(), x_new.copy(), F_new.copy()))
        hit = np.abs(F_new) < tol
        # a stalled secant is only acceptable on a flat, machine-precision F
        stall_flat = stalled & ~hit & (np.maximum(np.abs(F_a), np.abs(F_b)) < flat_tol)
        stall_fail = stalled & ~hit & ~stall_flat
        if np.any(stall_fail):
            _fail(idx[stall_fail], F_new[stall_fail], history, "secant stalled (F+ == F-)")
        sel = idx[hit]
        out[sel], final_F[sel], converged[sel], iterations[sel] = phi_new[hit], F_new[hit], True, k
        sel = idx[stall_flat]
        out[sel], final_F[sel], flat[sel], iterations[sel] = (guess[stall_flat],
                                                              F_new[stall_flat], True, k)
        keep = ~(hit | stall_flat)
        idx = idx[keep]
        sub = sub.take(np.flatnonzero(keep))
        x_a, F_a = x_b[keep], F_b[keep]
        x_b, F_b = x_new[keep], F_new[keep]
        guess = guess[keep]

    if idx.size:
        _fail(idx, F_b, history, f"no convergence after {max_iter} iterations")
    return out, SecantReport(iterations, final_F, converged, flat)


def _fail(cells, F, history, reason):
    first = int(cells[0])
    trail = [(float(x[list(i).index(first)]), float(f[list(i).index(first)]))
             for i, x, f in history if first in i]
    raise SecantConvergenceError(
        f"{reason} in cells {cells[:10].tolist()}; |F| = {np.abs(F[:10]).tolist()}; "
        f"history of cell {first}: {trail}", cells, np.abs(F), trail)


@dataclass
class StepResult:
    field: CellField
    residuals: ResidualSet
    report: SecantReport


def step(field: CellField, params: VdwParameters, boundary: Boundary, dt: float,
         volume: float, mode: Mode = Mode.SECANT, order: int = 2,
         limiter: str | None = "barth-jespersen", rhobar: RhoBar = RhoBar.MEAN,
         counters=None, sources=None) -> StepResult:
    """Advance one forward-Euler step.

    ``sources`` optionally holds per-cell ``(theta_rho, theta_rhou, theta_Et)``
    added to the right-hand side.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    mode = Mode.parse(mode)
    vs = field.variable_set
    if (mode is Mode.REFERENCE_ET) != vs.is_total_energy:
        raise ValueError(f"mode {mode.value} is incompatible with stored variable {vs.value}")

    res = assemble_residuals(field, params, boundary, order, limiter, counters)
    if sources is not None:
        res = res.add_source(*sources, volume)
    rho1, rhou1 = update_mass_momentum(field.rho, field.rhou, res, dt, volume)
    n = field.n_cells

    if mode is Mode.REFERENCE_ET:
        phi1 = field.phi - dt / volume * res.Et
        report = SecantReport.trivial(n)
    else:
        diagnostics.record(counters, diagnostics.SECANT, n)
        E_n = energy_from(field.rho, field.phi, vs, params)
        delta_ke = 0.5 * rhou1 ** 2 / rho1 - field.kinetic
        if mode is Mode.SIMPLIFIED:
            diagnostics.record(counters, diagnostics.SECANT, n)
            point = LinearizationPoint.at(field.rho, field.phi, vs, params)
            Phi_phi = phi_residual(point, rho1 - field.rho, delta_ke, res.Et, dt, volume)
            phi1 = phi_update(field.phi, Phi_phi, dt, volume)
            report = SecantReport.trivial(n)
        else:
            ctx = CellContext(field.rho, rho1, field.phi, E_n, delta_ke, res.Et,
                              RhoBar.parse(rhobar).of(field.rho, rho1), dt, volume,
                              vs, params, counters)
            phi1, report = secant_search(ctx)

    new = CellField(rho1, rhou1, phi1, vs)
    _check_admissible(new, params, counters)
    return StepResult(new, res, report)


def _check_admissible(field: CellField, params, counters):
    diagnostics.record(counters, diagnostics.AUXILIARY, field.n_cells)
    vs = field.variable_set
    try:
        if vs.is_total_energy:
            E = field.phi - field.kinetic
            P = pressure_from(field.rho, E / field.rho, VariableSet.SPECIFIC_ENERGY, params)
        else:
            P = pressure_from(field.rho, field.phi, vs, params)
    except EosDomainError as exc:
        raise EosDomainError(f"unphysical solution update: {exc}") from exc
    bad = np.flatnonzero(~(P > 0))
    if bad.size:
        raise PositivityError(f"non-positive pressure in cells {bad[:10].tolist()}", bad)


def cfl_timestep(field: CellField, params: VdwParameters, dx: float, cfl: float,
                 counters=None) -> float:
    diagnostics.record(counters, diagnostics.AUXILIARY, field.n_cells)
    rho, u, phi, vs = field.rho, field.u, field.phi, field.variable_set
    if vs.is_total_energy:
        phi, vs = (phi - field.kinetic) / rho, VariableSet.SPECIFIC_ENERGY
    c = flux_quantities(rho, phi, vs, params)[2]
    return cfl * dx / float(np.max(np.abs(u) + c))
