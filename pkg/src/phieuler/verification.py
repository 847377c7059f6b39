"""Manufactured-solution convergence study and an exact ideal-gas Riemann oracle.

The manufactured solution is a travelling cosine/sine wave in density,
velocity and temperature on the unit periodic interval.  Its residual in the
Euler equations is computed in closed form and injected as a source term, so
the numerical solution should converge to it at the scheme's design order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .cases import CaseDefinition, Side
from .diagnostics import fmt
from .eos import VariableSet, VdwParameters, energy_from_rho_T, phi_from_rho_P, pressure_from_rho_T
from .grid import Boundary, CellField, Grid1D, field_thermo
from .solver import integrate
from .temporal import Mode

# nitrogen-like constants keep the manufactured states near 300 K
MMS_GAS = VdwParameters(a=173.943088, b=1.37851912e-3, R=296.8, delta=0.4)
MMS_T_FINAL = 1e-4
MMS_MESHES = (50, 100, 200, 400, 800)


@dataclass(frozen=True)
class MmsConfig:
    """Amplitudes and wavenumbers of the manufactured fields.

    Each field is ``q0 + A_q * f(omega_q_x * x + omega_q_t * t)`` with
    ``f = cos`` for density and ``f = sin`` for velocity and temperature.
    """

    rho0: float = 2.0
    A_rho: float = 0.025
    omega_rho_x: float = 2 * math.pi
    omega_rho_t: float = 256 * math.pi
    u0: float = 2.0
    A_u: float = 0.025
    omega_u_x: float = 2 * math.pi
    omega_u_t: float = 256 * math.pi
    T0: float = 300.0
    A_T: float = 0.1
    omega_T_x: float = 2 * math.pi
    omega_T_t: float = 256 * math.pi

    def zero_amplitudes(self) -> "MmsConfig":
        return replace(self, A_rho=0.0, A_u=0.0, A_T=0.0)


def _fields(x, t, cfg: MmsConfig):
    """Values and first derivatives ``(q, q_x, q_t)`` of rho, u and T."""
    x = np.asarray(x, float)
    t = np.asarray(t, float)
    ar = cfg.omega_rho_x * x + cfg.omega_rho_t * t
    au = cfg.omega_u_x * x + cfg.omega_u_t * t
    aT = cfg.omega_T_x * x + cfg.omega_T_t * t
    rho = (cfg.rho0 + cfg.A_rho * np.cos(ar),
           -cfg.A_rho * cfg.omega_rho_x * np.sin(ar),
           -cfg.A_rho * cfg.omega_rho_t * np.sin(ar))
    u = (cfg.u0 + cfg.A_u * np.sin(au),
         cfg.A_u * cfg.omega_u_x * np.cos(au),
         cfg.A_u * cfg.omega_u_t * np.cos(au))
    T = (cfg.T0 + cfg.A_T * np.sin(aT),
         cfg.A_T * cfg.omega_T_x * np.cos(aT),
         cfg.A_T * cfg.omega_T_t * np.cos(aT))
    return rho, u, T


def mms_exact(x, t, config: MmsConfig | None = None):
    """Manufactured ``(rho, u, T)`` at points ``x`` and time ``t``."""
    rho, u, T = _fields(x, t, config or MmsConfig())
    return rho[0], u[0], T[0]


def mms_conserved(x, t, config: MmsConfig | None = None, params: VdwParameters = MMS_GAS):
    """Manufactured conserved variables and fluxes, both stacked as ``(3, ...)``."""
    rho, u, T = mms_exact(x, t, config)
    P = pressure_from_rho_T(rho, T, params)
    Et = energy_from_rho_T(rho, T, params) + 0.5 * rho * u ** 2
    q = np.stack([rho, rho * u, Et])
    f = np.stack([rho * u, rho * u ** 2 + P, (Et + P) * u])
    return q, f


def mms_sources(x, t, config: MmsConfig | None = None, params: VdwParameters = MMS_GAS):
    """Source terms ``dq/dt + df/dx`` of the manufactured solution.

    Returns ``(theta_rho, theta_rhou, theta_Et)``, differentiated analytically
    through the equation of state.
    """
    cfg = config or MmsConfig()
    (r, r_x, r_t), (u, u_x, u_t), (T, T_x, T_t) = _fields(x, t, cfg)
    a, b, R, d = params.a, params.b, params.R, params.delta
    g = 1.0 - b * r
    P = r * R * T / g - a * r ** 2
    P_r = R * T / g ** 2 - 2 * a * r
    P_T = r * R / g
    E = r * R * T / d - a * r ** 2
    E_r = R * T / d - 2 * a * r
    E_T = r * R / d

    def ddt(f_r, f_T, tag):
        # chain rule through (rho, T) for the derivative direction ``tag``
        dr, dT = (r_t, T_t) if tag == "t" else (r_x, T_x)
        return f_r * dr + f_T * dT

    Et = E + 0.5 * r * u ** 2
    m_t = r_t * u + r * u_t
    m_x = r_x * u + r * u_x
    Et_t = ddt(E_r, E_T, "t") + 0.5 * r_t * u ** 2 + r * u * u_t
    Et_x = ddt(E_r, E_T, "x") + 0.5 * r_x * u ** 2 + r * u * u_x
    P_x = ddt(P_r, P_T, "x")

    theta_rho = r_t + m_x
    theta_rhou = m_t + (m_x * u + r * u * u_x) + P_x
    theta_Et = Et_t + (Et_x + P_x) * u + (Et + P) * u_x
    return theta_rho, theta_rhou, theta_Et


@dataclass
class ConvergenceResult:
    """Errors per mesh (``errors[name][k]``) and rates between consecutive meshes."""

    meshes: list
    errors: dict
    rates: dict
    order: int
    n_steps: list

    @property
    def final_rate(self) -> float:
        """Worst final-pair rate over the four variables."""
        finals = [r[-1] for r in self.rates.values()]
        if any(not np.isfinite(f) for f in finals):
            return float("nan")
        return min(finals, key=lambda f: abs(f - self.order))

    def rows(self) -> list[dict]:
        out = []
        for k, n in enumerate(self.meshes):
            row = {"n_cells": n}
            for name in self.errors:
                row[f"e_{name}"] = self.errors[name][k]
            for name in self.rates:
                row[f"rate_{name}"] = self.rates[name][k - 1] if k else float("nan")
            out.append(row)
        return out

    def write_csv(self, path) -> None:
        rows = self.rows()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(rows[0]))
            for row in rows:
                w.writerow([v if isinstance(v, int) else fmt(v) for v in row.values()])


def _mms_case(n_cells, order, variable_set, limiter, mode, cfl):
    return CaseDefinition(name="mms", eos=MMS_GAS, x_min=0.0, x_max=1.0, n_cells=n_cells,
                          cfl=cfl, t_final=MMS_T_FINAL, left=Side(2.0, 2.0, 1.8e5),
                          right=Side(2.0, 2.0, 1.8e5), x_interface=0.5,
                          boundary=Boundary.PERIODIC, variable_set=variable_set, mode=mode,
                          order=order, limiter=limiter)


def mms_initial_field(grid: Grid1D, config: MmsConfig, variable_set: VariableSet,
                      params: VdwParameters = MMS_GAS) -> CellField:
    """Midpoint-sampled manufactured field stored in ``variable_set``."""
    rho, u, T = mms_exact(grid.centers, 0.0, config)
    P = pressure_from_rho_T(rho, T, params)
    if variable_set.is_total_energy:
        phi = energy_from_rho_T(rho, T, params) + 0.5 * rho * u ** 2
    else:
        phi = phi_from_rho_P(rho, P, variable_set, params)
    return CellField(rho, rho * u, np.asarray(phi, float), variable_set)


def _errors(grid, fld, t, config, params):
    rho, u, T = mms_exact(grid.centers, t, config)
    P = pressure_from_rho_T(rho, T, params)
    th = field_thermo(fld, params)
    l2 = lambda a, b: float(np.sqrt(np.mean((a - b) ** 2)))
    return {"rho": l2(fld.rho, rho), "u": l2(fld.u, u), "T": l2(th.T, T), "P": l2(th.P, P)}


def run_mms_convergence(meshes=MMS_MESHES, order: int = 2,
                        variable_set: VariableSet | str = VariableSet.TEMPERATURE,
                        limiter: str | None = "none", config: MmsConfig | None = None,
                        dt_policy: str = "dx2", cfl: float = 0.5, t_final: float = MMS_T_FINAL,
                        max_steps: int | None = None, jobs: int = 1) -> ConvergenceResult:
    """Manufactured-solution errors on a sequence of doubling meshes.

    Parameters
    ----------
    dt_policy : {"dx2", "cfl"}
        ``"dx2"`` takes the CFL step of the coarsest mesh and scales it by
        ``(dx / dx_coarsest)**2`` so the first-order temporal error does not
        mask the spatial rate; ``"cfl"`` uses the plain CFL step per mesh.
    jobs : int
        Meshes are independent; ``jobs > 1`` runs them in worker processes.

    Errors are L2 norms at cell midpoints, divided by the coarsest-mesh
    error of the same variable; rates are ``log2`` of successive ratios.
    """
    config = config or MmsConfig()
    vs = VariableSet.parse(variable_set)
    mode = Mode.REFERENCE_ET if vs.is_total_energy else Mode.SECANT
    meshes = [int(m) for m in meshes]
    if len(meshes) < 2:
        raise ValueError("need at least two meshes")
    dt0 = None
    if dt_policy == "dx2":
        case0 = _mms_case(meshes[0], order, vs, limiter, mode, cfl)
        grid0 = case0.grid()
        fld0 = mms_initial_field(grid0, config, vs)
        from .temporal import cfl_timestep
        dt0 = cfl_timestep(fld0, MMS_GAS, grid0.dx, cfl) * (1.0 / grid0.dx) ** 2
    elif dt_policy != "cfl":
        raise ValueError(f"unknown dt policy {dt_policy!r}")
    tasks = [(n, order, vs, limiter, mode, cfl, config, dt0, t_final, max_steps) for n in meshes]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_mms_single, tasks))
    else:
        outcomes = [_mms_single(task) for task in tasks]
    raw = {k: np.array([o[0][k] for o in outcomes]) for k in ("rho", "u", "T", "P")}
    n_steps = [o[1] for o in outcomes]
    errors, rates = {}, {}
    for name, e in raw.items():
        with np.errstate(divide="ignore", invalid="ignore"):
            errors[name] = (e / e[0]).tolist() if e[0] > 0 else e.tolist()
            ratio = np.array(meshes[1:]) / np.array(meshes[:-1])
            r = np.log(e[:-1] / e[1:]) / np.log(ratio)
        # a constant solution has nothing to converge; report rates as not applicable
        if np.all(e < 1e-12 * (1 + e[0])) or not np.all(e > 0):
            r = np.full(len(meshes) - 1, np.nan)
        rates[name] = r.tolist()
    return ConvergenceResult(meshes, errors, rates, order, n_steps)


def _mms_single(task):
    n, order, vs, limiter, mode, cfl, config, dt_scale, t_final, max_steps = task
    case = replace(_mms_case(n, order, vs, limiter, mode, cfl), t_final=t_final)
    grid = case.grid()
    fld = mms_initial_field(grid, config, vs)
    sources = lambda x, t: mms_sources(x, t, config, MMS_GAS)
    policy = None
    if dt_scale is not None:
        dt = dt_scale * grid.dx ** 2
        policy = lambda f, t: dt
    result = integrate(case, grid, fld, sources=sources, dt_policy=policy, max_steps=max_steps)
    return _errors(grid, result.field, result.t, config, MMS_GAS), result.n_steps


# -- exact Riemann solver for the polytropic ideal gas -------------------------

class VacuumError(ValueError):
    """The initial states generate vacuum; the solution has no star region."""


@dataclass
class RiemannSolution:
    """Exact self-similar solution of the ideal-gas Riemann problem.

    ``left_wave``/``right_wave`` are ``"shock"`` or ``"rarefaction"``.  For a
    shock ``*_speeds`` holds ``(S, S)``; for a fan it holds ``(head, tail)``.
    """

    left: Side
    right: Side
    gamma: float
    p_star: float
    u_star: float
    rho_star_left: float
    rho_star_right: float
    left_wave: str
    right_wave: str
    left_speeds: tuple
    right_speeds: tuple
    iterations: int

    def sample(self, xi):
        """``(rho, u, P)`` at similarity coordinates ``xi = (x - x0) / t``."""
        xi = np.atleast_1d(np.asarray(xi, float))
        g = self.gamma
        L, Rt = self.left, self.right
        rho = np.empty_like(xi)
        u = np.empty_like(xi)
        P = np.empty_like(xi)
        cL = math.sqrt(g * L.P / L.rho)
        cR = math.sqrt(g * Rt.P / Rt.rho)

        left_side = xi <= self.u_star
        # left of contact
        head, tail = self.left_speeds
        outer = left_side & (xi <= head)
        star = left_side & (xi >= tail)
        fan = left_side & ~outer & ~star
        rho[outer], u[outer], P[outer] = L.rho, L.u, L.P
        rho[star], u[star], P[star] = self.rho_star_left, self.u_star, self.p_star
        if np.any(fan):
            z = xi[fan]
            fac = 2 / (g + 1) + (g - 1) / ((g + 1) * cL) * (L.u - z)
            rho[fan] = L.rho * fac ** (2 / (g - 1))
            u[fan] = 2 / (g + 1) * (cL + (g - 1) / 2 * L.u + z)
            P[fan] = L.P * fac ** (2 * g / (g - 1))

        right_side = ~left_side
        head, tail = self.right_speeds
        outer = right_side & (xi >= head)
        star = right_side & (xi <= tail)
        fan = right_side & ~outer & ~star
        rho[outer], u[outer], P[outer] = Rt.rho, Rt.u, Rt.P
        rho[star], u[star], P[star] = self.rho_star_right, self.u_star, self.p_star
        if np.any(fan):
            z = xi[fan]
            fac = 2 / (g + 1) - (g - 1) / ((g + 1) * cR) * (Rt.u - z)
            rho[fan] = Rt.rho * fac ** (2 / (g - 1))
            u[fan] = 2 / (g + 1) * (-cR + (g - 1) / 2 * Rt.u + z)
            P[fan] = Rt.P * fac ** (2 * g / (g - 1))
        return rho, u, P

    def profile(self, x, t, x0=0.0):
        return self.sample((np.asarray(x, float) - x0) / t)


def _pressure_function(p, side: Side, g):
    """Velocity change across one wave and its derivative with respect to ``p``."""
    A = 2 / ((g + 1) * side.rho)
    B = (g - 1) / (g + 1) * side.P
    c = math.sqrt(g * side.P / side.rho)
    if p > side.P:
        root = math.sqrt(A / (p + B))
        return (p - side.P) * root, root * (1 - 0.5 * (p - side.P) / (p + B))
    ratio = p / side.P
    f = 2 * c / (g - 1) * (ratio ** ((g - 1) / (2 * g)) - 1)
    df = 1 / (side.rho * c) * ratio ** (-(g + 1) / (2 * g))
    return f, df


def exact_riemann_ideal(left: Side, right: Side, gamma: float = 1.4, tol: float = 1e-12,
                        max_iter: int = 100) -> RiemannSolution:
    """Solve the ideal-gas Riemann problem exactly.

    Newton iteration on the pressure function, started from the
    two-rarefaction estimate, until the relative pressure change is below
    ``tol``.

    Raises
    ------
    VacuumError
        If the velocity jump opens a vacuum between the two fans.
    """
    g = gamma
    for label, s in (("left", left), ("right", right)):
        if not (s.rho > 0 and s.P > 0):
            raise ValueError(f"{label} state must have positive density and pressure: {s}")
    cL = math.sqrt(g * left.P / left.rho)
    cR = math.sqrt(g * right.P / right.rho)
    du = right.u - left.u
    critical = 2 * (cL + cR) / (g - 1)
    if critical <= du:
        raise VacuumError(f"vacuum generated: 2(cL+cR)/(gamma-1) = {critical:.6g} <= du = {du:.6g}")

    z = (g - 1) / (2 * g)
    p = ((cL + cR - 0.5 * (g - 1) * du) /
         (cL / left.P ** z + cR / right.P ** z)) ** (1 / z)
    p = max(p, 1e-14 * min(left.P, right.P))
    for it in range(1, max_iter + 1):
        fL, dL = _pressure_function(p, left, g)
        fR, dR = _pressure_function(p, right, g)
        step = (fL + fR + du) / (dL + dR)
        p_new = max(p - step, 1e-14 * p)
        change = abs(p_new - p) / (0.5 * (p_new + p))
        p = p_new
        if change < tol:
            break
    else:
        raise RuntimeError(f"exact Riemann solver did not converge in {max_iter} iterations")
    fL, _ = _pressure_function(p, left, g)
    fR, _ = _pressure_function(p, right, g)
    u_star = 0.5 * (left.u + right.u) + 0.5 * (fR - fL)

    gm = (g - 1) / (g + 1)
    if p > left.P:
        rL = left.rho * (p / left.P + gm) / (gm * p / left.P + 1)
        S = left.u - cL * math.sqrt((g + 1) / (2 * g) * p / left.P + (g - 1) / (2 * g))
        lw, ls = "shock", (S, S)
    else:
        rL = left.rho * (p / left.P) ** (1 / g)
        c_star = cL * (p / left.P) ** z
        lw, ls = "rarefaction", (left.u - cL, u_star - c_star)
    if p > right.P:
        rR = right.rho * (p / right.P + gm) / (gm * p / right.P + 1)
        S = right.u + cR * math.sqrt((g + 1) / (2 * g) * p / right.P + (g - 1) / (2 * g))
        rw, rs = "shock", (S, S)
    else:
        rR = right.rho * (p / right.P) ** (1 / g)
        c_star = cR * (p / right.P) ** z
        rw, rs = "rarefaction", (right.u + cR, u_star + c_star)
    return RiemannSolution(left, right, g, p, u_star, rL, rR, lw, rw, ls, rs, it)
