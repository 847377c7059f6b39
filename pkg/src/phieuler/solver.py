"""Time loop tying together the spatial residuals, time update and diagnostics."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cases import CaseDefinition, initialize
from .diagnostics import EosCallCounters, ImbalanceLedger, SecantAccumulator, SecantStats
from .eos import VdwParameters
from .grid import Boundary, CellField, Grid1D, field_thermo, total_energy
from .temporal import Mode, RhoBar, cfl_timestep, step


@dataclass
class RunResult:
    case: CaseDefinition
    grid: Grid1D
    field: CellField
    t: float
    n_steps: int
    ledger: ImbalanceLedger
    counters: EosCallCounters
    secant: SecantStats
    snapshots: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def imbalance(self) -> float:
        return self.ledger.final

    def profiles(self, fld: CellField | None = None) -> dict:
        return profiles(self.grid, fld if fld is not None else self.field, self.case.eos)

    def summary(self) -> dict:
        return {"case": self.case.name, "mode": self.case.mode.value,
                "variable_set": self.case.variable_set.value, "order": self.case.order,
                "rhobar": self.case.rhobar.value, "n_cells": self.grid.n_cells,
                "t_final": self.t, "n_steps": self.n_steps,
                "imbalance_final": self.imbalance,
                "accumulation_bound": accumulation_bound(self.grid.n_cells, self.n_steps),
                "eos_calls": self.counters.as_dict(), "secant": self.secant.as_dict(),
                "wall_time_s": self.wall_time}


def accumulation_bound(n_cells: int, n_steps: int) -> float:
    """Worst-case round-off accumulation ``n_cells * n_steps * 8 eps``."""
    return n_cells * n_steps * 8.0 * np.finfo(float).eps


def profiles(grid: Grid1D, fld: CellField, params: VdwParameters) -> dict:
    th = field_thermo(fld, params)
    return {"x": grid.centers, "rho": fld.rho, "u": fld.u, "P": th.P, "T": th.T,
            "e": th.e, "Gamma": th.Gamma, "Z": th.Z}


def run(case: CaseDefinition, snapshot_times=(), max_steps: int | None = None,
        sources=None, on_step=None) -> RunResult:
    """Integrate ``case`` to its final time.

    ``sources(x, t)`` may return per-cell source terms; ``on_step(n, t, field)``
    is called after every accepted step.
    """
    grid, fld = initialize(case)
    return integrate(case, grid, fld, snapshot_times, max_steps, sources, on_step)


def integrate(case: CaseDefinition, grid: Grid1D, fld: CellField, snapshot_times=(),
              max_steps=None, sources=None, on_step=None, dt_policy=None) -> RunResult:
    params = case.eos
    counters = EosCallCounters()
    secant = SecantAccumulator()
    ledger = ImbalanceLedger(float(np.sum(total_energy(fld, params)) * grid.dx), grid.length)
    pending = sorted(t for t in snapshot_times if 0 <= t <= case.t_final)
    snapshots = []
    t, n = 0.0, 0
    start = time.perf_counter()
    while t < case.t_final * (1 - 1e-14):
        while pending and pending[0] <= t:
            snapshots.append((t, fld.copy()))
            pending.pop(0)
        if max_steps is not None and n >= max_steps:
            break
        if dt_policy is None:
            dt = cfl_timestep(fld, params, grid.dx, case.cfl, counters)
        else:
            dt = dt_policy(fld, t)
        if pending:
            dt = min(dt, pending[0] - t)
        dt = min(dt, case.t_final - t)
        src = sources(grid.centers, t) if sources is not None else None
        result = step(fld, params, case.boundary, dt, grid.dx, case.mode, case.order,
                      case.limiter, case.rhobar, counters, src)
        fld = result.field
        t += dt
        n += 1
        res = result.residuals
        ledger.record_step(dt, res.flux_left[2], res.flux_right[2],
                           float(np.sum(total_energy(fld, params)) * grid.dx))
        if case.mode is Mode.SECANT:
            secant.add(result.report)
        if on_step is not None:
            on_step(n, t, fld)
    if pending and pending[0] <= t * (1 + 1e-12):
        snapshots.append((t, fld.copy()))
    return RunResult(case, grid, fld, t, n, ledger, counters, secant.stats(), snapshots,
                     time.perf_counter() - start)
