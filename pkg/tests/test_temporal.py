import numpy as np
import pytest

from phieuler.cases import initialize, load_case
from phieuler.diagnostics import EosCallCounters
from phieuler.eos import VariableSet, VdwParameters, energy_from, state_from
from phieuler.grid import Boundary, CellField, convert, total_energy
from phieuler.spatial import ResidualSet
from phieuler.temporal import (CellContext, LinearizationPoint, Mode, PositivityError, RhoBar,
                               cfl_timestep, phi_residual, phi_update, secant_search, step,
                               update_mass_momentum)

IDEAL = VdwParameters.ideal(R=1.0, gamma=1.4)
N2 = VdwParameters(a=173.943088, b=1.37851912e-3, R=296.8, delta=0.4)


def residuals(n, rho=0.0, rhou=0.0, Et=0.0):
    z = np.zeros(n)
    return ResidualSet(z + rho, z + rhou, z + Et, np.zeros(3), np.zeros(3))


def test_mass_momentum_update():
    rho, rhou = update_mass_momentum(np.array([1.0]), np.array([0.5]),
                                     residuals(1, rho=2.0, rhou=-1.0), 0.01, 0.1)
    assert rho[0] == pytest.approx(1.0 - 0.1 * 2.0)
    assert rhou[0] == pytest.approx(0.5 + 0.1)
    with pytest.raises(PositivityError) as exc:
        update_mass_momentum(np.array([2.0, 0.01]), np.zeros(2), residuals(2, rho=1.0), 0.1, 0.1)
    assert exc.value.cells == (1,)


def test_phi_residual_examples_and_sign():
    point = LinearizationPoint(np.array([1.0]), np.array([2.0]), np.array([4.0]), np.array([3.0]))
    # quiescent cell with no energy flux needs no phi change
    assert phi_residual(point, 0.0, 0.0, 0.0, 0.1, 0.01)[0] == 0.0
    # pure energy inflow: Phi_phi = Phi_Et / omega
    assert phi_residual(point, 0.0, 0.0, 8.0, 0.1, 0.01)[0] == pytest.approx(2.0)
    # a density rise at fixed energy lowers phi (positive residual)
    val = phi_residual(point, 0.5, 0.0, 0.0, 0.1, 0.01)[0]
    assert val == pytest.approx(0.01 * 3.0 * 0.5 / (4.0 * 0.1))
    assert phi_update(2.0, val, 0.1, 0.01) < 2.0
    with pytest.raises(ZeroDivisionError):
        phi_residual(LinearizationPoint(point.rho_bar, point.phi_bar, np.zeros(1), point.E_rho_bar),
                     0.0, 0.0, 1.0, 0.1, 0.01)


def _context(vs, rng, n=40, params=N2, rhobar=RhoBar.MEAN):
    rho_n = rng.uniform(10, 30, n)
    T_n = rng.uniform(260, 350, n)
    rho_1 = rho_n * (1 + rng.uniform(-0.02, 0.02, n))
    phi_n = state_from(rho_n, T_n, VariableSet.TEMPERATURE, params).value_of(vs)
    E_n = energy_from(rho_n, phi_n, vs, params)
    return CellContext(rho_n, rho_1, phi_n, E_n, rng.uniform(-50, 50, n),
                       rng.uniform(-1e8, 1e8, n), rhobar.of(rho_n, rho_1), 1e-6, 5e-3, vs,
                       params)


def test_phi_e_root_is_midpoint():
    ctx = _context(VariableSet.SPECIFIC_ENERGY, np.random.default_rng(0))
    phi1, report = secant_search(ctx)
    # E = rho e is bilinear, so the root is the mean of old and new e
    _, F = ctx.evaluate(0.5 * (ctx.phi_n + phi1))
    assert np.max(np.abs(F)) < 1e-13
    assert report.converged.all() and report.iterations.max() <= 1


def test_quiescent_defect_is_zero():
    rho = np.full(3, 20.0)
    phi = np.full(3, 300.0)
    E = energy_from(rho, phi, VariableSet.TEMPERATURE, N2)
    ctx = CellContext(rho, rho.copy(), phi, E, np.zeros(3), np.zeros(3), rho, 1e-6, 5e-3,
                      VariableSet.TEMPERATURE, N2)
    phi1, F = ctx.evaluate(phi)
    np.testing.assert_array_equal(phi1, phi)
    np.testing.assert_array_equal(F, 0.0)


@pytest.mark.parametrize("vs", [v for v in VariableSet if not v.is_total_energy])
def test_secant_restores_energy_balance(vs):
    ctx = _context(vs, np.random.default_rng(3))
    phi1, report = secant_search(ctx)
    assert (report.converged | report.flat).all()
    E1 = energy_from(ctx.rho_np1, phi1, vs, N2)
    target = ctx.E_n - ctx.delta_ke - ctx.dt / ctx.volume * ctx.Phi_Et
    assert np.max(np.abs(E1 - target) / np.abs(ctx.E_n)) < 1e-12


def test_defect_monotone_on_n2_initial_cells():
    case = load_case("n2_vdw", n_cells=40)
    grid, f = initialize(case)
    dt = cfl_timestep(f, case.eos, grid.dx, case.cfl)
    res = step(f, case.eos, case.boundary, dt, grid.dx).residuals
    rho1 = f.rho - dt / grid.dx * res.rho
    rhou1 = f.rhou - dt / grid.dx * res.rhou
    ctx = CellContext(f.rho, rho1, f.phi, energy_from(f.rho, f.phi, f.variable_set, case.eos),
                      0.5 * rhou1 ** 2 / rho1, res.Et, 0.5 * (f.rho + rho1), dt, grid.dx,
                      f.variable_set, case.eos)
    active = np.flatnonzero(np.abs(res.Et) > 0)
    grid_T = np.linspace(0.9, 1.1, 41)[:, None] * f.phi[active]
    F = np.array([ctx.take(active).evaluate(row)[1] for row in grid_T])
    d = np.diff(F, axis=0)
    # F is monotone in the linearization temperature cell by cell
    assert all(np.all(c >= 0) or np.all(c <= 0) for c in d.T)


def test_cfl_timestep_ideal_example():
    f = CellField(np.ones(4), np.zeros(4), np.full(4, 1.0), VariableSet.PRESSURE)
    assert cfl_timestep(f, IDEAL, 0.01, 0.1) == pytest.approx(8.4515e-4, rel=1e-4)
    g = convert(f, VariableSet.TOTAL_ENERGY, IDEAL)
    assert cfl_timestep(g, IDEAL, 0.01, 0.1) == pytest.approx(8.4515e-4, rel=1e-4)


def _uniform(vs, n=16):
    f = CellField(np.full(n, 20.0), np.full(n, 20.0 * 30.0), np.full(n, 300.0),
                  VariableSet.TEMPERATURE)
    return convert(f, vs, N2)


@pytest.mark.parametrize("mode", list(Mode))
@pytest.mark.parametrize("boundary", list(Boundary))
def test_uniform_data_unchanged(mode, boundary):
    vs = VariableSet.TOTAL_ENERGY if mode is Mode.REFERENCE_ET else VariableSet.PRESSURE
    f = _uniform(vs)
    g = step(f, N2, boundary, 1e-5, 5e-3, mode).field
    for a, b in ((g.rho, f.rho), (g.rhou, f.rhou), (g.phi, f.phi)):
        np.testing.assert_allclose(a, b, rtol=1e-14)


def test_zero_residual_keeps_field():
    f = _uniform(VariableSet.SPECIFIC_ENTROPY)
    g = step(f, N2, Boundary.PERIODIC, 1e-6, 5e-3).field
    np.testing.assert_allclose(g.phi, f.phi, rtol=1e-14, atol=1e-14 * np.abs(f.phi).max())
    with pytest.raises(ValueError):
        step(f, N2, Boundary.PERIODIC, 0.0, 5e-3)


def test_mode_variable_mismatch():
    with pytest.raises(ValueError):
        step(_uniform(VariableSet.TEMPERATURE), N2, Boundary.PERIODIC, 1e-6, 5e-3,
             Mode.REFERENCE_ET)
    with pytest.raises(ValueError):
        step(_uniform(VariableSet.TOTAL_ENERGY), N2, Boundary.PERIODIC, 1e-6, 5e-3, Mode.SECANT)


def test_positivity_error_on_huge_step():
    case = load_case("sod", n_cells=20)
    grid, f = initialize(case)
    with pytest.raises(PositivityError):
        step(f, case.eos, case.boundary, 50.0 * cfl_timestep(f, case.eos, grid.dx, 1.0), grid.dx)


def test_secant_step_conserves_and_counts():
    case = load_case("n2_vdw", n_cells=200)
    grid, f = initialize(case)
    counters = EosCallCounters()
    dt = cfl_timestep(f, case.eos, grid.dx, case.cfl)
    r = step(f, case.eos, case.boundary, dt, grid.dx, counters=counters)
    before = np.sum(total_energy(f, case.eos)) * grid.dx
    after = np.sum(total_energy(r.field, case.eos)) * grid.dx
    flux = dt * (r.residuals.flux_right[2] - r.residuals.flux_left[2])
    assert abs(after - before + flux) / before < 1e-14 * 200
    assert counters.secant_calls > 0 and counters.riemann_calls > 0
