"""MUSCL reconstruction, HLLC fluxes and residual assembly.

The stored triple ``(rho, rho*u, phi)`` is reconstructed directly, whatever
``phi`` is.  Residuals follow the outflow convention
``Phi_i = F_{i+1/2} - F_{i-1/2}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .eos import EosDomainError, VariableSet, VdwParameters, admissible, flux_quantities
from .grid import N_GHOST, Boundary, CellField, padded


class FluxError(RuntimeError):
    """Degenerate wave fan in the approximate Riemann solver."""

    def __init__(self, message, faces=()):
        super().__init__(message)
        self.faces = tuple(faces)


@dataclass
class FaceState:
    """Primitive and thermodynamic data on one side of a set of faces."""

    rho: np.ndarray
    u: np.ndarray
    P: np.ndarray
    E: np.ndarray
    c: np.ndarray
    kappa: np.ndarray
    chi: np.ndarray

    @property
    def Et(self):
        return self.E + 0.5 * self.rho * self.u ** 2

    @property
    def H(self):
        return (self.Et + self.P) / self.rho

    @classmethod
    def from_stored(cls, rho, rhou, phi, variable_set, params: VdwParameters):
        u = rhou / rho
        if variable_set.is_total_energy:
            phi, variable_set = (phi - 0.5 * rhou * u) / rho, VariableSet.SPECIFIC_ENERGY
        P, E, c, kappa, chi = flux_quantities(rho, phi, variable_set, params)
        return cls(rho=np.asarray(rho, float), u=u, P=P, E=E, c=c, kappa=kappa, chi=chi)


@dataclass
class RoeAverage:
    rho_hat: np.ndarray
    u_hat: np.ndarray
    H_hat: np.ndarray
    c_hat: np.ndarray
    kappa_hat: np.ndarray
    chi_hat: np.ndarray


@dataclass
class ResidualSet:
    """Per-cell outflow sums and the two domain-boundary fluxes.

    ``flux_left`` and ``flux_right`` hold ``(F_rho, F_rhou, F_Et)`` at the
    first and last face.
    """

    rho: np.ndarray
    rhou: np.ndarray
    Et: np.ndarray
    flux_left: np.ndarray
    flux_right: np.ndarray

    def add_source(self, theta_rho, theta_rhou, theta_Et, volume) -> "ResidualSet":
        return ResidualSet(self.rho - volume * theta_rho, self.rhou - volume * theta_rhou,
                           self.Et - volume * theta_Et, self.flux_left, self.flux_right)


def barth_jespersen(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central slopes and Barth-Jespersen factors on a padded array.

    Returns ``(slope, alpha)`` for cells ``1 .. N-2`` of the last axis; the
    limited face values are ``q_i +/- alpha * slope / 2``.
    """
    qm, q0, qp = q[..., :-2], q[..., 1:-1], q[..., 2:]
    slope = 0.5 * (qp - qm)
    qmax = np.maximum(np.maximum(qm, q0), qp)
    qmin = np.minimum(np.minimum(qm, q0), qp)
    d = 0.5 * np.abs(slope)
    # both faces deviate by +-d, so the tighter of the two bounds decides
    room = np.minimum(qmax - q0, q0 - qmin)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(d > 0, np.minimum(1.0, room / np.where(d > 0, d, 1.0)), 1.0)
    return slope, np.clip(alpha, 0.0, 1.0)


def muscl_faces(q: np.ndarray, order: int = 2, limiter: str | None = "barth-jespersen"):
    """Left/right face values for every interior face of a padded array.

    ``q`` has shape ``(..., n + 2*N_GHOST)``; the result has ``n + 1`` faces,
    face ``f`` separating interior cells ``f - 1`` and ``f``.
    """
    g = N_GHOST
    n = q.shape[-1] - 2 * g
    left_cells = q[..., g - 1:g + n]
    right_cells = q[..., g:g + n + 1]
    if order == 1:
        return left_cells.copy(), right_cells.copy()
    if order != 2:
        raise ValueError("order must be 1 or 2")
    slope, alpha = barth_jespersen(q)
    if limiter is None or limiter == "none":
        alpha = np.ones_like(alpha)
    elif limiter != "barth-jespersen":
        raise ValueError(f"unknown limiter {limiter!r}")
    half = 0.5 * alpha * slope  # cells 1 .. N-2 of the padded array
    qL = left_cells + half[..., g - 2:g - 1 + n]
    qR = right_cells - half[..., g - 1:g + n]
    return qL, qR


def muscl_reconstruct(q: np.ndarray, i: int, side: str, order: int = 2,
                      limiter: str | None = "barth-jespersen"):
    """Face value of padded-array cell ``i`` on its ``"left"`` or ``"right"`` face."""
    if order == 1:
        return q[..., i]
    slope, alpha = barth_jespersen(q[..., i - 1:i + 2])
    if limiter is None or limiter == "none":
        alpha = np.ones_like(alpha)
    sign = 1.0 if side == "right" else -1.0
    return q[..., i] + sign * 0.5 * alpha[..., 0] * slope[..., 0]


def roe_average(left: FaceState, right: FaceState) -> RoeAverage:
    """Generalized Roe state for an arbitrary EoS.

    ``kappa`` and ``chi`` start from the arithmetic means and are corrected
    by the minimum-norm relative perturbation that enforces
    ``dP = chi_hat d(rho) + kappa_hat dE`` exactly.
    """
    sl, sr = np.sqrt(left.rho), np.sqrt(right.rho)
    w = sl + sr
    u_hat = (sl * left.u + sr * right.u) / w
    H_hat = (sl * left.H + sr * right.H) / w
    rho_hat = sl * sr
    kappa_bar = 0.5 * (left.kappa + right.kappa)
    chi_bar = 0.5 * (left.chi + right.chi)
    d_rho = right.rho - left.rho
    d_E = right.E - left.E
    d_P = right.P - left.P
    p1 = chi_bar * d_rho
    p2 = kappa_bar * d_E
    resid = d_P - p1 - p2
    norm = p1 * p1 + p2 * p2
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norm > 0, resid / np.where(norm > 0, norm, 1.0), 0.0)
    chi_hat = chi_bar * (1.0 + scale * p1)
    kappa_hat = kappa_bar * (1.0 + scale * p2)
    c2 = chi_hat + kappa_hat * (H_hat - 0.5 * u_hat ** 2)
    c_fallback = np.maximum(left.c, right.c)
    c_hat = np.where(c2 > 0, np.sqrt(np.where(c2 > 0, c2, 0.0)), c_fallback)
    return RoeAverage(rho_hat, u_hat, H_hat, c_hat, kappa_hat, chi_hat)


def exact_flux(state: FaceState) -> np.ndarray:
    m = state.rho * state.u
    return np.stack([m, m * state.u + state.P, (state.Et + state.P) * state.u])


def _conserved(state: FaceState) -> np.ndarray:
    return np.stack([state.rho, state.rho * state.u, state.Et])


def hllc_flux(left: FaceState, right: FaceState, roe: RoeAverage | None = None) -> np.ndarray:
    """HLLC flux ``(F_rho, F_rhou, F_Et)`` for arrays of face pairs."""
    if roe is None:
        roe = roe_average(left, right)
    SL = np.minimum(left.u - left.c, roe.u_hat - roe.c_hat)
    SR = np.maximum(right.u + right.c, roe.u_hat + roe.c_hat)
    bad = ~(SL < SR)
    if np.any(bad):
        raise FluxError("degenerate HLLC wave fan (S_L >= S_R)", np.flatnonzero(bad))
    mL = left.rho * (SL - left.u)
    mR = right.rho * (SR - right.u)
    S_star = (right.P - left.P + left.u * mL - right.u * mR) / (mL - mR)

    FL, FR = exact_flux(left), exact_flux(right)
    UL, UR = _conserved(left), _conserved(right)

    def star(state, U, S, m):
        fac = m / (S - S_star)
        energy = state.Et / state.rho + (S_star - state.u) * (S_star + state.P / m)
        return fac * np.stack([np.ones_like(S), S_star, energy])

    FsL = FL + SL * (star(left, UL, SL, mL) - UL)
    FsR = FR + SR * (star(right, UR, SR, mR) - UR)
    return np.where(SL >= 0, FL,
                    np.where(S_star >= 0, FsL, np.where(SR > 0, FsR, FR)))


def face_states(field: CellField, params: VdwParameters, boundary: Boundary,
                order: int = 2, limiter: str | None = "barth-jespersen", counters=None):
    """Reconstructed, admissibility-checked left/right face states."""
    q = padded(field, boundary)
    qL, qR = muscl_faces(q, order, limiter)
    n_faces = qL.shape[-1]
    vs = field.variable_set
    if order != 1:
        diagnostics.record(counters, diagnostics.AUXILIARY, 2 * n_faces)
        okL = _admissible_stored(qL, vs, params)
        okR = _admissible_stored(qR, vs, params)
        bad = ~(okL & okR)
        if np.any(bad):
            g = N_GHOST
            qL[:, bad] = q[:, g - 1:g + n_faces - 1][:, bad]
            qR[:, bad] = q[:, g:g + n_faces][:, bad]
    diagnostics.record(counters, diagnostics.RIEMANN, 2 * n_faces)
    left = FaceState.from_stored(qL[0], qL[1], qL[2], vs, params)
    right = FaceState.from_stored(qR[0], qR[1], qR[2], vs, params)
    return left, right


def _admissible_stored(qf, variable_set, params):
    rho, rhou, phi = qf
    if variable_set.is_total_energy:
        with np.errstate(all="ignore"):
            e = (phi - 0.5 * rhou ** 2 / rho) / rho
        return admissible(rho, e, VariableSet.SPECIFIC_ENERGY, params)
    return admissible(rho, phi, variable_set, params)


def face_fluxes(field: CellField, params: VdwParameters, boundary: Boundary,
                order: int = 2, limiter: str | None = "barth-jespersen", counters=None):
    left, right = face_states(field, params, boundary, order, limiter, counters)
    return hllc_flux(left, right)


def assemble_residuals(field: CellField, params: VdwParameters, boundary: Boundary,
                       order: int = 2, limiter: str | None = "barth-jespersen",
                       counters=None) -> ResidualSet:
    """Per-cell residuals ``F_{i+1/2} - F_{i-1/2}`` for all three equations."""
    try:
        F = face_fluxes(field, params, boundary, order, limiter, counters)
    except FluxError as exc:
        cells = sorted({int(f) for face in exc.faces for f in (face - 1, face)
                        if 0 <= f < field.n_cells})
        raise FluxError(f"{exc} at cells {cells[:10]}", exc.faces) from exc
    except EosDomainError as exc:
        raise EosDomainError(f"face state evaluation failed: {exc}") from exc
    res = F[:, 1:] - F[:, :-1]
    return ResidualSet(res[0], res[1], res[2], F[:, 0].copy(), F[:, -1].copy())
