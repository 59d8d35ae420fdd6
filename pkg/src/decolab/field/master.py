"""Explicit fourth-order time stepping of the overdamped-field master equation
in one dimension (hbar = 1):

    d rho/dt = -i [H(x) - H(x')] rho + (1/M) V_d(|x-x'|) (x-x') (d_x - d_x') rho
               - V_n(|x-x'|) rho

on a uniform (x, x') lattice with centred differences and rho = 0 outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import DomainError
from .kernels import DampedPropagatorSpec, FieldSpec, overdamped_Vn_Vd

#: RK4 is stable on the imaginary axis up to 2 sqrt(2); keep a margin.
RK4_STABILITY_LIMIT = 2.5


@dataclass(frozen=True)
class DensityGrid:
    """rho(x, x') on a square uniform lattice; values[i, j] = rho(x_i, x_j)."""

    x_start: float
    step: float
    values: np.ndarray
    M: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 3:
            raise DomainError("density grid must be square with >= 3 points")
        if not self.step > 0:
            raise DomainError("grid step must be > 0")
        if not self.M > 0:
            raise DomainError("mass must be > 0")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.x_start + self.step * np.arange(self.n)

    def trace(self) -> complex:
        return complex(np.trace(self.values) * self.step)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.values - self.values.conj().T)))

    @classmethod
    def from_wavefunctions(cls, x: np.ndarray, psis, weights=None, M: float = 1.0) -> "DensityGrid":
        """Mixture sum_j w_j psi_j(x) psi_j(x')^*, normalized to unit trace."""
        psis = [np.asarray(p, dtype=complex) for p in psis]
        w = np.ones(len(psis)) if weights is None else np.asarray(weights, dtype=float)
        rho = sum(wj * np.outer(p, p.conj()) for wj, p in zip(w, psis))
        h = float(x[1] - x[0])
        rho = rho / (np.trace(rho).real * h)
        return cls(float(x[0]), h, rho, M)


@dataclass(frozen=True)
class MasterCoefficients:
    """V_n and V_d sampled at lags r_j = j * step, j = 0 .. n-1."""

    step: float
    vn: np.ndarray
    vd: np.ndarray

    def without_dissipation(self) -> "MasterCoefficients":
        return MasterCoefficients(self.step, self.vn, np.zeros_like(self.vd))


def master_coefficients(fspec: FieldSpec, pspec: DampedPropagatorSpec, step: float,
                        n: int) -> MasterCoefficients:
    """Tabulate V_n, V_d on the |x - x'| lattice of an n-point grid."""
    if fspec.n != 1:
        raise DomainError("the grid evolver is one-dimensional (n = 1)")
    vn = np.empty(n)
    vd = np.empty(n)
    for j in range(n):
        vn[j], vd[j] = overdamped_Vn_Vd(fspec, pspec, j * step)
    return MasterCoefficients(step, vn, vd)


def _lag_matrix(c: MasterCoefficients, n: int):
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    if c.vn.size < n:
        raise DomainError("coefficient table shorter than the grid")
    return c.vn[idx], c.vd[idx]


def _d1(r: np.ndarray, h: float, axis: int) -> np.ndarray:
    out = np.zeros_like(r)
    if axis == 0:
        out[1:-1] = r[2:] - r[:-2]
        out[0] = r[1]
        out[-1] = -r[-2]
    else:
        out[:, 1:-1] = r[:, 2:] - r[:, :-2]
        out[:, 0] = r[:, 1]
        out[:, -1] = -r[:, -2]
    return out / (2.0 * h)


def _d2(r: np.ndarray, h: float, axis: int) -> np.ndarray:
    out = -2.0 * r
    if axis == 0:
        out[1:] += r[:-1]
        out[:-1] += r[1:]
    else:
        out[:, 1:] += r[:, :-1]
        out[:, :-1] += r[:, 1:]
    return out / (h * h)


def stability_number(grid: DensityGrid, coeffs: MasterCoefficients, hamiltonian: str,
                     Omega: float, dt: float) -> float:
    """dt times a bound on the spectral radius of the discretized generator."""
    h, M = grid.step, grid.M
    x = grid.x
    rad = 0.0
    if hamiltonian != "none":
        rad += 4.0 / (M * h * h)
    if hamiltonian == "harmonic":
        rad += 0.5 * M * Omega ** 2 * float(np.max(x * x))
    vn, vd = _lag_matrix(coeffs, grid.n)
    sep = np.abs(x[:, None] - x[None, :])
    rad += float(np.max(np.abs(vd) * sep)) * 2.0 / (M * h)
    rad += float(np.max(np.abs(vn)))
    return dt * rad


def evolve_master(grid: DensityGrid, coeffs: MasterCoefficients, dt: float, steps: int,
                  hamiltonian: str = "free", Omega: float = 0.0,
                  monitor: Optional[list] = None) -> DensityGrid:
    """Advance ``grid`` by ``steps`` RK4 steps of size ``dt``.

    ``hamiltonian`` is "none", "free" (p^2/2M) or "harmonic" (adds
    M Omega^2 x^2 / 2).  A step size beyond the explicit stability bound
    is rejected before any work is done.  When ``monitor`` is a list, the
    trace after each step is appended to it.
    """
    if hamiltonian not in ("none", "free", "harmonic"):
        raise DomainError(f"unknown hamiltonian {hamiltonian!r}")
    if not dt > 0 or steps < 0:
        raise DomainError("need dt > 0 and steps >= 0")
    if abs(coeffs.step - grid.step) > 1e-12 * grid.step:
        raise DomainError("coefficient lag step differs from the grid step")
    sn = stability_number(grid, coeffs, hamiltonian, Omega, dt)
    if sn > RK4_STABILITY_LIMIT:
        raise DomainError(
            f"time step too large for the explicit scheme: dt*radius = {sn:.3g} > {RK4_STABILITY_LIMIT}"
        )
    n, h, M = grid.n, grid.step, grid.M
    x = grid.x
    vn, vd = _lag_matrix(coeffs, n)
    sep = x[:, None] - x[None, :]
    drift = vd * sep / M
    pot = None
    if hamiltonian == "harmonic":
        pot = 0.5 * M * Omega ** 2 * (x[:, None] ** 2 - x[None, :] ** 2)
    has_drift = bool(np.any(drift != 0))

    def rhs(r):
        out = -vn * r
        if hamiltonian != "none":
            out = out + (0.5j / M) * (_d2(r, h, 0) - _d2(r, h, 1))
        if pot is not None:
            out = out - 1j * pot * r
        if has_drift:
            out = out + drift * (_d1(r, h, 0) - _d1(r, h, 1))
        return out

    r = grid.values.copy()
    for _ in range(steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * dt * k1)
        k3 = rhs(r + 0.5 * dt * k2)
        k4 = rhs(r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if monitor is not None:
            monitor.append(complex(np.trace(r) * h))
    return DensityGrid(grid.x_start, h, r, M, grid.time + steps * dt)


__all__ = [
    "RK4_STABILITY_LIMIT",
    "DensityGrid",
    "MasterCoefficients",
    "master_coefficients",
    "stability_number",
    "evolve_master",
]
