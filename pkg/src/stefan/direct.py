"""Direct solver: boundary immobilization + explicit finite differences.

The moving domain [0, s(t)] is mapped to the fixed strip xi in [0, 1];
the squared front Z(t) = s(t)^2 is marched together with the temperature.
The explicit step is subject to k <= h_xi^2 * Z / 2 (Von Neumann bound
for the immobilized diffusion term), re-checked every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Optional

import numpy as np
from numba import njit

from .errors import ConfigurationError, StabilityError
from .problem import FreeBoundaryPath, StefanCase


@dataclass(frozen=True)
class BimGrid:
    """Space-time grid for the immobilized scheme."""

    N: int          # spatial panels; nodes xi_i = i/N, i = 0..N
    M_t: int        # time steps
    T: float
    k: float        # time step
    h_xi: float     # spatial step 1/N
    r: float        # k / h_xi^2

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.M_t + 1)


@dataclass(frozen=True)
class TemperatureField:
    """Temperature rows stored at a subset of time steps, plus the full Z march.

    U has one row per stored step (rows indexed by m_stored); Z and Zdot
    cover every step. Storing every row at production resolutions would
    need gigabytes, so rows are decimated.
    """

    grid: BimGrid
    m_stored: np.ndarray      # indices into the full time grid
    t_stored: np.ndarray
    U: np.ndarray             # (len(m_stored), N+1)
    Z: np.ndarray             # (M_t+1,)
    Zdot: np.ndarray
    u_min: float              # running minimum of U over the whole march

    def row(self, m: int) -> np.ndarray:
        """Temperature row at full-grid index m (must be a stored index)."""
        pos = np.searchsorted(self.m_stored, m)
        if pos >= self.m_stored.size or self.m_stored[pos] != m:
            raise ConfigurationError(
                "field.row.notstored", f"time index {m} was not stored (see store_every)"
            )
        return self.U[pos]

    def nearest_stored(self, t: float) -> int:
        """Full-grid index of the stored row closest to time t."""
        return int(self.m_stored[np.argmin(np.abs(self.t_stored - t))])

    def check(self, b: float):
        out = []
        if np.any(np.abs(self.U[:, -1]) > 0):
            out.append("Dirichlet row at xi=1 is not identically zero")
        if self.u_min < -1e-8:
            out.append(f"temperature dipped to {self.u_min:.3e} < -1e-8")
        if np.any(self.Z < b * b - 1e-12):
            out.append("squared front fell below b^2")
        if np.any(np.diff(self.Z) < -1e-12):
            out.append("squared front is not nondecreasing")
        return out


def plan_grid(case: StefanCase, N: int, safety: float = 0.8) -> BimGrid:
    """Pick the minimal step count satisfying k <= safety * h_xi^2 * b^2 / 2.

    Z is nondecreasing, so Z(0) = b^2 is its infimum and the bound holds
    for the whole march; each step re-checks against the current Z anyway.
    """
    if N < 4:
        raise ConfigurationError("config.nx.toosmall", f"need N >= 4, got {N}")
    if not 0 < safety <= 1:
        raise ConfigurationError("config.safety.range", f"safety must be in (0,1], got {safety}")
    h_xi = 1.0 / N
    k_max = 0.5 * safety * h_xi * h_xi * case.b * case.b
    M_t = max(1, ceil(case.T / k_max - 1e-12))
    k = case.T / M_t
    return BimGrid(N=N, M_t=M_t, T=case.T, k=k, h_xi=h_xi, r=k / (h_xi * h_xi))


def front_gradient(u: np.ndarray, h_xi: float) -> float:
    """One-sided 3-point xi-derivative of u at the front node xi=1."""
    return (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h_xi)


def bim_step(u: np.ndarray, z: float, zdot: float, h_val: float, grid: BimGrid, m: int = 0):
    """One explicit update; returns (u_next, z_next, zdot_next).

    u is the current temperature row, z = s^2, zdot its backward-difference
    velocity, h_val the influx at the current time.
    """
    k, h_xi, r = grid.k, grid.h_xi, grid.r
    if k > 0.5 * h_xi * h_xi * z * (1.0 + 1e-12):
        raise StabilityError(m, z, k, 0.5 * h_xi * h_xi * z)
    xi = grid.xi
    un = np.empty_like(u)
    un[0] = (1.0 - 2.0 * r / z) * u[0] + (2.0 * r / z) * u[1] \
        + (2.0 * h_xi * r / np.sqrt(z)) * h_val
    un[1:-1] = u[1:-1] \
        + (r * h_xi * zdot / (4.0 * z)) * xi[1:-1] * (u[2:] - u[:-2]) \
        + (r / z) * (u[2:] - 2.0 * u[1:-1] + u[:-2])
    un[-1] = 0.0
    z_next = z - (k / h_xi) * (3.0 * u[-1] - 4.0 * u[-2] + u[-3])
    return un, z_next, (z_next - z) / k


@njit(cache=True)
def _march(u0, z0, h_vals, k, h_xi, r, n_steps, store_mask, U_store, Z, Zdot):
    n = u0.size - 1
    u = u0.copy()
    un = np.empty_like(u)
    Z[0] = z0
    Zdot[0] = -(3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / h_xi
    row = 0
    if store_mask[0]:
        U_store[row] = u
        row += 1
    u_min = 0.0
    for m in range(n_steps):
        z = Z[m]
        if k > 0.5 * h_xi * h_xi * z * (1.0 + 1e-12):
            return m, u_min
        zdot = Zdot[m]
        hv = h_vals[m]
        un[0] = (1.0 - 2.0 * r / z) * u[0] + (2.0 * r / z) * u[1] \
            + (2.0 * h_xi * r / np.sqrt(z)) * hv
        c1 = r * h_xi * zdot / (4.0 * z)
        c2 = r / z
        for i in range(1, n):
            xi_i = i / n
            un[i] = u[i] + c1 * xi_i * (u[i + 1] - u[i - 1]) \
                + c2 * (u[i + 1] - 2.0 * u[i] + u[i - 1])
        un[n] = 0.0
        Z[m + 1] = z - (k / h_xi) * (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2])
        Zdot[m + 1] = (Z[m + 1] - z) / k
        for i in range(n + 1):
            u[i] = un[i]
            if u[i] < u_min:
                u_min = u[i]
        if store_mask[m + 1]:
            U_store[row] = u
            row += 1
    return -1, u_min


def solve_direct(case: StefanCase, grid: BimGrid, store_every: Optional[int] = None):
    """March the scheme from u0 and Z(0)=b^2.

    Returns (TemperatureField, FreeBoundaryPath); the path carries s and
    sdot at every time step, with sdot = Zdot / (2 sqrt(Z)).
    """
    M_t, N = grid.M_t, grid.N
    if store_every is None:
        store_every = max(1, M_t // 4000)
    times = grid.times
    h_vals = case.influx(times[:-1])
    u0 = np.asarray(case.initial_state(case.b * grid.xi), dtype=float)

    store_mask = np.zeros(M_t + 1, dtype=np.bool_)
    store_mask[::store_every] = True
    store_mask[0] = True
    store_mask[M_t] = True
    m_stored = np.nonzero(store_mask)[0]

    U_store = np.empty((m_stored.size, N + 1))
    Z = np.empty(M_t + 1)
    Zdot = np.empty(M_t + 1)
    fail, u_min = _march(
        u0, case.b * case.b, h_vals, grid.k, grid.h_xi, grid.r,
        M_t, store_mask, U_store, Z, Zdot,
    )
    if fail >= 0:
        raise StabilityError(int(fail), float(Z[fail]), grid.k, 0.5 * grid.h_xi ** 2 * float(Z[fail]))

    field = TemperatureField(
        grid=grid, m_stored=m_stored, t_stored=times[m_stored],
        U=U_store, Z=Z, Zdot=Zdot, u_min=float(u_min),
    )
    s = np.sqrt(Z)
    path = FreeBoundaryPath(t=times, s=s, sdot=Zdot / (2.0 * s))
    return field, path


def energy_residual(case: StefanCase, field: TemperatureField, path: FreeBoundaryPath, m: int) -> float:
    """Defect of the heat balance s(t) = b + int h + int u0 - int u at step m.

    All integrals use composite trapezoid on the solver grids; m must be
    a stored time index.
    """
    u_row = field.row(m)
    t = path.t
    t_m = t[m]
    s_m = path.s[m]
    if m == 0:
        influx_int = 0.0
    else:
        influx_int = float(np.trapezoid(case.influx(t[: m + 1]), t[: m + 1]))
    x0 = case.b * field.grid.xi
    u0_int = float(np.trapezoid(case.initial_state(x0), x0))
    u_int = float(s_m * np.trapezoid(u_row, field.grid.xi))
    return s_m - case.b - influx_int - u0_int + u_int
