"""Dense-matrix reference integrators for small grids (n <= 64).

Neither path touches the FFT: kinetic energy is an explicit spectral
matrix and exponentials come from ``scipy.linalg.expm``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh, expm

from .model import Grid, SimParams, WaveFunction
from .noise import WienerStep
from .propagator import NumericalError

__all__ = [
    "MAX_ORACLE_N",
    "kinetic_matrix",
    "hamiltonian_matrix",
    "dense_oracle_step",
    "DensityMatrix",
    "master_eq_step",
    "master_eq_evolve",
]

MAX_ORACLE_N = 64
RK4_STEP_FACTOR = 0.5  # substep * spectral radius; RK4 is stable below ~2.8, accurate well below


def _guard(grid: Grid):
    if grid.n > MAX_ORACLE_N:
        raise ValueError(f"dense oracles are limited to n <= {MAX_ORACLE_N} (got {grid.n})")


def kinetic_matrix(grid: Grid) -> np.ndarray:
    """Position-basis matrix of p^2/2 built from explicit plane waves.

    Uses the same momentum set as the grid (integers -n/2 .. n/2-1 times kbar).
    """
    _guard(grid)
    n = grid.n
    m = np.arange(-(n // 2), n // 2)
    waves = np.exp(1j * np.outer(grid.x, m)) / np.sqrt(n)  # columns: orthonormal plane waves
    energies = 0.5 * (grid.kbar * m) ** 2
    return (waves * energies) @ waves.conj().T


def hamiltonian_matrix(grid: Grid, params: SimParams, t: float) -> np.ndarray:
    return kinetic_matrix(grid) - np.diag(params.xi_at(t) * np.cos(grid.x))


def dense_oracle_step(psi: WaveFunction, t: float, dt: float, w: WienerStep,
                      params: SimParams) -> WaveFunction:
    """Reference Strang step using matrix exponentials of the full generators."""
    grid = psi.grid
    _guard(grid)
    if w.dt != dt:
        raise ValueError("Wiener step drawn for a different dt")
    kb = grid.kbar
    half_kin = expm(-1j * kinetic_matrix(grid) * (dt / 2) / kb)
    a = half_kin @ psi.amps
    tm = t + dt / 2
    J = -np.cos(grid.x)
    weights = (a.conj() * a).real
    jbar = float(weights @ J / weights.sum())
    dJ = J - jbar
    D_t = params.D_at(tm)
    # -i V dt / kbar with the stochastic effective potential
    gen = 1j * params.xi_at(tm) * np.cos(grid.x) * dt / kb
    gen = gen - D_t * dJ**2 * (dt + w.dW**2) + np.sqrt(2 * D_t) * dJ * w.dW
    a = expm(np.diag(gen)) @ a
    a = a / np.sqrt(np.vdot(a, a).real * grid.dx)
    a = half_kin @ a
    return WaveFunction(grid, a, t + dt)


@dataclass
class DensityMatrix:
    """Position-basis density matrix rho(x_i, x_j), normalised as trace * dx = 1."""

    grid: Grid
    rho: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        _guard(self.grid)
        self.rho = np.asarray(self.rho, dtype=complex)

    @classmethod
    def from_states(cls, states, grid: Grid, time: float = 0.0) -> "DensityMatrix":
        """Equal-weight mixture of pure states given as rows of amplitudes."""
        a = np.atleast_2d(np.asarray(states))
        rho = a.T @ a.conj() / a.shape[0]
        return cls(grid, rho, time)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real * self.grid.dx)

    @property
    def purity(self) -> float:
        return float(np.sum(np.abs(self.rho) ** 2).real * self.grid.dx**2)

    def matrix(self) -> np.ndarray:
        """Unit-trace matrix in the orthonormal basis sqrt(dx) |x_j>."""
        return self.rho * self.grid.dx

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)) * self.grid.dx)

    def min_eigenvalue(self) -> float:
        m = self.matrix()
        return float(eigvalsh(0.5 * (m + m.conj().T))[0])

    def trace_distance(self, other: "DensityMatrix") -> float:
        diff = self.matrix() - other.matrix()
        return float(0.5 * np.sum(np.abs(eigvalsh(0.5 * (diff + diff.conj().T)))))


def _rhs(rho, H, dJ2, D_t, kb):
    return (-1j / kb) * (H @ rho - rho @ H) - D_t * dJ2 * rho


def master_eq_step(dm: DensityMatrix, t: float, dt: float, params: SimParams) -> DensityMatrix:
    """Advance the unconditional master equation by ``dt`` with classical RK4.

    ``d rho/dt = -(i/kbar)[H0(t), rho] - D(t) [J, [J, rho]]``; in position
    space the double commutator is ``(cos x - cos x')^2 rho(x, x')``.  The step
    is split into enough RK4 substeps to stay inside the stability region.
    """
    grid = dm.grid
    _guard(grid)
    kb = grid.kbar
    T = kinetic_matrix(grid)
    c = np.cos(grid.x)
    dJ2 = (c[:, None] - c[None, :]) ** 2
    xi_max = params.xi * (1 + 2 * params.epsilon)
    rate = (0.5 * (grid.kbar * grid.n / 2) ** 2 + xi_max) * 2 / kb + 4 * params.D * (1 + 2 * params.epsilon)
    n_sub = max(1, int(np.ceil(abs(dt) * rate / RK4_STEP_FACTOR)))
    h = dt / n_sub
    rho = dm.rho.copy()
    tr0 = np.trace(rho).real
    for k in range(n_sub):
        ts = t + k * h
        H0 = T - np.diag(params.xi_at(ts) * c)
        Hm = T - np.diag(params.xi_at(ts + h / 2) * c)
        H1 = T - np.diag(params.xi_at(ts + h) * c)
        D0, Dm, D1 = params.D_at(ts), params.D_at(ts + h / 2), params.D_at(ts + h)
        k1 = _rhs(rho, H0, dJ2, D0, kb)
        k2 = _rhs(rho + 0.5 * h * k1, Hm, dJ2, Dm, kb)
        k3 = _rhs(rho + 0.5 * h * k2, Hm, dJ2, Dm, kb)
        k4 = _rhs(rho + h * k3, H1, dJ2, D1, kb)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.trace(rho).real - tr0) * grid.dx
    if drift > 1e-6 or not np.all(np.isfinite(rho)):
        raise NumericalError(
            f"master equation trace drift {drift:.3e} over step t={t:g}, dt={dt:g} "
            f"({n_sub} substeps)"
        )
    return DensityMatrix(grid, rho, dm.time + dt)


def master_eq_evolve(dm: DensityMatrix, t0: float, n_steps: int, dt: float,
                     params: SimParams) -> DensityMatrix:
    t = t0
    for _ in range(n_steps):
        dm = master_eq_step(dm, t, dt, params)
        t += dt
    return dm
