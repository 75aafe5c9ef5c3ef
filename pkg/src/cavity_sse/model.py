"""Model constants, the periodic grid and initial states.

All dynamics run in scaled units: time in modulation periods over 2*pi,
position as 2*k_L*x and a dimensionless Planck constant ``kbar``.  The
scaled Hamiltonian is ``H0 = p**2/2 - xi*(1 - 2*eps*cos t)*cos x`` and the
measured observable is ``J = -cos x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

__all__ = [
    "PhysicalParams",
    "SimParams",
    "Grid",
    "WaveFunction",
    "dimensionless_from_physical",
    "modulation_factor",
    "gaussian_state",
    "measurement_operator",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters of the atom-cavity system (SI, rates in rad/s).

    ``min_detuning_ratio`` and ``max_drive_ratio`` encode the large-detuning
    and weak-drive assumptions behind adiabatic elimination.
    """

    g: float
    E0: float
    Delta: float
    kappa: float
    kL: float
    M: float
    omega: float
    min_detuning_ratio: float = 10.0
    max_drive_ratio: float = 0.1

    def __post_init__(self):
        for name in ("g", "E0", "Delta", "kappa", "kL", "M", "omega"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.Delta < self.min_detuning_ratio * self.g:
            raise ValueError(
                "large-detuning assumption violated: need Delta >= "
                f"{self.min_detuning_ratio:g}*g (Delta={self.Delta:g}, g={self.g:g})"
            )
        if self.E0 / self.kappa > self.max_drive_ratio:
            raise ValueError(
                "weak-drive assumption violated: need E0/kappa <= "
                f"{self.max_drive_ratio:g} (got {self.E0 / self.kappa:g})"
            )

    @property
    def diffusion(self) -> float:
        """Measurement diffusion constant D = 2 g^4 E0^2 / (Delta^2 kappa^3), in 1/s."""
        return 2 * self.g**4 * self.E0**2 / (self.Delta**2 * self.kappa**3)

    @property
    def chi(self) -> float:
        """Light-shift rate chi = 2 g^2 E0^2 / (Delta kappa^2), in 1/s."""
        return 2 * self.g**2 * self.E0**2 / (self.Delta * self.kappa**2)


@dataclass(frozen=True)
class SimParams:
    """Dimensionless simulation parameters.

    Parameters
    ----------
    kbar : float
        Scaled Planck constant.
    xi : float
        Well depth of the scaled potential ``-xi cos x``.
    D : float
        Scaled measurement strength (diffusion constant).
    epsilon : float
        Modulation depth; the drive intensity follows ``1 - 2 eps cos t``.
    steps_per_period, n_periods : int
        Uniform time step is ``2*pi/steps_per_period``.
    grid_size : int
        Number of position points, a power of two >= 16.
    seed : int
        Master seed for all noise streams.
    """

    kbar: float = 0.25
    xi: float = 1.2
    D: float = 0.001
    epsilon: float = 0.2
    steps_per_period: int = 200
    n_periods: int = 200
    grid_size: int = 256
    seed: int = 0
    provenance: PhysicalParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.kbar > 0:
            raise ValueError(f"kbar must be > 0, got {self.kbar!r}")
        if not self.xi >= 0:
            # xi = 0 is the free particle, reachable from zero coupling
            raise ValueError(f"xi must be >= 0, got {self.xi!r}")
        if not self.D >= 0:
            raise ValueError(f"D must be >= 0, got {self.D!r}")
        if not 0 <= self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in [0, 0.5), got {self.epsilon!r}")
        if int(self.steps_per_period) != self.steps_per_period or self.steps_per_period < 1:
            raise ValueError("steps_per_period must be a positive integer")
        if int(self.n_periods) != self.n_periods or self.n_periods < 0:
            raise ValueError("n_periods must be a non-negative integer")
        n = self.grid_size
        if int(n) != n or n < 16 or n & (n - 1):
            raise ValueError(f"grid_size must be a power of two >= 16, got {n!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def dt(self) -> float:
        return 2 * np.pi / self.steps_per_period

    def xi_at(self, t):
        return self.xi * modulation_factor(t, self.epsilon)

    def D_at(self, t):
        return self.D * modulation_factor(t, self.epsilon)


def dimensionless_from_physical(pp: PhysicalParams, **overrides) -> SimParams:
    """Convert laboratory parameters into scaled simulation parameters.

    ``kbar = 4 hbar kL^2/(M omega)``, ``D~ = D/omega`` and
    ``xi = 4 kL^2 hbar chi/(M omega^2)``.  Remaining ``SimParams`` fields
    may be given as keyword overrides.
    """
    hbar = constants.hbar
    kbar = 4 * hbar * pp.kL**2 / (pp.M * pp.omega)
    xi = 4 * pp.kL**2 * hbar * pp.chi / (pp.M * pp.omega**2)
    D = pp.diffusion / pp.omega
    return SimParams(kbar=kbar, xi=xi, D=D, provenance=pp, **overrides)


def modulation_factor(t, epsilon):
    """Intensity modulation ``1 - 2 eps cos t`` shared by xi(t) and D(t)."""
    return 1.0 - 2.0 * epsilon * np.cos(t)


def measurement_operator(x):
    """Position representation of the measured observable J = -cos x."""
    return -np.cos(x)


@dataclass(frozen=True, eq=False)
class Grid:
    """Periodic position grid on [-pi, pi) and its FFT-ordered momenta.

    Momenta are ``kbar * m`` for integer ``m`` in FFT order, so the spacing is
    exactly ``kbar`` and ``p`` lines up with ``np.fft.fft`` output.
    """

    n: int
    kbar: float

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError("grid needs an even number of points")
        x = -np.pi + 2 * np.pi * np.arange(self.n) / self.n
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        x.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "m", m)
        p = self.kbar * m
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_params(cls, params: SimParams) -> "Grid":
        return cls(params.grid_size, params.kbar)

    @property
    def dx(self) -> float:
        return 2 * np.pi / self.n

    @property
    def dp(self) -> float:
        return self.kbar

    def same_as(self, other: "Grid") -> bool:
        return self is other or (self.n == other.n and self.kbar == other.kbar)

    def __eq__(self, other):
        return isinstance(other, Grid) and self.same_as(other)

    def __hash__(self):
        return hash((self.n, self.kbar))


@dataclass
class WaveFunction:
    """Conditional state ``psi(x_j)`` on a grid, normalised so sum |psi|^2 dx = 1."""

    grid: Grid
    amps: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (self.grid.n,):
            raise ValueError(f"amplitudes must have shape ({self.grid.n},)")

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amps.copy(), self.time)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2) * self.grid.dx))

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amps / self.norm, self.time)

    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def momentum_probabilities(self) -> np.ndarray:
        """Probability of each grid momentum (FFT order), summing to one."""
        prob = np.abs(np.fft.fft(self.amps)) ** 2
        return prob / prob.sum()

    def expect_x(self, f) -> float:
        """Expectation of a position-diagonal observable given as values or callable."""
        values = f(self.grid.x) if callable(f) else f
        rho = self.density()
        return float(np.sum(values * rho) / np.sum(rho))

    def expect_p(self, power: int = 1) -> float:
        return float(np.sum(self.grid.p**power * self.momentum_probabilities()))

    def _circular_offsets(self):
        rho = self.density()
        rho = rho / rho.sum()
        center = np.angle(np.sum(rho * np.exp(1j * self.grid.x)))
        return rho, center, _wrap(self.grid.x - center)

    def mean_x(self) -> float:
        """Mean position, measured by minimum image around the circular mean."""
        rho, center, d = self._circular_offsets()
        return float(_wrap(center + np.sum(rho * d)))

    def var_x(self) -> float:
        """Position variance using the minimum-image distance from the circular mean."""
        rho, _, d = self._circular_offsets()
        mu = np.sum(rho * d)
        return float(np.sum(rho * (d - mu) ** 2))

    def var_p(self) -> float:
        return self.expect_p(2) - self.expect_p(1) ** 2

    def energy(self, params: SimParams, t: float | None = None) -> float:
        """Expectation of ``p**2/2 - xi(t) cos x``."""
        t = self.time if t is None else t
        return 0.5 * self.expect_p(2) - params.xi_at(t) * self.expect_x(np.cos(self.grid.x))


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def gaussian_state(grid: Grid, x0: float, p0: float, sigma_x: float,
                   kbar: float | None = None) -> WaveFunction:
    """Minimum-uncertainty Gaussian with position variance ``sigma_x``.

    Evaluated with the minimum-image displacement ``d = wrap(x - x0)`` as
    ``exp(-d**2/(4 sigma_x) + i p0 d/kbar)``; this differs from using ``x``
    in the phase only by a global phase when ``p0/kbar`` is an integer.
    """
    kbar = grid.kbar if kbar is None else kbar
    if not sigma_x > 0:
        raise ValueError("sigma_x must be positive")
    if abs(x0) > np.pi:
        raise ValueError("x0 must lie in [-pi, pi]")
    # Mass of |psi|^2 outside one period around x0.
    tail = _normal_tail(np.pi / np.sqrt(sigma_x))
    if tail > 1e-6:
        raise ValueError(
            f"sigma_x={sigma_x:g} too wide for the 2*pi domain "
            f"(wrap-around weight {tail:.2e} > 1e-6)"
        )
    d = _wrap(grid.x - x0)
    amps = np.exp(-d**2 / (4 * sigma_x) + 1j * p0 * d / kbar)
    return WaveFunction(grid, amps).normalized()


def _normal_tail(z: float) -> float:
    from scipy.special import erfc

    return float(erfc(z / np.sqrt(2)))
