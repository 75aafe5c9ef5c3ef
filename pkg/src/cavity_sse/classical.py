"""Classical conditional dynamics of the modulated pendulum.

    dx = p dt
    dp = -xi(t) sin x dt + sqrt(2 D(t)) kbar sin x dW

The deterministic flow is integrated with the fourth-order Forest-Ruth
composition of kick-drift leapfrog stages, so noise-free runs stay
symplectic and energy-accurate over hundreds of periods.  The noise enters
as a single Euler-Maruyama momentum kick evaluated at the start of the step
(Ito).  Positions are kept unwrapped; wrap them only for display.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SimParams, _wrap
from .noise import INITIAL, NoiseStream, WienerStep

__all__ = [
    "ClassicalState",
    "ClassicalEnsemble",
    "QInitParams",
    "OrbitClass",
    "deterministic_step",
    "sde_step",
    "evolve_ensemble",
    "stroboscopic_portrait",
    "q_variances",
    "sample_q_initial",
    "classify_orbit",
    "CHAOS_THRESHOLD",
]

_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = -(2.0 ** (1.0 / 3.0)) * _W1
DRIFT_COEFFS = (_W1 / 2, (_W0 + _W1) / 2, (_W0 + _W1) / 2, _W1 / 2)
KICK_COEFFS = (_W1, _W0, _W1, 0.0)

CHAOS_THRESHOLD = 0.05  # separation growth per period


@dataclass(frozen=True)
class ClassicalState:
    x: float
    p: float
    time: float = 0.0

    @property
    def wrapped_x(self) -> float:
        return float(_wrap(self.x))

    def energy(self, params: SimParams) -> float:
        return 0.5 * self.p**2 - params.xi_at(self.time) * np.cos(self.x)


@dataclass
class ClassicalEnsemble:
    """Phase-space samples; ``x`` is unwrapped."""

    x: np.ndarray
    p: np.ndarray
    time: float = 0.0

    def __len__(self):
        return len(self.x)

    @property
    def wrapped_x(self) -> np.ndarray:
        return _wrap(self.x)


@dataclass(frozen=True)
class QInitParams:
    """Bivariate Gaussian of independent x and p with the given variances."""

    x0: float
    p0: float
    delta_x: float
    delta_p: float

    def __post_init__(self):
        if not (self.delta_x > 0 and self.delta_p > 0):
            raise ValueError("Q-function variances must be positive")

    @classmethod
    def from_quantum(cls, x0: float, p0: float, sigma_x: float, kbar: float, xi: float,
                     sigma_p: float | None = None) -> "QInitParams":
        if sigma_p is None:
            sigma_p = kbar**2 / (4 * sigma_x)
        dx, dp = q_variances(kbar, xi, sigma_x, sigma_p)
        return cls(x0, p0, dx, dp)


def q_variances(kbar: float, xi: float, sigma_x: float, sigma_p: float) -> tuple[float, float]:
    """Classical variances matched to the quantum initial state.

    ``delta_x = kbar^2/(2 xi) + kbar^2/(4 sigma_x)``,
    ``delta_p = kbar sqrt(xi)/2 + sigma_p``.
    """
    delta_x = kbar**2 / (2 * xi) + kbar**2 / (4 * sigma_x)
    delta_p = kbar * np.sqrt(xi) / 2 + sigma_p
    return delta_x, delta_p


def deterministic_step(x, p, t, dt, params: SimParams):
    """Fourth-order symplectic step of the noise-free flow; works on arrays."""
    for c, d in zip(DRIFT_COEFFS, KICK_COEFFS):
        x = x + c * dt * p
        t = t + c * dt
        if d:
            p = p - d * dt * params.xi_at(t) * np.sin(x)
    return x, p


def _noisy_step(x, p, t, dt, dW, params: SimParams):
    D_t = params.D_at(t)
    if D_t > 0:
        p = p + np.sqrt(2 * D_t) * params.kbar * np.sin(x) * dW
    return deterministic_step(x, p, t, dt, params)


def sde_step(s: ClassicalState, t: float, dt: float, w: WienerStep,
             params: SimParams) -> ClassicalState:
    """Advance one classical trajectory by ``dt``."""
    if w.dt != dt:
        raise ValueError("Wiener step drawn for a different dt")
    x, p = _noisy_step(s.x, s.p, t, dt, w.dW, params)
    return ClassicalState(float(x), float(p), t + dt)


def evolve_ensemble(ens: ClassicalEnsemble, t0: float, dW: np.ndarray, params: SimParams,
                    dt: float | None = None) -> ClassicalEnsemble:
    """Advance all samples through ``len(dW)`` steps; ``dW`` is ``(steps, N)``."""
    dt = params.dt if dt is None else dt
    x, p = ens.x, ens.p
    for s in range(len(dW)):
        x, p = _noisy_step(x, p, t0 + s * dt, dt, dW[s], params)
    return ClassicalEnsemble(x, p, t0 + len(dW) * dt)


def stroboscopic_portrait(seeds, n_periods: int, params: SimParams) -> np.ndarray:
    """Noise-free strobe points at ``t = 2 pi k`` for ``k = 0 .. n_periods``.

    Returns an array of shape ``(n_periods + 1, n_seeds, 2)`` holding
    ``(x wrapped to [-pi, pi), p)``.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    x, p = seeds[:, 0].copy(), seeds[:, 1].copy()
    dt = params.dt
    out = np.empty((n_periods + 1, len(x), 2))
    out[0, :, 0], out[0, :, 1] = _wrap(x), p
    for k in range(1, n_periods + 1):
        t0 = 2 * np.pi * (k - 1)
        for s in range(params.steps_per_period):
            x, p = deterministic_step(x, p, t0 + s * dt, dt, params)
        out[k, :, 0], out[k, :, 1] = _wrap(x), p
    return out


def sample_q_initial(q: QInitParams, n: int, stream=0, first: int = 0) -> ClassicalEnsemble:
    """Draw ``n`` phase-space points from the Gaussian initial distribution.

    ``stream`` is either a master seed, in which case trajectory ``first + k``
    draws from its own substream (so samples do not depend on ``n``), or a
    ``numpy.random.Generator``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if isinstance(stream, np.random.Generator):
        z = stream.standard_normal((n, 2))
    else:
        z = np.array([NoiseStream(int(stream), first + k, INITIAL).normals(0, 2) for k in range(n)])
    x = q.x0 + np.sqrt(q.delta_x) * z[:, 0]
    p = q.p0 + np.sqrt(q.delta_p) * z[:, 1]
    return ClassicalEnsemble(x, p, 0.0)


@dataclass(frozen=True)
class OrbitClass:
    label: str
    exponent: float

    @property
    def chaotic(self) -> bool:
        return self.label == "chaotic"


def classify_orbit(x0: float, p0: float, params: SimParams, n_periods: int = 200,
                   offset: float = 1e-8, threshold: float = CHAOS_THRESHOLD) -> OrbitClass:
    """Label an initial condition regular or chaotic by finite-time separation growth.

    A companion orbit starts ``offset`` away in x; after every period the
    separation in (x, p) is logged and rescaled back to ``offset``.  The mean
    log growth per period above ``threshold`` means chaotic.
    """
    dt = params.dt
    x = np.array([x0, x0 + offset])
    p = np.array([p0, p0])
    total = 0.0
    for k in range(n_periods):
        t0 = 2 * np.pi * k
        for s in range(params.steps_per_period):
            x, p = deterministic_step(x, p, t0 + s * dt, dt, params)
        dxv, dpv = x[1] - x[0], p[1] - p[0]
        sep = np.hypot(dxv, dpv)
        total += np.log(sep / offset)
        x[1] = x[0] + dxv * offset / sep
        p[1] = p[0] + dpv * offset / sep
    exponent = total / n_periods
    return OrbitClass("chaotic" if exponent > threshold else "regular", float(exponent))
