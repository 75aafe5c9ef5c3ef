"""Split-operator propagation of the normalised homodyne SSE.

One step is the Strang sandwich

    K(dt/2) . P(t + dt/2) . K(dt/2)

with ``K(h) = exp(-i p^2 h / (2 kbar))`` applied in momentum space and ``P``
the pointwise factor ``exp(-i V dt / kbar)`` of the stochastic effective
potential

    V = -xi(t) cos x - i kbar [D(t) dJ^2 (1 + dW^2/dt) - sqrt(2 D(t)) dJ dW/dt],

``dJ = J - <J>_c``.  The ``dW^2/dt`` term makes the first-order expansion of
the exponential agree with the Ito increment of the normalised SSE.  The
state is renormalised after each potential factor; kinetic factors are
unitary.

Functions accept either a :class:`WaveFunction` or work on batched arrays
through :class:`SplitStepPropagator` (last axis is position).
"""

from __future__ import annotations

import numpy as np

from .model import Grid, SimParams, WaveFunction, measurement_operator
from .noise import WienerStep

__all__ = [
    "NumericalError",
    "SplitStepPropagator",
    "kinetic_half_step",
    "potential_step",
    "sse_step",
    "sse_step_unnormalized",
    "euler_sse_step",
    "apply_hamiltonian",
]


class NumericalError(FloatingPointError):
    """Non-finite values appeared during integration.

    ``rows`` lists the offending batch rows and ``step`` the step index, when known.
    """

    def __init__(self, message: str, rows=None, step=None):
        super().__init__(message)
        self.rows = [] if rows is None else list(rows)
        self.step = step


class SplitStepPropagator:
    """Precomputed factors for batched split-step propagation on one grid.

    ``amps`` arrays have shape ``(..., n)``; Wiener increments broadcast
    against the leading axes.
    """

    def __init__(self, grid: Grid, params: SimParams):
        self.grid = grid
        self.params = params
        self.J = measurement_operator(grid.x)
        self.cosx = np.cos(grid.x)
        self.p2 = grid.p**2
        self._phase_cache = {}

    # -- elementary factors -------------------------------------------------
    def kinetic_factor(self, h: float) -> np.ndarray:
        """``exp(-i p^2 h / (2 kbar))``: the free propagator over time ``h``."""
        key = float(h)
        if key not in self._phase_cache:
            self._phase_cache[key] = np.exp(-1j * self.p2 * h / (2 * self.grid.kbar))
        return self._phase_cache[key]

    def kinetic(self, amps: np.ndarray, h: float) -> np.ndarray:
        if h == 0:
            return np.array(amps, dtype=complex, copy=True)
        return np.fft.ifft(self.kinetic_factor(h) * np.fft.fft(amps, axis=-1), axis=-1)

    def mean_J(self, amps: np.ndarray) -> np.ndarray:
        rho = np.abs(amps) ** 2
        return np.sum(rho * self.J, axis=-1) / np.sum(rho, axis=-1)

    def potential(self, amps: np.ndarray, t: float, dt: float, dW) -> np.ndarray:
        """Apply the stochastic potential factor at time ``t`` and renormalise."""
        if dt == 0:
            return np.array(amps, dtype=complex, copy=True)
        prm = self.params
        xi_t = prm.xi_at(t)
        D_t = prm.D_at(t)
        exponent = 1j * xi_t * self.cosx * (dt / self.grid.kbar)
        if D_t > 0:
            jbar = self.mean_J(amps)
            if not np.all(np.isfinite(jbar)):
                bad = np.flatnonzero(~np.isfinite(np.atleast_1d(jbar)))
                raise NumericalError(f"non-finite <J>_c in rows {bad.tolist()}", bad.tolist())
            dW = np.asarray(dW, dtype=float)[..., None]
            dJ = self.J - jbar[..., None]
            exponent = exponent + (-D_t * dJ**2 * (dt + dW**2) + np.sqrt(2 * D_t) * dJ * dW)
        out = amps * np.exp(exponent)
        return self.normalize(out)

    def normalize(self, amps: np.ndarray) -> np.ndarray:
        norm = np.sqrt(np.sum(np.abs(amps) ** 2, axis=-1) * self.grid.dx)
        return amps / norm[..., None]

    def step(self, amps: np.ndarray, t: float, dt: float, dW) -> np.ndarray:
        """One Strang step from ``t`` to ``t + dt``."""
        amps = self.kinetic(amps, dt / 2)
        amps = self.potential(amps, t + dt / 2, dt, dW)
        return self.kinetic(amps, dt / 2)

    def evolve(self, amps: np.ndarray, t0: float, dW: np.ndarray, dt: float | None = None,
               check_every: int = 50) -> np.ndarray:
        """Run ``len(dW)`` steps; ``dW`` has shape ``(steps, ...)``.

        Adjacent kinetic half steps are fused into one full kinetic step,
        which is the same product of exponentials as repeated :meth:`step`.
        """
        dt = self.params.dt if dt is None else dt
        steps = len(dW)
        if steps == 0:
            return np.array(amps, dtype=complex, copy=True)
        full = self.kinetic_factor(dt)
        amps = self.kinetic(amps, dt / 2)
        for s in range(steps):
            if s:
                amps = np.fft.ifft(full * np.fft.fft(amps, axis=-1), axis=-1)
            try:
                amps = self.potential(amps, t0 + (s + 0.5) * dt, dt, dW[s])
            except NumericalError as exc:
                raise NumericalError(f"{exc} at step {s + 1}", exc.rows, s + 1) from None
            if check_every and (s + 1) % check_every == 0 and not np.all(np.isfinite(amps)):
                bad = np.argwhere(~np.all(np.isfinite(amps), axis=-1)).ravel()
                raise NumericalError(f"non-finite amplitudes at step {s + 1} in rows {bad.tolist()}",
                                     bad.tolist(), s + 1)
        amps = self.kinetic(amps, dt / 2)
        if not np.all(np.isfinite(amps)):
            bad = np.argwhere(~np.all(np.isfinite(amps), axis=-1)).ravel()
            raise NumericalError(f"non-finite amplitudes at step {steps} in rows {bad.tolist()}",
                                 bad.tolist(), steps)
        return amps

    # -- Euler reference steps ----------------------------------------------
    def hamiltonian(self, amps: np.ndarray, t: float) -> np.ndarray:
        kin = np.fft.ifft(0.5 * self.p2 * np.fft.fft(amps, axis=-1), axis=-1)
        return kin - self.params.xi_at(t) * self.cosx * amps


def _check(psi: WaveFunction, w: WienerStep | None, dt: float):
    if w is not None and w.dt != dt:
        raise ValueError(f"Wiener step was drawn for dt={w.dt}, used with dt={dt}")


def kinetic_half_step(psi: WaveFunction, dt: float) -> WaveFunction:
    """Multiply momentum amplitudes by ``exp(-i p^2 dt / (4 kbar))``."""
    if dt == 0:
        return psi.copy()
    phase = np.exp(-1j * psi.grid.p**2 * dt / (4 * psi.grid.kbar))
    return WaveFunction(psi.grid, np.fft.ifft(phase * np.fft.fft(psi.amps)), psi.time)


def potential_step(psi: WaveFunction, t: float, dt: float, w: WienerStep,
                   params: SimParams) -> WaveFunction:
    """Apply the stochastic effective potential evaluated at time ``t``.

    ``<J>_c`` is taken from ``psi``; the result is renormalised.  Time is not
    advanced (this is a sub-step).
    """
    _check(psi, w, dt)
    prop = SplitStepPropagator(psi.grid, params)
    return WaveFunction(psi.grid, prop.potential(psi.amps, t, dt, w.dW), psi.time)


def sse_step(psi: WaveFunction, t: float, dt: float, w: WienerStep,
             params: SimParams, propagator: SplitStepPropagator | None = None) -> WaveFunction:
    """Strang step of the normalised SSE from ``t`` to ``t + dt``."""
    _check(psi, w, dt)
    prop = propagator or SplitStepPropagator(psi.grid, params)
    return WaveFunction(psi.grid, prop.step(psi.amps, t, dt, w.dW), t + dt)


def euler_sse_step(psi: WaveFunction, t: float, dt: float, w: WienerStep,
                   params: SimParams) -> WaveFunction:
    """Single Euler-Maruyama step of the normalised nonlinear SSE (not renormalised)."""
    _check(psi, w, dt)
    prop = SplitStepPropagator(psi.grid, params)
    a = psi.amps
    D_t = params.D_at(t)
    dJ = prop.J - prop.mean_J(a)
    incr = (-1j / psi.grid.kbar) * prop.hamiltonian(a, t) * dt - D_t * dJ**2 * a * dt
    incr = incr + np.sqrt(2 * D_t) * dJ * a * w.dW
    return WaveFunction(psi.grid, a + incr, t + dt)


def sse_step_unnormalized(psi: WaveFunction, t: float, dt: float, w: WienerStep,
                          params: SimParams) -> WaveFunction:
    """Euler step of the linear SSE driven by the record ``I_A = 4D<J> + sqrt(2D) dW/dt``.

    The output norm is not one; it is a cross-check of :func:`euler_sse_step`.
    """
    _check(psi, w, dt)
    prop = SplitStepPropagator(psi.grid, params)
    a = psi.amps
    D_t = params.D_at(t)
    J = prop.J
    record_dt = 4 * D_t * prop.mean_J(a) * dt + np.sqrt(2 * D_t) * w.dW
    incr = (-1j / psi.grid.kbar) * prop.hamiltonian(a, t) * dt - D_t * J**2 * a * dt + record_dt * J * a
    return WaveFunction(psi.grid, a + incr, t + dt)


def apply_hamiltonian(psi: WaveFunction, params: SimParams, t: float) -> np.ndarray:
    return SplitStepPropagator(psi.grid, params).hamiltonian(psi.amps, t)
