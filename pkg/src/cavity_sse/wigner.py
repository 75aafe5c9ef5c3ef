"""Wigner function of grid states on the circle.

For each grid point ``x_j`` the separation integral

    P(x, p) = 1/(2 pi kbar) * int dy psi(x - y/2) psi*(x + y/2) exp(i p y / kbar)

is taken over one period, ``y`` in ``[-pi, pi]``, so every pair of points is
counted once at the midpoint of its shorter arc (no ghost images).  The
half-integer shifts ``x +- y/2`` are read off a doubled-resolution copy of
the state obtained by exact spectral interpolation; the ``y`` endpoints get
trapezoid half weights.  The result lives on the grid's own momentum
lattice and integrates exactly to the position and momentum densities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Grid, WaveFunction

__all__ = ["WignerGrid", "wigner_transform", "marginals", "wigner_overlap", "refine"]


@dataclass
class WignerGrid:
    """Wigner function sampled on ``x`` (n points) by ``p`` (n points, ascending).

    ``max_imag`` records the largest imaginary part discarded.
    """

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    kbar: float
    max_imag: float = 0.0

    @property
    def nx(self) -> int:
        return len(self.x)

    @property
    def np(self) -> int:
        return len(self.p)

    @property
    def dx(self) -> float:
        return 2 * np.pi / self.nx

    @property
    def dp(self) -> float:
        return self.kbar

    def total(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)


def refine(amps: np.ndarray) -> np.ndarray:
    """Values at twice the resolution by zero-padding the spectrum.

    The Nyquist coefficient is kept on the negative-frequency side, matching
    the grid's FFT momentum ordering.  Even samples reproduce ``amps``.
    """
    n = amps.shape[-1]
    c = np.fft.fft(amps, axis=-1)
    fine = np.zeros(amps.shape[:-1] + (2 * n,), dtype=complex)
    fine[..., : n // 2] = c[..., : n // 2]
    fine[..., -(n // 2):] = c[..., n // 2:]
    return 2 * np.fft.ifft(fine, axis=-1)


def wigner_transform(psi: WaveFunction) -> WignerGrid:
    grid = psi.grid
    n = grid.n
    fine = refine(psi.amps)
    m = np.arange(-(n // 2), n // 2 + 1)  # y = m dx covers [-pi, pi]
    j2 = 2 * np.arange(n)[:, None]
    corr = fine[(j2 - m) % (2 * n)] * np.conj(fine[(j2 + m) % (2 * n)])
    corr[:, 0] *= 0.5
    corr[:, -1] *= 0.5
    # Fold y = +-pi onto one DFT bin: exp(i p y / kbar) agrees at both ends.
    folded = corr[:, :n].copy()
    folded[:, 0] += corr[:, -1]
    # folded[:, k] holds y index m = k - n/2; sum_k f_k exp(i q (k - n/2) 2pi/n)
    q = np.arange(-(n // 2), n // 2)
    spectrum = n * np.fft.ifft(folded, axis=1)  # sum_k f_k exp(+2 pi i q k / n), q in FFT order
    spectrum = np.fft.fftshift(spectrum, axes=1) * np.exp(-1j * np.pi * q)[None, :]
    values = spectrum * grid.dx / (2 * np.pi * grid.kbar)
    return WignerGrid(
        x=np.array(grid.x),
        p=grid.kbar * q.astype(float),
        values=values.real.copy(),
        kbar=grid.kbar,
        max_imag=float(np.max(np.abs(values.imag))),
    )


def marginals(w: WignerGrid) -> tuple[np.ndarray, np.ndarray]:
    """Position density on ``w.x`` and momentum density on ``w.p``."""
    return w.values.sum(axis=1) * w.dp, w.values.sum(axis=0) * w.dx


def wigner_overlap(a: WignerGrid, b: WignerGrid) -> float:
    """``2 pi kbar * sum P_a P_b dx dp``, which equals ``|<a|b>|^2`` for smooth states."""
    return float(2 * np.pi * a.kbar * np.sum(a.values * b.values) * a.dx * a.dp)
