"""Hilbert-space angles between conditional states and ensemble moments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Grid, WaveFunction

__all__ = [
    "StrobeSnapshotSet",
    "AngleMatrix",
    "AngleSummary",
    "angle",
    "angle_matrix",
    "average_angle",
    "angle_histogram",
    "EnsembleMoments",
    "ensemble_moments",
    "classical_moments",
    "DEFAULT_BINS",
    "default_pair_budget",
]

DEFAULT_BINS = 50
FULL_PAIRS_MAX_N = 1000
HALF_PI = np.pi / 2


def default_pair_budget(n: int) -> int | None:
    """All pairs up to ``FULL_PAIRS_MAX_N`` states, then a fixed seeded sample of that size."""
    if n <= FULL_PAIRS_MAX_N:
        return None
    return FULL_PAIRS_MAX_N * (FULL_PAIRS_MAX_N - 1) // 2


def _theta(overlap_abs):
    return np.arccos(np.clip(overlap_abs, 0.0, 1.0))


def angle(psi_i: WaveFunction, psi_j: WaveFunction) -> float:
    """``arccos |<psi_i|psi_j>|`` in radians, within [0, pi/2]."""
    if not psi_i.grid.same_as(psi_j.grid):
        raise ValueError("states live on different grids")
    ov = np.sum(np.conj(psi_i.amps) * psi_j.amps) * psi_i.grid.dx
    return float(_theta(abs(ov)))


@dataclass
class StrobeSnapshotSet:
    """Conditional states of an ensemble at one strobe, one row per trajectory."""

    strobe_index: int
    grid: Grid
    states: np.ndarray
    ids: np.ndarray = None

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        if self.states.shape[1] != self.grid.n:
            raise ValueError("state length does not match grid")
        if self.ids is None:
            self.ids = np.arange(len(self.states))
        self.ids = np.asarray(self.ids)

    @classmethod
    def from_wavefunctions(cls, strobe_index: int, psis) -> "StrobeSnapshotSet":
        psis = list(psis)
        grid = psis[0].grid
        if any(not p.grid.same_as(grid) for p in psis):
            raise ValueError("states live on different grids")
        return cls(strobe_index, grid, np.array([p.amps for p in psis]))

    def __len__(self):
        return len(self.states)

    @property
    def n_pairs(self) -> int:
        n = len(self)
        return n * (n - 1) // 2


@dataclass
class AngleMatrix:
    """Symmetric matrix of pair angles (zero diagonal)."""

    theta: np.ndarray

    @property
    def n(self) -> int:
        return len(self.theta)

    def upper(self) -> np.ndarray:
        return self.theta[np.triu_indices(self.n, k=1)]


def _pair_overlaps(states: np.ndarray, dx: float, rows, cols) -> np.ndarray:
    # Row-wise products reduced along the contiguous axis: numpy's pairwise
    # summation, independent of how pairs are batched.
    out = np.empty(len(rows))
    block = 4096
    for start in range(0, len(rows), block):
        r, c = rows[start:start + block], cols[start:start + block]
        out[start:start + block] = np.abs(np.sum(np.conj(states[r]) * states[c], axis=-1)) * dx
    return out


def angle_matrix(snap: StrobeSnapshotSet) -> AngleMatrix:
    n = len(snap)
    theta = np.zeros((n, n))
    for i in range(n - 1):
        ov = np.abs(np.sum(np.conj(snap.states[i]) * snap.states[i + 1:], axis=-1)) * snap.grid.dx
        theta[i, i + 1:] = _theta(ov)
    theta = theta + theta.T
    return AngleMatrix(theta)


def _pair_angles(snap: StrobeSnapshotSet, pair_budget: int | None, seed: int) -> np.ndarray:
    n = len(snap)
    if n < 2:
        raise ValueError("need at least two states")
    total = snap.n_pairs
    if pair_budget is None or pair_budget >= total:
        return angle_matrix(snap).upper()
    rows, cols = np.triu_indices(n, k=1)
    pick = np.sort(np.random.default_rng(seed).choice(total, size=int(pair_budget), replace=False))
    return _theta(_pair_overlaps(snap.states, snap.grid.dx, rows[pick], cols[pick]))


@dataclass(frozen=True)
class AngleSummary:
    theta_ave: float
    stderr: float
    n_pairs: int
    subsampled: bool = False


def average_angle(snap: StrobeSnapshotSet, pair_budget: int | None = None,
                  seed: int = 0) -> AngleSummary:
    """Mean angle over all unordered pairs, or over a seeded uniform pair sample.

    ``stderr`` is the naive standard error ``std/sqrt(pairs)``; pairs sharing a
    trajectory are correlated, so treat it as indicative.
    """
    th = _pair_angles(snap, pair_budget, seed)
    se = float(th.std(ddof=1) / np.sqrt(len(th))) if len(th) > 1 else 0.0
    return AngleSummary(float(th.mean()), se, len(th), len(th) < snap.n_pairs)


def angle_histogram(snap: StrobeSnapshotSet, n_bins: int = DEFAULT_BINS,
                    pair_budget: int | None = None, seed: int = 0):
    """Counts of pair angles in ``n_bins`` uniform bins over [0, pi/2].

    Returns ``(edges, counts)``.
    """
    th = _pair_angles(snap, pair_budget, seed)
    counts, edges = np.histogram(th, bins=n_bins, range=(0.0, HALF_PI))
    return edges, counts


@dataclass
class EnsembleMoments:
    """Per-strobe ensemble statistics of conditional momentum moments.

    ``mean_cond_var`` averages each trajectory's own variance; ``var_of_means``
    is the spread of conditional means; ``pooled_var`` is their sum.
    """

    mean_p: np.ndarray
    var_of_means: np.ndarray
    mean_cond_var: np.ndarray
    n_traj: int
    extra: dict = field(default_factory=dict)

    @property
    def pooled_var(self) -> np.ndarray:
        return self.var_of_means + self.mean_cond_var

    @property
    def stderr_mean(self) -> np.ndarray:
        return np.sqrt(self.var_of_means / self.n_traj)


def ensemble_moments(mean_p, mean_p2) -> EnsembleMoments:
    """Moments from per-trajectory ``<p>_c`` and ``<p^2>_c`` arrays of shape (N, strobes)."""
    mp = np.atleast_2d(np.asarray(mean_p, dtype=float))
    mp2 = np.atleast_2d(np.asarray(mean_p2, dtype=float))
    if mp.shape != mp2.shape:
        raise ValueError("moment arrays differ in shape")
    cond_var = mp2 - mp**2
    return EnsembleMoments(
        mean_p=mp.mean(axis=0),
        var_of_means=mp.var(axis=0),
        mean_cond_var=cond_var.mean(axis=0),
        n_traj=mp.shape[0],
    )


def classical_moments(x, p) -> dict:
    """Sample moments of classical ensembles; arrays are (N, strobes) or (N,)."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return {
        "mean_p": p.mean(axis=0),
        "var_p": p.var(axis=0),
        "mean_x": x.mean(axis=0),
        "var_x": x.var(axis=0),
        "stderr_p": p.std(axis=0, ddof=1) / np.sqrt(p.shape[0]) if p.shape[0] > 1 else np.zeros_like(p[0]),
    }
