"""Reproducible Wiener increments.

Every block of normals is addressed by ``(seed, domain, trajectory, block)``
and drawn from a fresh Philox generator keyed by a ``SeedSequence`` with
that spawn key.  Any trajectory's noise for any modulation period can be
regenerated without replaying earlier draws, so ensembles are independent
of worker count, ordering and ensemble size, and resuming a run needs
nothing but the period index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["WienerStep", "NoiseStream", "QUANTUM", "CLASSICAL", "INITIAL"]

# Domain tags keep quantum, classical and initial-condition streams disjoint.
QUANTUM = 1
CLASSICAL = 2
INITIAL = 3


@dataclass(frozen=True)
class WienerStep:
    """One Ito increment ``dW`` over a step ``dt`` (variance ``dt``)."""

    dW: float
    dt: float

    @classmethod
    def sample(cls, rng: np.random.Generator, dt: float) -> "WienerStep":
        return cls(float(np.sqrt(dt) * rng.standard_normal()), dt)

    @classmethod
    def zero(cls, dt: float) -> "WienerStep":
        return cls(0.0, dt)


@dataclass(frozen=True)
class NoiseStream:
    """Counter-addressed normal stream for one trajectory."""

    seed: int
    trajectory: int
    domain: int = QUANTUM

    def generator(self, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(self.domain, int(self.trajectory), int(block)))
        return np.random.Generator(np.random.Philox(ss))

    def normals(self, block: int, size: int) -> np.ndarray:
        return self.generator(block).standard_normal(size)

    def increments(self, block: int, n_steps: int, dt: float) -> np.ndarray:
        """Wiener increments for ``n_steps`` steps of block ``block``."""
        return np.sqrt(dt) * self.normals(block, n_steps)


def ensemble_increments(seed: int, trajectories, block: int, n_steps: int, dt: float,
                        domain: int = QUANTUM) -> np.ndarray:
    """Stack of increments, shape ``(n_steps, len(trajectories))``."""
    out = np.empty((n_steps, len(trajectories)))
    for col, k in enumerate(trajectories):
        out[:, col] = NoiseStream(seed, k, domain).increments(block, n_steps, dt)
    return out
