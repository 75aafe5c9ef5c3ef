"""Conditional quantum and classical dynamics of an atom in a modulated cavity potential.

The package integrates the stochastic Schrodinger equation of an atom whose
position is continuously read out through the phase of a cavity field, the
matching classical Ito dynamics, and the statistics used to compare
measurement-perturbed trajectory ensembles.
"""

from .model import (Grid, PhysicalParams, SimParams, WaveFunction, dimensionless_from_physical,
                    gaussian_state, measurement_operator, modulation_factor)
from .noise import NoiseStream, WienerStep, ensemble_increments
from .propagator import NumericalError, SplitStepPropagator, sse_step
from .classical import (ClassicalEnsemble, ClassicalState, QInitParams, classify_orbit, sde_step,
                        stroboscopic_portrait)
from .wigner import WignerGrid, wigner_transform
from .stats import StrobeSnapshotSet, angle, angle_histogram, average_angle, ensemble_moments
from .ensemble import QuantumEnsemble, ScenarioSpec, TrajectoryRecord, emit_plot_data, resume, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Grid", "PhysicalParams", "SimParams", "WaveFunction", "dimensionless_from_physical",
    "gaussian_state", "measurement_operator", "modulation_factor",
    "NoiseStream", "WienerStep", "ensemble_increments",
    "NumericalError", "SplitStepPropagator", "sse_step",
    "ClassicalEnsemble", "ClassicalState", "QInitParams", "classify_orbit", "sde_step",
    "stroboscopic_portrait",
    "WignerGrid", "wigner_transform",
    "StrobeSnapshotSet", "angle", "angle_histogram", "average_angle", "ensemble_moments",
    "QuantumEnsemble", "ScenarioSpec", "TrajectoryRecord", "emit_plot_data", "resume", "run_scenario",
]
