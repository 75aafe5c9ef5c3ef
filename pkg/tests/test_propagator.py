import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from cavity_sse.model import Grid, SimParams, WaveFunction, gaussian_state
from cavity_sse.noise import WienerStep
from cavity_sse.propagator import (NumericalError, SplitStepPropagator, euler_sse_step, kinetic_half_step,
                                   potential_step, sse_step, sse_step_unnormalized)


def l2(a, b, grid):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * grid.dx))


class TestKinetic:
    def test_plane_wave_phase(self):
        g = Grid(64, 0.25)
        psi = WaveFunction(g, np.exp(1j * g.x)).normalized()  # p = kbar
        dt = 0.3
        out = kinetic_half_step(psi, dt)
        assert np.allclose(out.amps, psi.amps * np.exp(-1j * g.kbar * dt / 4), atol=1e-14)
        assert np.allclose(np.abs(out.amps), np.abs(psi.amps), atol=1e-14)

    def test_identity_at_zero(self, grid32, rng):
        psi = random_state(grid32, rng)
        assert np.array_equal(kinetic_half_step(psi, 0.0).amps, psi.amps)

    @given(st.floats(0, 10))
    def test_unitary(self, dt):
        psi = random_state(Grid(64, 0.25), np.random.default_rng(0))
        assert abs(kinetic_half_step(psi, dt).norm - 1) < 1e-13

    def test_free_gaussian_spreading(self):
        g = Grid(256, 0.25)
        sigma = 0.05
        psi = gaussian_state(g, 0.0, 0.0, sigma)
        T, steps = 0.5, 50
        for _ in range(2 * steps):  # each half step advances T / (2 steps) ... twice per dt
            psi = kinetic_half_step(psi, T / steps)
        expected = sigma + g.kbar**2 * T**2 / (4 * sigma)
        assert psi.var_x() == pytest.approx(expected, abs=1e-6)


class TestPotential:
    def test_pure_phase_without_measurement(self, grid32, rng):
        prm = SimParams(D=0.0, grid_size=32)
        psi = random_state(grid32, rng)
        prop = SplitStepPropagator(grid32, prm)
        dt = 0.05
        raw = psi.amps * np.exp(1j * prm.xi_at(0.3) * np.cos(grid32.x) * dt / grid32.kbar)
        out = potential_step(psi, 0.3, dt, WienerStep(0.7, dt), prm)
        assert np.allclose(out.amps, raw, atol=1e-14)
        assert np.allclose(np.abs(raw), np.abs(psi.amps), atol=1e-15)
        assert out.time == psi.time

    def test_position_eigenstate_is_deterministic(self, grid32):
        prm = SimParams(D=0.1, grid_size=32)
        a = np.zeros(32, complex)
        a[5] = 1.0
        psi = WaveFunction(grid32, a).normalized()
        dt = 0.03
        out1 = potential_step(psi, 0.0, dt, WienerStep(0.5, dt), prm)
        out2 = potential_step(psi, 0.0, dt, WienerStep(-1.3, dt), prm)
        assert np.allclose(out1.amps, out2.amps, atol=1e-15)

    def test_rejects_mismatched_dt(self, grid32, rng):
        with pytest.raises(ValueError):
            potential_step(random_state(grid32, rng), 0.0, 0.1, WienerStep(0.0, 0.2), SimParams(grid_size=32))

    def test_rejects_nonfinite(self, grid32):
        prm = SimParams(D=0.1, grid_size=32)
        prop = SplitStepPropagator(grid32, prm)
        bad = np.full((2, 32), np.nan + 0j)
        with pytest.raises(NumericalError):
            prop.potential(bad, 0.0, 0.01, np.zeros(2))


class TestSSEStep:
    @given(st.floats(0, 0.5), st.floats(-3, 3), st.integers(0, 2**32))
    def test_norm_after_every_step(self, D, z, seed):
        g = Grid(64, 0.25)
        prm = SimParams(D=D, grid_size=64)
        psi = random_state(g, np.random.default_rng(seed))
        dt = prm.dt
        for _ in range(3):
            psi = sse_step(psi, psi.time, dt, WienerStep(z * np.sqrt(dt), dt), prm)
            assert abs(psi.norm - 1) <= 1e-12

    def test_identity_at_zero(self, grid32, rng):
        psi = random_state(grid32, rng)
        out = sse_step(psi, 1.0, 0.0, WienerStep(0.0, 0.0), SimParams(grid_size=32))
        assert np.allclose(out.amps, psi.amps, atol=1e-15)
        assert out.time == 1.0

    def test_time_advances(self, grid32, rng):
        prm = SimParams(grid_size=32)
        out = sse_step(random_state(grid32, rng), 2.0, prm.dt, WienerStep(0.0, prm.dt), prm)
        assert out.time == pytest.approx(2.0 + prm.dt)

    def test_evolve_equals_repeated_steps(self, rng):
        g = Grid(64, 0.25)
        prm = SimParams(D=0.1, grid_size=64)
        prop = SplitStepPropagator(g, prm)
        a = np.array([random_state(g, rng).amps for _ in range(3)])
        dW = rng.standard_normal((20, 3)) * np.sqrt(prm.dt)
        fused = prop.evolve(a, 0.5, dW)
        b = a.copy()
        for s in range(20):
            b = prop.step(b, 0.5 + s * prm.dt, prm.dt, dW[s])
        assert np.max(np.abs(fused - b)) < 1e-12

    def test_seed_independent_without_measurement(self):
        g = Grid(64, 0.25)
        prm = SimParams(D=0.0, grid_size=64)
        prop = SplitStepPropagator(g, prm)
        a = gaussian_state(g, 0.0, 1.0, 0.3906).amps
        r1 = prop.evolve(a, 0.0, np.random.default_rng(1).standard_normal(50))
        r2 = prop.evolve(a, 0.0, np.random.default_rng(2).standard_normal(50))
        assert np.array_equal(r1, r2)

    def test_nan_reports_rows(self):
        g = Grid(32, 0.25)
        prm = SimParams(D=0.0, grid_size=32)
        prop = SplitStepPropagator(g, prm)
        a = np.ones((3, 32), complex)
        a[1, 4] = np.inf
        with pytest.raises(NumericalError) as err:
            prop.evolve(a, 0.0, np.zeros((60, 3)), check_every=10)
        assert err.value.rows == [1]
        assert err.value.step is not None


def strobe_energy_error(spp, periods, n=128):
    prm = SimParams(D=0.0, epsilon=0.0, steps_per_period=spp, grid_size=n)
    g = Grid.from_params(prm)
    prop = SplitStepPropagator(g, prm)
    a = gaussian_state(g, 0.0, 1.0, 0.3906).amps
    e0 = WaveFunction(g, a).energy(prm, 0.0)
    worst = 0.0
    for k in range(periods):
        a = prop.evolve(a, 2 * np.pi * k, np.zeros(spp))
        worst = max(worst, abs(WaveFunction(g, a).energy(prm, 0.0) - e0))
    return worst


class TestStrangOrder:
    def test_global_second_order(self):
        g = Grid(128, 0.25)
        prm0 = SimParams(D=0.0, epsilon=0.0, grid_size=128)
        a0 = gaussian_state(g, 0.0, 1.0, 0.3906).amps

        def run(spp):
            prm = SimParams(D=0.0, epsilon=0.0, grid_size=128, steps_per_period=spp)
            return SplitStepPropagator(g, prm).evolve(a0, 0.0, np.zeros(spp))

        ref = run(6400)
        spps = np.array([25, 50, 100, 200])
        errs = np.array([l2(run(s), ref, g) for s in spps])
        slope = -np.polyfit(np.log(spps), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.2)

    @pytest.mark.slow
    def test_energy_conserved_at_fine_step(self):
        assert strobe_energy_error(3200, 200) <= 1e-6

    def test_energy_error_shrinks_quadratically(self):
        e1 = strobe_energy_error(100, 20)
        e2 = strobe_energy_error(200, 20)
        assert e1 / e2 == pytest.approx(4, rel=0.3)


class TestEulerCrossChecks:
    def _sweep(self, step_a, step_b, D=0.1, seed=3):
        g = Grid(64, 0.25)
        prm = SimParams(D=D, grid_size=64)
        rng = np.random.default_rng(seed)
        psi = random_state(g, rng, smooth=8)
        dts = np.array([1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
        errs = []
        for dt in dts:
            # |dW| = sqrt(dt) keeps dW^2 = dt so both sides see the same Ito term
            w = WienerStep(np.sqrt(dt), dt)
            a, b = step_a(psi, 0.2, dt, w, prm), step_b(psi, 0.2, dt, w, prm)
            errs.append(l2(a.normalized().amps, b.normalized().amps, g))
        return np.polyfit(np.log(dts), np.log(errs), 1)[0]

    def test_split_matches_nonlinear_euler(self):
        assert self._sweep(sse_step, euler_sse_step) >= 1.4

    def test_linear_record_form_matches_nonlinear_euler(self):
        assert self._sweep(sse_step_unnormalized, euler_sse_step) >= 1.4

    def test_unnormalized_reduces_to_schrodinger_euler(self, grid32, rng):
        prm = SimParams(D=0.0, grid_size=32)
        psi = random_state(grid32, rng)
        dt = 1e-3
        prop = SplitStepPropagator(grid32, prm)
        expect = psi.amps - 1j / grid32.kbar * prop.hamiltonian(psi.amps, 0.0) * dt
        out = sse_step_unnormalized(psi, 0.0, dt, WienerStep(0.3, dt), prm)
        assert np.allclose(out.amps, expect, atol=1e-14)

    def test_record_drift_vanishes_for_zero_mean_J(self):
        g = Grid(64, 0.25)
        prm = SimParams(D=0.1, grid_size=64)
        # density odd-symmetric in cos x about x = pi/2 makes <J> vanish
        sym = WaveFunction(g, np.exp(-((g.x - np.pi / 2) ** 2) / 0.1) + 0j).normalized()
        dt = 1e-3
        prop = SplitStepPropagator(g, prm)
        assert abs(prop.mean_J(sym.amps)) < 1e-12
        a = sse_step_unnormalized(sym, 0.0, dt, WienerStep(0.0, dt), prm)
        b = sse_step_unnormalized(sym, 0.0, dt, WienerStep(0.02, dt), prm)
        noise_part = b.amps - a.amps
        assert np.allclose(noise_part, np.sqrt(2 * prm.D_at(0.0)) * 0.02 * prop.J * sym.amps, atol=1e-15)


def strobe_J_spread(D, n_traj=40, periods=10, n=64, spp=100):
    """Trajectory mean of <J^2>_c - <J>_c^2 over strobes 1..periods."""
    from cavity_sse.noise import ensemble_increments
    g = Grid(n, 0.25)
    prm = SimParams(D=D, grid_size=n, steps_per_period=spp)
    prop = SplitStepPropagator(g, prm)
    a = np.tile(gaussian_state(g, 0.0, 1.0, 0.3906).amps, (n_traj, 1))
    spread = []
    for k in range(periods):
        a = prop.evolve(a, 2 * np.pi * k, ensemble_increments(0, range(n_traj), k, spp, prm.dt))
        rho = np.abs(a) ** 2
        rho /= rho.sum(axis=1, keepdims=True)
        spread.append(np.mean(rho @ prop.J**2 - (rho @ prop.J) ** 2))
    return float(np.mean(spread))


class TestLocalization:
    @pytest.mark.xfail(strict=True, reason="at these strengths measurement heating outweighs "
                       "J-localization; see the decision log")
    def test_stronger_measurement_localizes_at_paper_strengths(self):
        assert strobe_J_spread(0.1) < strobe_J_spread(0.001)

    def test_strong_measurement_localizes(self):
        assert strobe_J_spread(20.0) < 0.5 * strobe_J_spread(0.001)
