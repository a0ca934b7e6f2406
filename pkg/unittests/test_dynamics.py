from dataclasses import replace

import numpy as np
import pytest

from mdw_sim.constants import C_LIGHT
from mdw_sim.dynamics import (
    MAX_SPEED_FRACTION,
    MediumState,
    azimuthal_variation,
    comoving_remap,
    divergence,
    probe_ring,
    run,
    step,
)
from mdw_sim.errors import NumericalAbortError, WakeLossError
from mdw_sim.forces import ForceField
from mdw_sim.grid import GridSpec
from mdw_sim.lgfields import MediumSpec, PulseSpec
from mdw_sim.scenario import load_preset
from mdw_sim.types import FieldPath, RunPhase

from .conftest import small_variant
from .utils import create_snapshot_tracker

SILICON = MediumSpec.silicon()


def constant_force(shape: tuple[int, ...], value: tuple[float, float, float]) -> ForceField:
    f = np.zeros((*shape, 3))
    f[...] = value
    return ForceField(f)


class TestStep:
    def test_constant_force(self):
        state = MediumState.at_rest((2, 2))
        dt = 1e-12
        new = step(state, constant_force((2, 2), (0.0, 0.0, SILICON.rho0)), SILICON, dt)
        np.testing.assert_allclose(new.va[..., 2], dt)
        np.testing.assert_allclose(new.ra[..., 2], 0.5 * dt**2)
        assert new.peak_speed == pytest.approx(dt)

    def test_end_of_step_force_is_averaged(self):
        state = MediumState.at_rest((3,))
        dt = 1e-3

        def next_forces(ra):
            return constant_force(ra.shape[:-1], (0.0, 2 * SILICON.rho0, 0.0))

        new = step(state, constant_force((3,), (0.0, 0.0, 0.0)), SILICON, dt, next_forces=next_forces)
        np.testing.assert_allclose(new.va[..., 1], dt)
        np.testing.assert_allclose(new.ra, 0.0)

    def test_density_follows_the_displacement(self):
        state = MediumState.at_rest((4, 4, 4))
        dt = 1.0
        f = np.zeros((4, 4, 4, 3))
        f[..., 0] = 2 * SILICON.rho0 * 1e-9 * np.arange(4)[:, None, None]
        new = step(state, ForceField(f), SILICON, dt, spacing=(1.0, 1.0, 1.0))
        # ra_x = 1e-9 * i, div ra = 1e-9
        np.testing.assert_allclose(new.rho_mdw, -SILICON.rho0 * 1e-9)

    def test_not_finite_aborts(self):
        state = MediumState.at_rest((2, 3))
        force = constant_force((2, 3), (0.0, 0.0, 0.0))
        force.f[1, 2, 0] = np.nan
        with pytest.raises(NumericalAbortError) as error:
            step(state, force, SILICON, 1e-12)
        assert error.value.cell_index == (1, 2)
        assert error.value.quantity == "ra"

    def test_relativistic_speed_aborts(self):
        state = MediumState.at_rest((2,))
        force = constant_force((2,), (0.0, 0.0, 0.0))
        force.f[1, 2] = SILICON.rho0 * 2 * MAX_SPEED_FRACTION * C_LIGHT
        with pytest.raises(NumericalAbortError) as error:
            step(state, force, SILICON, 1.0)
        assert error.value.cell_index == (1,)
        assert error.value.exit_code == 3


class TestMediumState:
    def test_momentum_and_energy(self):
        state = MediumState.at_rest((2, 2, 2))
        state = replace(state, va=np.ones((2, 2, 2, 3)))
        np.testing.assert_allclose(state.momentum(SILICON, 0.5), [8 * 0.5 * SILICON.rho0] * 3)
        assert state.kinetic_energy(SILICON, 0.5) == pytest.approx(0.5 * SILICON.rho0 * 0.5 * 24)

    def test_divergence(self):
        axis = np.linspace(0, 1, 6)
        X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
        ra = np.stack([2 * X, -Y, 0.5 * Z], axis=-1)
        h = float(axis[1] - axis[0])
        np.testing.assert_allclose(divergence(ra, (h, h, h)), 1.5)


class TestComovingRemap:
    @pytest.fixture
    def grid(self) -> GridSpec:
        return small_variant(load_preset("silicon-lg01-circular")).grid

    def moving_state(self, grid: GridSpec, speed: float = 1.0) -> MediumState:
        state = MediumState.at_rest(grid.shape)
        va = np.zeros((*grid.shape, 3))
        va[:, :, 0, 2] = speed
        rho = np.zeros(grid.shape)
        rho[:, :, 0] = 1.0
        return replace(state, va=va, rho_mdw=rho)

    def test_no_shift(self, grid):
        state = self.moving_state(grid)
        assert comoving_remap(state, 0, grid, SILICON) is state

    def test_backwards_shift_is_refused(self, grid):
        with pytest.raises(ValueError):
            comoving_remap(self.moving_state(grid), -1, grid, SILICON)

    def test_leaving_cells_go_to_the_wake(self, grid):
        state = self.moving_state(grid, 2.0)
        moved = comoving_remap(state, 1, grid, SILICON)
        cell_mass = SILICON.rho0 * grid.cell_volume
        assert moved.offset == 1
        assert np.all(moved.va == 0)
        assert moved.wake.cells == grid.nx * grid.ny
        np.testing.assert_allclose(moved.wake.momentum, [0.0, 0.0, 2.0 * cell_mass * grid.nx * grid.ny])
        assert moved.wake.mass == pytest.approx(grid.nx * grid.ny * grid.cell_volume)
        assert moved.wake.max_speed == 2.0
        # momentum is conserved across the remap
        total_before = state.momentum(SILICON, grid.cell_volume)
        total_after = moved.momentum(SILICON, grid.cell_volume) + moved.wake.momentum
        np.testing.assert_allclose(total_after, total_before)

    def test_entering_cells_are_at_rest(self, grid):
        state = MediumState.at_rest(grid.shape)
        state = replace(state, ra=np.ones((*grid.shape, 3)))
        moved = comoving_remap(state, 2, grid, SILICON)
        assert np.all(moved.ra[:, :, -2:] == 0)
        assert np.all(moved.ra[:, :, :-2] == 1)

    def test_wake_angular_momentum(self, grid):
        state = MediumState.at_rest(grid.shape)
        va = np.zeros((*grid.shape, 3))
        # rigid rotation of the trailing slab about the z axis
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        va[:, :, 0, 0] = -Y
        va[:, :, 0, 1] = X
        moved = comoving_remap(replace(state, va=va), 1, grid, SILICON)
        expected = SILICON.rho0 * grid.cell_volume * np.sum(X**2 + Y**2)
        assert moved.wake.angular_momentum[2] == pytest.approx(expected)
        cell_mass = SILICON.rho0 * grid.cell_volume
        np.testing.assert_allclose(moved.wake.momentum, 0.0, atol=1e-9 * cell_mass * np.sum(np.abs(X)))

    def test_fast_wake_is_refused(self, grid):
        with pytest.raises(WakeLossError) as error:
            comoving_remap(self.moving_state(grid, 3.0), 1, grid, SILICON, wake_limit=1.0)
        assert error.value.wake_velocity == 3.0


class TestRun:
    def test_small_run(self, small_scenario, small_run):
        grid = small_scenario.grid
        assert small_run.times.shape == (grid.n_steps,)
        assert small_run.center.step == grid.center_step
        assert small_run.center.time == pytest.approx(grid.center_time)
        assert small_run.center.state.offset == grid.comoving_cells
        assert small_run.final.time == grid.t1
        assert small_run.bookkeeping_residual < 1e-10
        assert small_run.center.state.peak_speed > 0

    def test_momentum_equals_impulse(self, small_run):
        np.testing.assert_allclose(
            small_run.momentum, small_run.impulse, atol=1e-9 * np.max(np.abs(small_run.impulse))
        )

    def test_atoms_come_to_rest_behind_the_pulse(self, small_scenario, small_run):
        state = small_run.center.state
        trailing_speed = np.max(np.abs(state.va[:, :, 0]))
        assert trailing_speed < 1e-6 * state.peak_speed
        # atoms behind the pulse stay displaced forward
        assert np.max(state.ra[:, :, 0, 2]) > 0

    def test_snapshot_hooks(self, small_scenario):
        scenario = small_scenario.with_outputs(snapshot_every=50)
        hook, calls = create_snapshot_tracker()
        trajectory = run(scenario, hooks=[hook])
        steps = [call[1] for call in calls]
        assert steps == list(range(50, scenario.grid.n_steps + 1, 50))
        assert [snapshot.step for snapshot in trajectory.snapshots] == steps
        assert calls[0][0] == pytest.approx(scenario.grid.time(50))
        assert trajectory.snapshots[0].phase == RunPhase.APPROACH

    def test_hook_with_wrong_signature(self, small_scenario):
        scenario = small_scenario.with_outputs(snapshot_every=50)

        def hook(state):
            return state

        with pytest.raises(TypeError) as error:
            run(scenario, hooks=[hook])
        assert "Hook function must match signature: hook(state" in str(error.value)

    def test_fixed_amplitude(self, small_scenario, small_run):
        doubled = run(small_scenario, u0=2 * small_run.u0)
        np.testing.assert_allclose(doubled.momentum[-1], 4 * small_run.momentum[-1], rtol=1e-9)

    def test_elasticity_barely_matters_during_the_pulse(self, small_scenario, small_run):
        elastic = run(replace(small_scenario, elasticity=True))
        np.testing.assert_allclose(
            elastic.center.state.va, small_run.center.state.va, atol=1e-3 * small_run.center.state.peak_speed
        )

    @pytest.mark.slow
    def test_nothing_moves_without_index_contrast(self, preset_runs):
        _, trajectory = preset_runs("vacuum-null")
        assert np.all(trajectory.center.state.va == 0)
        assert np.all(trajectory.momentum == 0)
        assert trajectory.bookkeeping_residual == 0


class TestRingProbe:
    def test_azimuthal_variation(self):
        uniform = np.tile([1.0, 1.0, 0.0], (8, 1))
        assert azimuthal_variation(uniform) == 0.0
        assert azimuthal_variation(np.zeros((8, 3))) == 0.0
        assert azimuthal_variation(np.array([[1.0, 0.0, 0.0], [3.0, 0.0, 0.0]])) == pytest.approx(0.5)

    def test_time_averaged_ring_is_symmetric(self):
        scenario = load_preset("silicon-lg01-linear")
        probe = probe_ring(scenario, n_azimuth=16, path=FieldPath.TIME_AVERAGED)
        assert probe.velocities.shape == (16, 3)
        assert probe.radius == pytest.approx(scenario.pulse.w0 / 2)
        assert np.min(probe.transverse_speed) > 0
        assert azimuthal_variation(probe.velocities) < 1e-6

    @pytest.mark.slow
    def test_instantaneous_ring_tells_polarizations_apart(self):
        linear = probe_ring(load_preset("silicon-lg01-linear"), n_azimuth=16, path=FieldPath.INSTANTANEOUS)
        circular = probe_ring(load_preset("silicon-lg00-circular"), n_azimuth=16, path=FieldPath.INSTANTANEOUS)
        assert azimuthal_variation(linear.velocities) > 0.5
        assert azimuthal_variation(circular.velocities) < 0.05

    def test_vortex_free_linear_pulse_has_no_transverse_flow(self):
        pulse = PulseSpec.desk_scale(0, 0, 0, SILICON.n)
        scenario = replace(load_preset("silicon-lg01-linear"), pulse=pulse)
        probe = probe_ring(scenario, n_azimuth=8, path=FieldPath.TIME_AVERAGED)
        assert np.max(probe.transverse_speed) < 1e-9 * np.max(np.abs(probe.velocities[:, 2]))
