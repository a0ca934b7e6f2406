import numpy as np
import pytest

from mdw_sim.constants import EPSILON0
from mdw_sim.errors import UnderresolvedInterfaceError
from mdw_sim.forces import (
    ForceField,
    OpticalForceModel,
    elastic_force_density,
    index_gradient_force_density,
    is_isotropic,
    longitudinal_sound_speed,
    navier_force_density,
    optical_force_density,
    transverse_sound_speed,
)
from mdw_sim.lgfields import MediumSpec, PulseField, PulseSpec
from mdw_sim.types import FieldPath, ForceProvenance

SILICON = MediumSpec.silicon()


def on_axis(z: float | np.ndarray) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=-1)


def cube(points: int = 21) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    axis = np.linspace(-1.0, 1.0, points)
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    return X, Y, Z, float(axis[1] - axis[0])


class TestOpticalForce:
    def test_no_force_without_index_contrast(self):
        medium = MediumSpec.vacuum_like()
        pulse = PulseSpec.desk_scale(0, 1, 1, medium.n)
        for path in FieldPath:
            force = optical_force_density(path, pulse, 1.0, medium, on_axis([-1e-6, 0.0, 2e-6]), 0.0)
            assert np.all(force.f == 0)

    def test_leading_edge_pushes_trailing_edge_pulls(self):
        pulse = PulseSpec.desk_scale(0, 0, 0, SILICON.n)
        delta_z = pulse.delta_z(SILICON.n)
        force = optical_force_density(
            FieldPath.TIME_AVERAGED, pulse, 1.0, SILICON, on_axis([-delta_z, 0.0, delta_z]), 0.0
        )
        assert force.f[0, 2] < 0
        assert force.f[1, 2] == pytest.approx(0.0, abs=1e-12 * abs(force.f[2, 2]))
        assert force.f[2, 2] == pytest.approx(-force.f[0, 2])
        assert force.provenance == ForceProvenance.OPTICAL

    @pytest.mark.parametrize("sigma", [1, -1])
    def test_paths_agree_for_circular_polarization(self, sigma: int):
        pulse = PulseSpec.desk_scale(0, 0, sigma, SILICON.n)
        delta_z = pulse.delta_z(SILICON.n)
        r = on_axis([-0.7 * delta_z, 0.4 * delta_z, 1.3 * delta_z])
        averaged = optical_force_density(FieldPath.TIME_AVERAGED, pulse, 1.0, SILICON, r, 0.0)
        instantaneous = optical_force_density(FieldPath.INSTANTANEOUS, pulse, 1.0, SILICON, r, 0.0)
        np.testing.assert_allclose(instantaneous.f[:, 2], averaged.f[:, 2], rtol=1e-3)

    def test_window_model_matches_pointwise_force(self):
        pulse = PulseSpec.desk_scale(0, 2, 0, SILICON.n)
        axis = np.linspace(-2, 2, 5) * pulse.w0
        z = np.linspace(-2, 2, 7) * pulse.delta_z(SILICON.n)
        t = 1e-14
        model = OpticalForceModel(PulseField(pulse, SILICON, 1.0, axis, axis), FieldPath.TIME_AVERAGED)
        window = model.density(z, t)
        X, Y, Z = np.meshgrid(axis, axis, z, indexing="ij")
        pointwise = optical_force_density(
            FieldPath.TIME_AVERAGED, pulse, 1.0, SILICON, np.stack([X, Y, Z], axis=-1), t
        )
        np.testing.assert_allclose(window.f, pointwise.f, rtol=1e-9, atol=1e-12 * np.max(np.abs(pointwise.f)))

    def test_net_force(self):
        force = ForceField(np.ones((2, 3, 4, 3)))
        np.testing.assert_allclose(force.total(0.5), [12.0, 12.0, 12.0])
        assert (force + force).provenance == ForceProvenance.TOTAL


class TestIndexGradientForce:
    def test_homogeneous_medium(self):
        field = np.ones((4, 4, 4))
        force = index_gradient_force_density(field, np.full((4, 4, 4), SILICON.n**2), (1.0, 1.0, 1.0))
        assert np.all(force.f == 0)

    def test_gentle_ramp(self):
        _, _, Z, h = cube(11)
        n_squared = 4.0 + 0.01 * Z
        field = np.full(Z.shape, 2.0)
        force = index_gradient_force_density(field, n_squared, (h, h, h))
        np.testing.assert_allclose(force.f[..., 2], -0.5 * EPSILON0 * 2.0 * 0.01)
        np.testing.assert_allclose(force.f[..., :2], 0.0, atol=1e-30)

    def test_interface_jump_is_refused(self):
        n_squared = np.full((5, 5, 5), 1.0)
        n_squared[:, :, 3:] = 12.0
        with pytest.raises(UnderresolvedInterfaceError) as error:
            index_gradient_force_density(np.ones((5, 5, 5)), n_squared, (1.0, 1.0, 1.0))
        assert error.value.cell_index == (0, 0, 2)
        assert error.value.exit_code == 3


class TestElasticForce:
    def test_rigid_translation(self):
        ra = np.zeros((6, 7, 8, 3))
        ra[...] = [1e-9, -2e-9, 3e-9]
        force = elastic_force_density(ra, SILICON, (1e-6, 1e-6, 2e-6))
        np.testing.assert_allclose(force.f, 0.0, atol=1e-9)
        assert force.provenance == ForceProvenance.ELASTIC

    def test_uniform_strain_has_no_interior_force(self):
        X, Y, Z, h = cube(9)
        ra = np.stack([1e-3 * X + 2e-3 * Y, 5e-4 * Z, -1e-3 * X + 3e-3 * Z], axis=-1)
        force = elastic_force_density(ra, SILICON, (h, h, h))
        assert np.max(np.abs(force.f[1:-1, 1:-1, 1:-1])) < 1e-6 * SILICON.C11 * 1e-3 / h

    def test_longitudinal_wave(self):
        _, _, Z, h = cube(33)
        k = 3.0
        ra = np.zeros((*Z.shape, 3))
        ra[..., 2] = 1e-9 * np.sin(k * Z)
        force = elastic_force_density(ra, SILICON, (h, h, h))
        expected = -SILICON.C11 * (2 - 2 * np.cos(k * h)) / h**2 * ra[..., 2]
        np.testing.assert_allclose(force.f[:, :, 1:-1, 2], expected[:, :, 1:-1], rtol=1e-9, atol=1e-6)
        np.testing.assert_allclose(force.f[..., :2], 0.0, atol=1e-9)

    def test_localized_displacement_exerts_no_net_force(self):
        X, Y, Z, h = cube(25)
        bump = np.exp(-(X**2 + Y**2 + Z**2) / (2 * (1 / 6) ** 2))
        ra = np.stack([1e-9 * bump * Y, -1e-9 * bump * X, 2e-9 * bump], axis=-1)
        force = elastic_force_density(ra, SILICON, (h, h, h))
        net = np.abs(force.total(1.0))
        assert np.all(net < 1e-6 * np.sum(np.abs(force.f)))

    def test_isotropic_crystal_equals_navier(self):
        medium = MediumSpec(1.5, 2000.0, 100e9, 40e9, 30e9)
        assert is_isotropic(medium)
        X, Y, Z, h = cube(11)
        ra = np.stack([np.sin(X) * Y, np.cos(Z) * X**2, X * Y * Z], axis=-1) * 1e-9
        cubic = elastic_force_density(ra, medium, (h, h, h))
        navier = navier_force_density(ra, medium.bulk_modulus, medium.shear_modulus, (h, h, h))
        np.testing.assert_allclose(cubic.f, navier.f, rtol=1e-9, atol=1e-9 * np.max(np.abs(cubic.f)))

    def test_silicon(self):
        assert not is_isotropic(SILICON)
        assert longitudinal_sound_speed(SILICON) == pytest.approx(8435, rel=1e-3)
        assert transverse_sound_speed(SILICON) == pytest.approx(5846, rel=1e-3)

