import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from nv_deer_sim.errors import InvalidArgumentError, InvalidOrderingError
from nv_deer_sim.spin.constants import zeeman_mhz_per_gauss
from nv_deer_sim.spin.core import eigh
from nv_deer_sim.spin.hamiltonians import (
    FieldConfig,
    aligned_axis,
    axial_tensor,
    build_hamiltonian,
    build_nv_gs,
    build_nvh,
    build_p1,
    calibrate_field,
    default_species,
    field_frame,
    orientation_axes,
    p1_species,
    rotation_to_z,
)
from nv_deer_sim.spin.transitions import aligned_nv_frequencies


def test_field_direction_is_normalized():
    field = FieldConfig(10.0, (2.0, 0.0, 0.0))
    assert field.direction == (1.0, 0.0, 0.0)
    np.testing.assert_allclose(field.vector, [10.0, 0.0, 0.0])


@pytest.mark.parametrize("kwargs", [
    {"magnitude_gauss": -1.0},
    {"magnitude_gauss": float("nan")},
    {"magnitude_gauss": 1.0, "direction": (0.0, 0.0, 0.0)},
])
def test_field_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        FieldConfig(**kwargs)


def test_matrix_sizes(field_111):
    axis = aligned_axis(field_111)
    assert build_nv_gs(field_111, axis).shape == (3, 3)
    assert build_p1(field_111, axis).shape == (6, 6)
    assert build_nvh(field_111, axis).shape == (12, 12)


def test_unknown_species():
    with pytest.raises(InvalidArgumentError):
        default_species("ch3")


def test_orientations_tag_axial(field_111):
    orientations = orientation_axes(field_111)
    assert orientations.axial == (True, False, False, False)
    np.testing.assert_allclose(np.abs(orientations.projections((1, 1, 1))), [1, 1 / 3, 1 / 3, 1 / 3])


def test_axial_tensor():
    n = np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(axial_tensor(114.0, 81.0, n), np.diag([81.0, 81.0, 114.0]))


def test_rotation_to_z():
    for direction in [(1, 1, 1), (0, 0, -1), (0, 0, 1), (1, -2, 0.5)]:
        rot = rotation_to_z(direction)
        d = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
        np.testing.assert_allclose(rot @ d, [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(rot @ rot.T, np.eye(3), atol=1e-12)


def test_field_frame_keeps_relative_geometry(field_111):
    axis = orientation_axes().axes[1]
    b, n = field_frame(field_111, axis)
    np.testing.assert_allclose(b, [0, 0, 78.6], atol=1e-12)
    assert float(n @ b) == pytest.approx(float(axis @ field_111.vector), abs=1e-10)


def test_lower_nv_line_at_working_point(field_111):
    f1, f2 = aligned_nv_frequencies(field_111)
    assert f2 == pytest.approx(2652.0, abs=6.0)
    assert f1 > 2870.0 > f2


def test_nv_zero_field():
    eig = eigh(build_nv_gs(FieldConfig(0.0), aligned_axis(FieldConfig(1.0))))
    np.testing.assert_allclose(eig.energies, [0.0, 2870.0, 2870.0], atol=1e-9)


@pytest.mark.parametrize("direction", [(1, 1, 1), (1, 0, 0), (0.3, -0.7, 0.2)])
def test_spectrum_invariant_under_joint_rotation(direction):
    # Same field-axis geometry expressed in two lab frames
    field = FieldConfig(78.6, direction)
    axis = orientation_axes().axes[2]
    h_lab = build_p1(field, axis)
    b, n = field_frame(field, axis)
    h_rot = build_p1(FieldConfig(float(np.linalg.norm(b)), tuple(b)), n)
    np.testing.assert_allclose(eigh(h_lab).energies, eigh(h_rot).energies, atol=1e-8)


def test_p1_high_field_splitting_is_a_parallel():
    field = FieldConfig(5000.0, (1, 1, 1))
    energies = eigh(build_p1(field, aligned_axis(field))).energies
    upper = np.sort(energies[3:])
    lower = np.sort(energies[:3])
    # Electron-flip lines with mI conserved: neighbouring lines differ by ~A_par
    lines = np.sort(upper - lower[::-1])
    assert np.diff(lines) == pytest.approx([114.0, 114.0], rel=5e-3)


def test_species_overrides():
    species = p1_species().with_overrides(q_perp_mhz=0.0)
    assert species.q_perp_mhz == 0.0
    assert species.dims == (2, 3)


def test_calibrate_field():
    assert calibrate_field(3090.3, 2649.7) == pytest.approx(78.6, abs=0.1)
    assert calibrate_field(2870.0, 2870.0) == 0.0
    with pytest.raises(InvalidOrderingError):
        calibrate_field(2649.7, 3090.3)
    with pytest.raises(InvalidArgumentError):
        calibrate_field(100.0, 0.0)


def test_calibrate_field_round_trip():
    for gauss in np.linspace(10.0, 500.0, 50):
        f1, f2 = aligned_nv_frequencies(FieldConfig(float(gauss), (1, 1, 1)))
        assert calibrate_field(f1, f2) == pytest.approx(gauss, abs=1e-6)


def test_aligned_nv_splitting_at_working_point(field_111):
    f1, f2 = aligned_nv_frequencies(field_111)
    assert f1 - f2 == pytest.approx(2.0 * zeeman_mhz_per_gauss(2.0028) * 78.6, rel=1e-9)
    assert f1 - f2 == pytest.approx(440.5, abs=0.5)


def test_axes_are_tetrahedral():
    axes = orientation_axes().axes
    np.testing.assert_allclose(np.linalg.norm(axes, axis=1), 1.0, atol=1e-15)
    dots = axes @ axes.T
    off_diagonal = dots[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off_diagonal, -1.0 / 3.0, atol=1e-12)


def test_p1_without_couplings_or_field_is_zero():
    species = p1_species(a_par_mhz=0.0, a_perp_mhz=0.0, q_perp_mhz=0.0)
    h = build_hamiltonian(species, FieldConfig(0.0).vector, orientation_axes().axes[0])
    np.testing.assert_allclose(h, np.zeros((6, 6)), atol=0.0)


def test_spectrum_isotropic_under_random_joint_rotations():
    rotations = Rotation.random(100, 11).as_matrix()
    field = FieldConfig(78.6, (0.2, -0.5, 0.8))
    axis = orientation_axes().axes[1]
    reference = eigh(build_p1(field, axis)).energies
    for rot in rotations:
        turned = FieldConfig(field.magnitude_gauss, tuple(rot @ np.asarray(field.direction)))
        np.testing.assert_allclose(eigh(build_p1(turned, rot @ axis)).energies, reference, atol=1e-8)


@pytest.mark.parametrize("builder", [build_p1, build_nvh])
def test_energies_continuous_at_zero_field(builder):
    axis = orientation_axes().axes[0]
    at_zero = eigh(builder(FieldConfig(0.0), axis)).energies
    for gauss in (1e-3, 1e-5):
        near = eigh(builder(FieldConfig(gauss, (0.3, 0.1, 1.0)), axis)).energies
        np.testing.assert_allclose(near, at_zero, atol=10.0 * gauss)
