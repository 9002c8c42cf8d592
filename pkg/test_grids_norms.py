"""Radial/sphere quadrature, mixed norms, differentiation and grid-field files."""
import math

import numpy as np
import pytest

from angular_lab.errors import ConfigurationError, DomainError, NonConvergenceError
from angular_lab.models.fields import GridField
from angular_lab.services.grids_norms import (
    angular_profile, build_radial_grid, build_sphere_grid, converged_mixed_norm, dilate_field,
    export_grid_field, gradient_magnitude, import_grid_field, mask_ball, mixed_norm, radial_derivative,
    sample_function, spacetime_norm, sphere_area,
)


def _gaussian(points):
    return np.exp(-np.sum(points ** 2, axis=-1))


@pytest.fixture(scope="module")
def radial():
    return build_radial_grid(1e-4, 8.0, 256, "composite")


@pytest.fixture(scope="module")
def sphere():
    return build_sphere_grid(3, 8)


@pytest.fixture(scope="module")
def gaussian(radial, sphere):
    return sample_function(_gaussian, radial, sphere)


# ============ QUADRATURE ============

def test_linear_grid_integrates_polynomials():
    grid = build_radial_grid(1.0, 2.0, 64, "linear")
    assert np.sum(grid.weights * grid.nodes ** 2) == pytest.approx(7 / 3, abs=1e-12)


def test_single_panel_integrates_smooth_power():
    grid = build_radial_grid(1.0, 2.0, 8, "linear")
    assert grid.size == 8
    assert np.sum(grid.weights * grid.nodes ** -0.5) == pytest.approx(2 * (math.sqrt(2) - 1), rel=1e-8)


def test_log_grid_integrates_gaussian_moment():
    grid = build_radial_grid(1e-3, 50.0, 512, "log")
    exact = math.sqrt(math.pi) / 4 - 1e-9 / 3
    assert np.sum(grid.weights * np.exp(-grid.nodes ** 2) * grid.nodes ** 2) == pytest.approx(exact, abs=1e-10)


def test_node_count_rounds_up_to_whole_panels():
    grid = build_radial_grid(1.0, 2.0, 20, "linear")
    assert grid.size == 24
    assert len(grid.breakpoints) == 4


@pytest.mark.parametrize("n, area", [(2, 2 * math.pi), (3, 4 * math.pi)])
def test_sphere_weights_sum_to_area(n, area):
    assert sphere_area(n) == pytest.approx(area)
    assert np.sum(build_sphere_grid(n, 6).weights) == pytest.approx(area, rel=1e-13)


def test_sphere_grid_integrates_quadrupole_to_zero():
    sphere = build_sphere_grid(3, 4)
    z = sphere.points[:, 2]
    assert abs(np.sum(sphere.weights * (3 * z ** 2 - 1))) < 1e-13


def test_level_zero_sphere_is_a_single_point():
    sphere = build_sphere_grid(3, 0)
    assert sphere.size == 1
    assert sphere.weights[0] == pytest.approx(4 * math.pi)


def test_grid_construction_errors():
    with pytest.raises(DomainError):
        build_sphere_grid(4, 4)
    with pytest.raises(DomainError):
        build_radial_grid(2.0, 1.0, 64)
    with pytest.raises(DomainError):
        build_radial_grid(0.0, 1.0, 64)
    with pytest.raises(DomainError):
        build_radial_grid(1.0, 2.0, 4)
    with pytest.raises(ConfigurationError):
        build_radial_grid(1.0, 2.0, 64, "cubic")


# ============ MIXED NORMS ============

def test_gaussian_l2_norm(gaussian):
    assert mixed_norm(gaussian, 0, 2, 2) == pytest.approx((math.pi / 2) ** 0.75, rel=1e-8)


def test_radial_function_mixed_exponents(gaussian):
    expected = (4 * math.pi) ** (1 / 5 - 1 / 3) * math.sqrt(math.pi / 3)
    assert mixed_norm(gaussian, 0, 3, 5) == pytest.approx(expected, rel=1e-8)


def test_annulus_indicator():
    f = sample_function(lambda x: np.ones(x.shape[:-1]), build_radial_grid(1.0, 2.0, 64, "linear"),
                        build_sphere_grid(3, 4))
    assert mixed_norm(f, 0, 2, 2) == pytest.approx(math.sqrt(28 * math.pi / 3), rel=1e-12)


def test_first_harmonic_gaussian(radial, sphere):
    f = sample_function(lambda x: x[..., 2] * _gaussian(x), radial, sphere)
    assert mixed_norm(f, 0, 2, 2) == pytest.approx((math.pi / 2) ** 0.75 / 2, rel=1e-8)


def test_normalized_angular_norm_grows_with_exponent(radial, sphere):
    rng = np.random.default_rng(11)
    f = GridField(radial=radial, sphere=sphere, values=rng.normal(size=(radial.size, sphere.size)))
    area = sphere_area(3)
    profiles = [angular_profile(f, q) / area ** (1 / q) for q in (1, 2, 3, 6)]
    profiles.append(angular_profile(f, math.inf))
    for low, high in zip(profiles, profiles[1:]):
        assert np.all(low <= high * (1 + 1e-12))


def test_norm_is_homogeneous(gaussian):
    scaled = gaussian.with_values(-3.0 * gaussian.values)
    assert mixed_norm(scaled, 0.25, 3, 4) == pytest.approx(3 * mixed_norm(gaussian, 0.25, 3, 4), rel=1e-13)


@pytest.mark.parametrize("alpha, p, p_tilde", [(0, 2, 2), (-0.5, 2, 4), (0.3, 5, math.inf), (0, math.inf, 3)])
def test_dilation_law(gaussian, alpha, p, p_tilde):
    lam = 2.5
    expected = lam ** (alpha + 3 / p) * mixed_norm(gaussian, alpha, p, p_tilde)
    assert mixed_norm(dilate_field(gaussian, lam), alpha, p, p_tilde) == pytest.approx(expected, rel=1e-12)


def test_non_integrable_weight_is_refused(gaussian):
    with pytest.raises(DomainError) as exc:
        mixed_norm(gaussian, -3, 1, 2)
    assert exc.value.field == "alpha"


# ============ SPACETIME NORMS ============

def test_constant_trajectory(gaussian):
    norm = mixed_norm(gaussian, 0, 2, 2)
    trajectory = [(t, gaussian) for t in (0.0, 1.0, 2.0)]
    assert spacetime_norm(trajectory, 0, 3, 2, 2) == pytest.approx(2 ** (1 / 3) * norm, rel=1e-12)


def test_single_snapshot_sup_in_time(gaussian):
    assert spacetime_norm([(0.0, gaussian)], 0, math.inf, 2, 2) == pytest.approx(mixed_norm(gaussian, 0, 2, 2))


def test_decaying_trajectory(gaussian):
    norm = mixed_norm(gaussian, 0, 2, 2)
    times = np.linspace(1.0, 4.0, 201)
    trajectory = [(t, gaussian.with_values(gaussian.values / math.sqrt(t))) for t in times]
    assert spacetime_norm(trajectory, 0, 2, 2, 2) == pytest.approx(norm * math.sqrt(math.log(4)), rel=1e-4)


def test_spacetime_norm_errors(gaussian):
    with pytest.raises(DomainError):
        spacetime_norm([], 0, 2, 2, 2)
    with pytest.raises(DomainError):
        spacetime_norm([(1.0, gaussian), (1.0, gaussian)], 0, 2, 2, 2)
    with pytest.raises(DomainError):
        spacetime_norm([(1.0, gaussian)], 0, 2, 2, 2)


# ============ REFINEMENT ============

def test_converged_mixed_norm(sphere):
    def factory(k):
        return sample_function(_gaussian, build_radial_grid(1e-4, 8.0, 64 * 2 ** k, "composite"), sphere)

    value, doublings = converged_mixed_norm(factory, 0, 2, 2)
    assert value == pytest.approx((math.pi / 2) ** 0.75, rel=1e-6)
    assert 1 <= doublings


def test_drifting_norm_never_settles(gaussian):
    def factory(k):
        return gaussian.with_values(gaussian.values * (1 + 2.0 ** -k))

    with pytest.raises(NonConvergenceError):
        converged_mixed_norm(factory, 0, 2, 2)


# ============ DIFFERENTIATION ============

def test_gradient_of_coordinate_function():
    f = sample_function(lambda x: x[..., 2], build_radial_grid(0.5, 3.0, 32, "linear"), build_sphere_grid(3, 8))
    np.testing.assert_allclose(gradient_magnitude(f).values, 1.0, atol=1e-8)


def test_gradient_of_planar_coordinate():
    f = sample_function(lambda x: x[..., 1], build_radial_grid(0.5, 3.0, 32, "linear"), build_sphere_grid(2, 15))
    np.testing.assert_allclose(gradient_magnitude(f).values, 1.0, atol=1e-8)


def test_gradient_of_radial_square():
    radial = build_radial_grid(0.5, 3.0, 32, "linear")
    f = sample_function(lambda x: np.sum(x ** 2, axis=-1), radial, build_sphere_grid(3, 4))
    np.testing.assert_allclose(gradient_magnitude(f).values[0], 2 * radial.nodes[:, None]
                               * np.ones((1, f.sphere.size)), rtol=1e-9)


# ============ FILES AND MASKS ============

def test_export_then_import(tmp_path):
    radial = build_radial_grid(0.1, 2.0, 16, "log")
    f = sample_function(lambda x: np.stack([x[..., 0], _gaussian(x)]), radial, build_sphere_grid(3, 2))
    path = tmp_path / "field.csv"
    export_grid_field(f, path)
    assert path.read_text(encoding="utf-8").startswith("# grid:")
    g = import_grid_field(path)
    np.testing.assert_array_equal(g.radial.nodes, f.radial.nodes)
    np.testing.assert_array_equal(g.values, f.values)
    assert g.sphere.level == 2


def test_import_requires_descriptor(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text("rho,omega_index,component,value\n1.0,0,0,1.0\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        import_grid_field(path)


def test_mask_ball(gaussian):
    masked = mask_ball(gaussian, 1.0)
    outside = gaussian.radial.nodes >= 1.0
    assert np.all(masked.values[:, outside, :] == 0)
    np.testing.assert_array_equal(masked.values[:, ~outside, :], gaussian.values[:, ~outside, :])


def test_radial_derivative_of_gaussian(gaussian, radial):
    derivative = radial_derivative(gaussian)
    expected = -2 * radial.nodes * np.exp(-radial.nodes ** 2)
    np.testing.assert_allclose(derivative.values[0], expected[:, None] * np.ones((1, derivative.sphere.size)),
                               atol=1e-6)
