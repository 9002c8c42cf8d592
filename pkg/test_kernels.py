"""Riesz, bracket and heat convolutions on product grids; multipliers; decay fits."""
import math

import numpy as np
import pytest
from scipy.special import erf

from angular_lab.errors import DomainError
from angular_lab.models.fields import SpectralField
from angular_lab.models.indices import IndexTuple
from angular_lab.services.grids_norms import (
    build_radial_grid, build_sphere_grid, dilate_field, mixed_norm, sample_function,
)
from angular_lab.services.kernels import (
    fit_decay, fractional_derivative, heat_evolve, heat_profile, local_decay_constants, riesz_potential,
    riesz_profile, smooth_potential, verify_decay,
)


def _gaussian(points):
    return np.exp(-np.sum(points ** 2, axis=-1))


def _coulomb(r):
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, math.pi ** 1.5 * erf(safe) / safe, 2 * math.pi)


@pytest.fixture(scope="module")
def radial_gaussian():
    return sample_function(_gaussian, build_radial_grid(1e-3, 8.0, 128, "composite"), build_sphere_grid(3, 0))


# ============ RIESZ ============

def test_coulomb_potential_of_gaussian(radial_gaussian):
    radii = [0.0, 0.3, 1.0, 2.0, 4.0]
    values = riesz_profile(radial_gaussian, 1.0, radii)[0, :, 0]
    np.testing.assert_allclose(values, _coulomb(radii), rtol=1e-3)


def test_coulomb_error_shrinks_under_doubling():
    radii = [0.5, 1.5, 3.0]
    errors = []
    for N in (64, 128):
        f = sample_function(_gaussian, build_radial_grid(1e-3, 8.0, N, "composite"), build_sphere_grid(3, 0))
        values = riesz_profile(f, 1.0, radii)[0, :, 0]
        errors.append(np.max(np.abs(values / _coulomb(radii) - 1)))
    assert errors[1] <= max(0.6 * errors[0], 1e-8)


def test_riesz_dilation():
    gamma = 1.5
    f = sample_function(lambda x: (1 + x[..., 2]) * _gaussian(x), build_radial_grid(1e-3, 7.0, 64, "composite"),
                        build_sphere_grid(3, 4))
    base = riesz_potential(f, gamma).values
    dilated = riesz_potential(dilate_field(f, 2.0), gamma).values
    np.testing.assert_allclose(dilated, 2 ** (3 - gamma) * base, rtol=1e-6)


def test_riesz_exponent_range(radial_gaussian):
    for gamma in (0.0, 3.0, 3.5):
        with pytest.raises(DomainError):
            riesz_potential(radial_gaussian, gamma)


# ============ BRACKET KERNEL ============

def test_bracket_potential_is_dominated():
    f = sample_function(_gaussian, build_radial_grid(1e-3, 6.0, 32, "composite"), build_sphere_grid(3, 0))
    smooth = smooth_potential(f, 1.5).values
    singular = riesz_potential(f, 1.5).values
    assert np.all(smooth > 0)
    assert np.all(smooth <= singular * (1 + 1e-6))


def test_bracket_potential_far_field():
    gamma = 1.5
    ball = sample_function(lambda x: np.ones(x.shape[:-1]), build_radial_grid(1e-3, 0.5, 32, "linear"),
                           build_sphere_grid(3, 0))
    target = build_radial_grid(9.5, 10.5, 8, "linear")
    values = smooth_potential(ball, gamma, target=target).values[0, :, 0]
    expected = math.pi / 6 * (1 + target.nodes ** 2) ** (-gamma / 2)
    np.testing.assert_allclose(values, expected, rtol=1e-2)


def test_bracket_exponent_must_be_positive(radial_gaussian):
    with pytest.raises(DomainError):
        smooth_potential(radial_gaussian, 0.0)


# ============ HEAT ============

@pytest.fixture(scope="module")
def heat_source():
    return sample_function(_gaussian, build_radial_grid(1e-3, 12.0, 128, "composite"), build_sphere_grid(3, 0))


def test_heat_flow_of_gaussian(heat_source):
    t = 0.5
    evolved = heat_evolve(heat_source, t)
    rho = heat_source.radial.nodes
    expected = (1 + 4 * t) ** -1.5 * np.exp(-rho ** 2 / (1 + 4 * t))
    np.testing.assert_allclose(evolved.values[0, :, 0], expected, atol=1e-7)


def test_heat_flow_conserves_mass(heat_source):
    mass = mixed_norm(heat_source, 0, 1, 1)
    assert mixed_norm(heat_evolve(heat_source, 0.7), 0, 1, 1) == pytest.approx(mass, rel=1e-6)
    assert mass == pytest.approx(math.pi ** 1.5, rel=1e-8)


def test_heat_profile_at_the_origin(heat_source):
    t = 0.25
    values = heat_profile(heat_source, t, [0.0, 2.0])
    expected = (1 + 4 * t) ** -1.5 * np.exp(-np.array([0.0, 4.0]) / (1 + 4 * t))
    np.testing.assert_allclose(values[0, :, 0], expected, atol=1e-7)


def test_heat_semigroup(heat_source):
    twice = heat_evolve(heat_evolve(heat_source, 0.2), 0.3)
    once = heat_evolve(heat_source, 0.5)
    np.testing.assert_allclose(twice.values, once.values, atol=1e-7)


def test_heat_time_zero_and_negative(heat_source):
    same = heat_evolve(heat_source, 0.0)
    np.testing.assert_array_equal(same.values, heat_source.values)
    assert same.values is not heat_source.values
    with pytest.raises(DomainError):
        heat_evolve(heat_source, -0.1)


# ============ MULTIPLIERS ============

@pytest.fixture(scope="module")
def trig_field():
    N, length = 32, 2 * math.pi
    x = np.arange(N) * (length / N)
    X, Y, _ = np.meshgrid(x, x, x, indexing="ij")
    return SpectralField(length=length, values=(np.sin(X) * np.cos(2 * Y))[None])


def test_second_order_multiplier_is_minus_laplacian(trig_field):
    np.testing.assert_allclose(fractional_derivative(trig_field, 2.0).values, 5 * trig_field.values, atol=1e-10)


def test_zero_order_multiplier_fixes_mean_free_fields(trig_field):
    np.testing.assert_allclose(fractional_derivative(trig_field, 0.0).values, trig_field.values, atol=1e-12)


def test_multipliers_compose(trig_field):
    composed = fractional_derivative(fractional_derivative(trig_field, 0.5), 1.5)
    np.testing.assert_allclose(composed.values, fractional_derivative(trig_field, 2.0).values, atol=1e-10)


# ============ DECAY ============

def test_fit_exact_power_law():
    times = np.geomspace(1, 100, 8)
    fit = fit_decay([(t, 3 * t ** -1.5) for t in times])
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.residual < 1e-12
    assert fit.points == 8


def test_fit_constant_series():
    assert fit_decay([(t, 2.0) for t in (1, 2, 3, 4)]).slope == pytest.approx(0.0, abs=1e-12)


def test_fit_heat_profile_approaches_rate():
    times = np.geomspace(10, 1000, 9)
    slope = fit_decay([(t, (1 + 4 * t) ** -1.5) for t in times]).slope
    assert -1.5 < slope < -1.47


def test_fit_errors():
    with pytest.raises(DomainError):
        fit_decay([(1, 1.0), (2, 0.5), (3, 0.3)])
    with pytest.raises(DomainError):
        fit_decay([(1, 1.0), (2, 0.0), (3, 0.3), (4, 0.2)])
    with pytest.raises(DomainError):
        fit_decay([(t, 1.0 / t) for t in range(1, 10)], window=(5, 7))


def _decay_tuple(p, p_tilde, q, q_tilde):
    return IndexTuple(n=3, p=p, p_tilde=p_tilde, q=q, q_tilde=q_tilde, alpha=0, beta=0)


def test_saturating_gaussian_decay(heat_source):
    report = verify_decay(_decay_tuple(1, "inf", "inf", "inf"), 0, heat_source,
                          np.geomspace(10, 100, 6), saturating=True)
    assert float(report.predicted) == 1.5
    assert report.verdict == "pass"
    assert abs(report.fit.slope + 1.5) <= 0.05


def test_boundary_tuple_decays_at_least_as_fast(heat_source):
    report = verify_decay(_decay_tuple(2, 2, "inf", "inf"), 0, heat_source, np.geomspace(10, 100, 6))
    assert float(report.predicted) == 0.75
    assert report.verdict == "pass"
    assert all(a >= b for a, b in zip(report.norms, report.norms[1:]))


def test_decay_refuses_failing_tuple(heat_source):
    with pytest.raises(DomainError):
        verify_decay(_decay_tuple(4, 2, 2, 2), 0, heat_source, [1, 2, 3, 4])


def test_localized_constants_grow_at_predicted_rate():
    t = IndexTuple(n=3, p="6/5", q=12, alpha=0, beta=2, p_tilde=2, q_tilde=2)
    report = local_decay_constants(t)
    assert report.expected_slope == pytest.approx(0.5)
    assert report.verdict == "pass"
    assert len(report.constants) == 3


def test_localized_constants_need_equal_angular_exponents():
    t = IndexTuple(n=3, p="6/5", q=12, alpha=0, beta=2, p_tilde=2, q_tilde=4)
    with pytest.raises(DomainError):
        local_decay_constants(t)
