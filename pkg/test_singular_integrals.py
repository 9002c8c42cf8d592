"""Angular singular integrals against the n = 3 closed form and the regime envelopes."""
import math

import numpy as np
import pytest

from angular_lab.errors import DomainError
from angular_lab.services.grids_norms import build_sphere_grid, sphere_area
from angular_lab.services.singular_integrals import (
    closed_form_I_n3, envelope_I, envelope_J, envelope_ratio_scan, eval_I, eval_I_on_sphere, eval_J,
    is_divergent, singint_report,
)


# ============ I_ν ============

@pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
def test_value_at_origin_is_sphere_area(nu):
    assert eval_I(nu, 0.0) == pytest.approx(4 * math.pi)
    assert eval_I(nu, 0.0, n=4) == pytest.approx(2 * math.pi ** 2)


def test_closed_form_examples():
    assert eval_I(1.0, 3.0) == pytest.approx(4 * math.pi / 3, rel=1e-10)
    assert eval_I(2.0, 0.5) == pytest.approx(4 * math.pi * math.log(3), rel=1e-10)
    assert closed_form_I_n3(2.5, 1.1) == pytest.approx(28.24, abs=0.01)
    assert eval_I(1.0, 1.0) == pytest.approx(4 * math.pi, rel=1e-8)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0, 2.5])
def test_quadrature_matches_closed_form(nu):
    for r in np.geomspace(0.05, 10.0, 50):
        if nu >= 2 and abs(r - 1) < 0.01:
            continue
        assert eval_I(nu, r) == pytest.approx(closed_form_I_n3(nu, r), rel=1e-6), f"r={r}"


@pytest.mark.parametrize("nu", [2.0, 2.5, 4.0])
def test_divergent_on_the_shell(nu):
    value = eval_I(nu, 1.0)
    assert is_divergent(value)
    assert is_divergent(closed_form_I_n3(nu, 1.0))
    assert not is_divergent(eval_I(nu, 1.5))


def test_planar_integral_matches_trapezoid():
    sphere = build_sphere_grid(2, 399)
    x = np.array([3.0 * math.cos(0.3), 3.0 * math.sin(0.3)])
    assert eval_I(1.5, 3.0, n=2) == pytest.approx(eval_I_on_sphere(1.5, x, sphere), rel=1e-10)


def test_rotation_invariance():
    sphere = build_sphere_grid(3, 48)
    rng = np.random.default_rng(3)
    reference = eval_I(1.0, 3.0)
    for _ in range(5):
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        assert eval_I_on_sphere(1.0, 3.0 * e, sphere) == pytest.approx(reference, rel=1e-10)


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_I(0.0, 1.0)
    with pytest.raises(DomainError):
        eval_I(1.0, -1.0)
    with pytest.raises(DomainError):
        eval_J(1.0, 1.0, -2.0)
    with pytest.raises(DomainError):
        eval_I_on_sphere(1.0, np.zeros(2), build_sphere_grid(3, 2))


def test_singint_report_on_the_shell():
    report = singint_report(2.0, 1.0)
    assert report.divergent
    assert math.isinf(report.closed_form)
    assert report.envelope.regime == "shell_log"


# ============ ENVELOPES ============

def test_envelope_examples():
    far = envelope_I(1.0, 3.0)
    assert far.regime == "far"
    assert far.value == pytest.approx(10 ** -0.5)
    assert envelope_I(2.5, 1.1).value == pytest.approx(0.1 ** -0.5)
    assert envelope_I(2.5, 1.1).regime == "shell_super"
    near = envelope_I(1.0, 0.3)
    assert (near.regime, near.value) == ("near_origin", 1.0)
    assert envelope_I(1.0, 0.9).regime == "shell_sub"


@pytest.mark.parametrize("nu", [1.0, 2.0, 2.5])
@pytest.mark.parametrize("r", [0.6, 0.8, 0.95])
def test_shell_label_symmetric_under_inversion(nu, r):
    assert envelope_I(nu, r).regime == envelope_I(nu, 1 / r).regime


def test_japanese_bracket_integral():
    assert eval_J(2.0, 0.0, 1.0) == pytest.approx(2 * math.pi)
    ratio = eval_J(1.0, 5.0, 1.0) / envelope_J(1.0, 5.0, 1.0).value
    assert 2 * math.pi <= ratio <= 8 * math.pi
    for r, rho in [(0.5, 3.0), (4.0, 4.1), (10.0, 1.0)]:
        assert eval_J(1.5, r, rho) <= sphere_area(3)


def test_diagonal_envelope_formulas():
    assert envelope_J(1.0, 4.0, 3.0).formula_id == "J_diagonal_sub"
    assert envelope_J(2.0, 4.0, 3.0).formula_id == "J_diagonal_log"
    assert envelope_J(2.5, 4.0, 3.0).formula_id == "J_diagonal_super"
    assert envelope_J(2.5, 0.5, 3.0).regime == "near_origin"


# ============ RATIO SCANS ============

@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 2.5])
def test_far_ratio_is_flat(nu):
    assert envelope_ratio_scan(nu, 3, "far", samples=20).spread < 2


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
def test_near_origin_ratio_bounds(nu):
    scan = envelope_ratio_scan(nu, 3, "near_origin", samples=20)
    assert 4 * math.pi * 3 ** -nu <= scan.min_ratio
    assert scan.max_ratio <= 4 * math.pi * 3 ** nu


@pytest.mark.parametrize("nu, regime", [
    (1.0, "shell_sub"), (2.0, "shell_log"), (2.5, "shell_super"),
    (1.0, "mixed_J"), (2.0, "mixed_J"), (2.5, "mixed_J"),
])
def test_envelope_tracks_each_regime(nu, regime):
    scan = envelope_ratio_scan(nu, 3, regime, samples=12)
    assert math.isfinite(scan.max_ratio)
    assert scan.min_ratio > 0
    assert scan.spread < 50


def test_shell_regime_requires_matching_nu():
    with pytest.raises(DomainError):
        envelope_ratio_scan(1.0, 3, "shell_super")
    with pytest.raises(DomainError):
        envelope_ratio_scan(2.5, 3, "shell_log")
