"""Exponent arithmetic: conjugates, Λ/Ω, angular thresholds, CKN deltas, scaling solvers."""
import math
from fractions import Fraction as F

import pytest
from pydantic import ValidationError

from angular_lab.errors import ConfigurationError, DomainError
from angular_lab.models.indices import INF, IndexTuple, format_ext_real, parse_ext_real
from angular_lab.services.index_core import (
    ckn_deltas, ckn_scaling_gamma, compare, from_recip, holder_conjugate, kato_alpha,
    lambda_index, omega_index, ptilde_global, ptilde_global_degenerate, ptilde_local, recip,
    sw_scaling_gamma, sw_scaling_residual, yz_scaling_residual, yz_time_exponent,
)


# ============ EXTENDED REALS ============

def test_reciprocal_of_infinity_is_exact_zero():
    assert recip(INF) == 0
    assert isinstance(recip(INF), F)
    assert from_recip(F(0)) == INF
    assert recip(4) == F(1, 4)


@pytest.mark.parametrize("raw, expected", [
    ("3/2", F(3, 2)),
    ("inf", INF),
    ("∞", INF),
    (0.4, F(2, 5)),
    (2, F(2)),
    (float("inf"), INF),
])
def test_parse_ext_real(raw, expected):
    assert parse_ext_real(raw) == expected


def test_ext_real_round_trip():
    for value in (F(-1, 2), F(12), INF, F(53, 20)):
        assert parse_ext_real(format_ext_real(value)) == value


@pytest.mark.parametrize("raw", ["-inf", float("nan"), True, "abc"])
def test_parse_ext_real_rejects(raw):
    with pytest.raises(ValueError):
        parse_ext_real(raw)


def test_compare_states():
    assert compare(F(1), F(2), "<") == "satisfied"
    assert compare(F(1), F(1), "<") == "boundary"
    assert compare(F(1), F(1), "≤") == "satisfied"
    assert compare(F(3), F(2), "≤") == "violated"
    assert compare(INF, INF, "=") == "satisfied"
    # floats within the tolerance count as equal
    assert compare(0.1 + 0.2, 0.3, "=") == "satisfied"
    assert compare(0.1 + 0.2, 0.3, ">") == "boundary"


# ============ INDEX TUPLE ============

def test_index_tuple_rejects_bad_lebesgue_exponent():
    with pytest.raises(ValidationError) as exc:
        IndexTuple(n=3, p=0.5)
    assert "p" in str(exc.value)


@pytest.mark.parametrize("fields", [
    {"n": 1},
    {"a": 0},
    {"a": "3/2"},
    {"alpha": "inf"},
    {"eta": -1},
    {"bogus": 1},
])
def test_index_tuple_invariants(fields):
    with pytest.raises(ValidationError):
        IndexTuple(**fields)


def test_require_names_missing_field():
    t = IndexTuple(n=3, p=2)
    with pytest.raises(ConfigurationError) as exc:
        t.require("n", "p", "q")
    assert exc.value.field == "q"


def test_tuple_serialization_is_exact():
    t = IndexTuple(n=3, p="3/2", q="inf", alpha=-0.4)
    dumped = t.model_dump()
    assert dumped["p"] == "3/2"
    assert dumped["q"] == "inf"
    assert IndexTuple.model_validate(t.model_dump(exclude_none=True)) == t


# ============ CONJUGATES AND INDICES ============

@pytest.mark.parametrize("p, expected", [(2, F(2)), (1, INF), (4, F(4, 3)), (INF, F(1))])
def test_holder_conjugate(p, expected):
    assert holder_conjugate(p) == expected


@pytest.mark.parametrize("p", [F(1), F(3, 2), F(2), F(7), INF])
def test_holder_conjugate_is_involution(p):
    assert holder_conjugate(holder_conjugate(p)) == p


def test_holder_conjugate_domain():
    with pytest.raises(DomainError):
        holder_conjugate(F(1, 2))


@pytest.mark.parametrize("args, expected", [
    ((F(0), F(5), F(5), 3), F(0)),
    ((F(-1, 2), F(2), F(4), 3), F(0)),
    ((F(1, 2), F(2), F(2), 3), F(1, 2)),
])
def test_lambda_index(args, expected):
    assert lambda_index(*args) == expected


@pytest.mark.parametrize("alpha", [F(-3, 2), F(0), F(7, 3)])
@pytest.mark.parametrize("p", [F(1), F(3), INF])
def test_lambda_index_equal_exponents(alpha, p):
    assert lambda_index(alpha, p, p, 3) == alpha


@pytest.mark.parametrize("args, expected", [
    ((F(0), F(2), INF, 3), F(3, 2)),
    ((F(-1, 2), F(6), F(2), 3), F(1)),
    ((F(0), INF, INF, 3), F(0)),
])
def test_omega_index(args, expected):
    assert omega_index(*args) == expected


# ============ ANGULAR THRESHOLDS ============

@pytest.mark.parametrize("alpha, expected", [(F(0), F(4, 3)), (F(-1, 2), F(2)), (F(1, 2), F(4, 3))])
def test_ptilde_local(alpha, expected):
    assert ptilde_local(alpha, F(2), 3) == expected


@pytest.mark.parametrize("alpha", [F(-3, 4), F(1)])
def test_ptilde_local_domain(alpha):
    with pytest.raises(DomainError):
        ptilde_local(alpha, F(2), 3)


@pytest.mark.parametrize("alpha, p, expected", [
    (F(-1, 2), F(2), F(4)),
    (F(0), F(5), F(5)),
    (F(1, 2), F(2), F(4, 3)),
    (F(-1, 2), F(3), F(12)),
])
def test_ptilde_global(alpha, p, expected):
    assert ptilde_global(alpha, p, 3) == expected


def test_ptilde_global_degenerate_is_infinite():
    # αp + n − 1 = 0
    assert ptilde_global(F(-1), F(2), 3) == INF
    assert ptilde_global_degenerate(F(-1), F(2), 3)
    assert not ptilde_global_degenerate(F(-1, 2), F(2), 3)


def test_ptilde_global_outside_range():
    with pytest.raises(DomainError):
        ptilde_global(F(3, 4), F(2), 3)
    with pytest.raises(DomainError):
        ptilde_global(F(-2), F(2), 3)


@pytest.mark.parametrize("alpha, p", [
    (a, p) for a in (F(-3, 8), F(-1, 4), F(-1, 8)) for p in (F(3), F(4), F(5))
])
def test_threshold_order_negative_alpha(alpha, p):
    assert ptilde_local(alpha, p, 3) < p < ptilde_global(alpha, p, 3)


@pytest.mark.parametrize("alpha, p", [
    (a, p) for a in (F(1, 8), F(1, 4), F(3, 8)) for p in (F(3), F(4), F(6), F(10))
])
def test_threshold_order_positive_alpha(alpha, p):
    assert ptilde_local(alpha, p, 3) < ptilde_global(alpha, p, 3) < p


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("p", [F(2), F(3), F(8)])
def test_thresholds_meet_at_one_half(n, p):
    assert ptilde_local(F(1, 2), p, n) == ptilde_global(F(1, 2), p, n)


# ============ CKN ============

def _ckn(**fields) -> IndexTuple:
    base = {"n": 3, "a": 1, "sigma": 1, "r": 2, "q": 2, "p": 2}
    base.update(fields)
    return IndexTuple(**base)


def test_ckn_deltas_hardy():
    d = ckn_deltas(_ckn(r_tilde=2, q_tilde=2, p_tilde=2, gamma=1, alpha=0, beta=0))
    assert d.delta == 1
    assert d.delta_tilde == 1
    assert d.residual == 0


def test_ckn_deltas_interpolated():
    assert ckn_deltas(_ckn(a="1/2")).delta == F(1, 2)


@pytest.mark.parametrize("sigma", [F(1, 3), F(1), F(2)])
def test_ckn_delta_equals_sigma_when_r_equals_p(sigma):
    d = ckn_deltas(_ckn(sigma=sigma, r=5, p=5, q=3))
    assert d.delta == sigma
    assert d.delta_tilde is None and d.residual is None


def test_ckn_scaling_gamma_zeroes_residual():
    t = _ckn(a="1/2", alpha="1/4", beta="-1/3", r_tilde=2, q_tilde=3, p_tilde=6, gamma=0)
    gamma = ckn_scaling_gamma(t)
    assert ckn_deltas(t.updated(gamma=gamma)).residual == 0


# ============ SCALING SOLVERS ============

def test_sw_scaling_gamma():
    assert sw_scaling_gamma(F(0), F(0), F(2), F(4), 3) == (F(9, 4), False, "")
    solved = sw_scaling_gamma(F(0), F(0), F(3), F(3), 3)
    assert solved.value == 3 and solved.flagged
    assert sw_scaling_gamma(F("-0.4"), F(0), F(2), F(4), 3).value == F(53, 20)


def test_sw_scaling_residual():
    t = IndexTuple(n=3, p=2, q=4, alpha=0, beta=0, gamma="9/4")
    assert sw_scaling_residual(t) == 0
    assert sw_scaling_residual(t.updated(gamma="5/2")) == F(1, 4)


def test_small_data_solvers():
    assert kato_alpha(F(3), 3) == 0
    assert kato_alpha(F(5), 3) == F(2, 5)
    assert yz_time_exponent(F(-1, 2), F(3), 3) == 4
    assert yz_time_exponent(F(0), F(3), 3) == INF
    assert yz_scaling_residual(F(-1, 2), F(3), F(4), 3) == 0
    with pytest.raises(DomainError):
        yz_time_exponent(F(1, 2), F(3), 3)
    assert math.isinf(yz_time_exponent(F(-1, 2), F(2), 3))
