"""
Exponent arithmetic: Hölder conjugates, the Λ and Ω indices, angular thresholds
p̃_L / p̃_G, CKN deltas and the scaling solvers.

Values are exact Fractions whenever the inputs are, math.inf stands for ∞ and
1/∞ is the exact Fraction 0.
"""

import logging
import math
from fractions import Fraction
from typing import NamedTuple, Optional

from angular_lab.config import get_settings
from angular_lab.errors import DomainError
from angular_lab.models.indices import INF, IndexTuple, Number, format_ext_real

settings = get_settings()
logger = logging.getLogger(__name__)


class Solved(NamedTuple):
    """Solver result; flagged when the value leaves the range its formula is meant for."""
    value: Number
    flagged: bool = False
    note: str = ""


class CknDeltas(NamedTuple):
    delta: Number
    delta_tilde: Optional[Number]
    residual: Optional[Number]  # Δ − (γ − aα − (1−a)β)


# ============ EXTENDED-REAL HELPERS ============

def is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def is_exact(*values) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def _num(x):
    return Fraction(x) if isinstance(x, int) else x


def recip(x: Number) -> Number:
    """1/x with 1/∞ = 0 exactly."""
    if is_inf(x):
        return Fraction(0)
    if x == 0:
        raise DomainError("reciprocal of zero")
    if isinstance(x, int):
        x = Fraction(x)
    return 1 / x


def from_recip(y: Number) -> Number:
    """Inverse of recip: a zero reciprocal means ∞."""
    if y == 0:
        return INF
    if isinstance(y, int):
        y = Fraction(y)
    return 1 / y


def show(x) -> str:
    if isinstance(x, float) and not math.isinf(x):
        return f"{x:.6g}"
    return format_ext_real(x)


def compare(lhs: Number, rhs: Number, relation: str, tolerance: Optional[float] = None) -> str:
    """
    Decide one relation. Exact on rationals; otherwise |lhs − rhs| ≤ tolerance
    counts as equality. Equality in a strict relation is "boundary".
    """
    tol = settings.tolerance if tolerance is None else tolerance
    if is_inf(lhs) and is_inf(rhs):
        equal = lhs == rhs
    elif is_exact(lhs, rhs):
        equal = lhs == rhs
    else:
        equal = abs(float(lhs) - float(rhs)) <= tol

    if relation == "=":
        return "satisfied" if equal else "violated"
    if equal:
        return "boundary" if relation in ("<", ">") else "satisfied"
    if relation in ("<", "≤"):
        return "satisfied" if lhs < rhs else "violated"
    if relation in (">", "≥"):
        return "satisfied" if lhs > rhs else "violated"
    raise ValueError(f"unknown relation {relation!r}")


def _check_lebesgue(name: str, p: Number):
    if p < 1:
        raise DomainError(f"{name} = {show(p)} lies outside [1, ∞]", field=name)


# ============ INDICES ============

def holder_conjugate(p: Number) -> Number:
    """p′ with 1/p + 1/p′ = 1."""
    _check_lebesgue("p", p)
    return from_recip(1 - recip(p))


def lambda_index(alpha: Number, p: Number, p_tilde: Number, n: int) -> Number:
    """Λ(α, p, p̃) = α + (n−1)/p − (n−1)/p̃."""
    return alpha + (n - 1) * recip(p) - (n - 1) * recip(p_tilde)


def omega_index(alpha: Number, p: Number, s: Number, n: int) -> Number:
    """Ω(α, p, s) = α + n/p + 2/s."""
    return alpha + n * recip(p) + 2 * recip(s)


def ptilde_local(alpha: Number, p: Number, n: int) -> Number:
    """
    Angular threshold for regularity on the time axis:
    2(n−1)p / ((2α+1)p + 2(n−1)) for α < 0, 2(n−1)p / (p + 2(n−1)) for α ≥ 0.
    """
    if not (Fraction(-1, 2) <= alpha < 1):
        raise DomainError(f"p̃_L is defined for α ∈ [−1/2, 1), got α = {show(alpha)}", field="alpha")
    _check_lebesgue("p", p)
    slope = 2 * _num(alpha) + 1 if alpha < 0 else Fraction(1)
    return from_recip(slope / (2 * (n - 1)) + recip(p))


def global_reciprocal(alpha: Number, p: Number, n: int) -> Number:
    """(αp + n − 1) / ((n−1)p), the reciprocal of (n−1)p/(αp + n − 1)."""
    return _num(alpha) / (n - 1) + recip(p)


def ptilde_global(alpha: Number, p: Number, n: int) -> Number:
    """
    Angular threshold for global regularity: max(4, (n−1)p/(αp+n−1)) for α < 0,
    (n−1)p/(αp+n−1) for 0 ≤ α ≤ 1/2. A vanishing αp + n − 1 gives ∞.
    """
    if not (Fraction(1 - n, 2) <= alpha <= Fraction(1, 2)):
        raise DomainError(f"p̃_G is defined for α ∈ [(1−n)/2, 1/2], got α = {show(alpha)}",
                          field="alpha")
    _check_lebesgue("p", p)
    y = global_reciprocal(alpha, p, n)
    if y < 0:
        raise DomainError(f"αp + n − 1 < 0 at α = {show(alpha)}, p = {show(p)}", field="p")
    if y == 0:
        logger.warning(f"p̃_G degenerate: αp + n − 1 = 0 at α={show(alpha)}, p={show(p)}")
        return INF
    value = from_recip(y)
    if alpha < 0:
        return max(Fraction(4), value)
    return value


def ptilde_global_degenerate(alpha: Number, p: Number, n: int) -> bool:
    """True when αp + n − 1 = 0 and p̃_G is the boundary value ∞."""
    return global_reciprocal(alpha, p, n) == 0


# ============ CKN ============

def ckn_deltas(t: IndexTuple) -> CknDeltas:
    """Δ = aσ + n(1/r − (1−a)/q − a/p) and its tilded twin."""
    n, a, sigma, r, q, p = t.require("n", "a", "sigma", "r", "q", "p")
    delta = a * sigma + n * (recip(r) - (1 - a) * recip(q) - a * recip(p))

    delta_tilde = None
    if None not in (t.r_tilde, t.q_tilde, t.p_tilde):
        delta_tilde = a * sigma + n * (recip(t.r_tilde) - (1 - a) * recip(t.q_tilde)
                                       - a * recip(t.p_tilde))

    residual = None
    if None not in (t.gamma, t.alpha, t.beta):
        residual = delta - (t.gamma - a * t.alpha - (1 - a) * t.beta)
    return CknDeltas(delta, delta_tilde, residual)


def ckn_scaling_gamma(t: IndexTuple) -> Number:
    """γ forced by the Δ identity: γ = Δ + aα + (1−a)β."""
    a, alpha, beta = t.require("a", "alpha", "beta")
    return ckn_deltas(t).delta + a * alpha + (1 - a) * beta


# ============ SCALING SOLVERS ============

def sw_scaling_gamma(alpha: Number, beta: Number, p: Number, q: Number, n: int) -> Solved:
    """γ = n + n/q − n/p − α − β; flagged when γ ∉ (0, n)."""
    gamma = n + n * recip(q) - n * recip(p) - alpha - beta
    if not (0 < gamma < n):
        return Solved(gamma, True, f"γ = {show(gamma)} lies outside (0, {n})")
    return Solved(gamma)


def sw_scaling_residual(t: IndexTuple) -> Number:
    """α + β + γ − (n + n/q − n/p); zero on the Stein–Weiss scaling line."""
    n, p, q, alpha, beta, gamma = t.require("n", "p", "q", "alpha", "beta", "gamma")
    return alpha + beta + gamma - (n + n * recip(q) - n * recip(p))


def kato_alpha(p: Number, n: int) -> Number:
    """Critical weight α = 1 − n/p of the small-data theorem."""
    _check_lebesgue("p", p)
    return 1 - n * recip(p)


def yz_time_exponent(alpha: Number, p: Number, n: int) -> Number:
    """s solving 2/s + n/p = 1 − α; ∞ when the right side is zero."""
    two_over_s = 1 - alpha - n * recip(p)
    if two_over_s < 0:
        raise DomainError(f"2/s = {show(two_over_s)} < 0: no time exponent for α={show(alpha)}, "
                          f"p={show(p)}", field="s")
    return from_recip(two_over_s / 2)


def yz_scaling_residual(alpha: Number, p: Number, s: Number, n: int) -> Number:
    """2/s + n/p − (1 − α)."""
    return 2 * recip(s) + n * recip(p) - (1 - alpha)
