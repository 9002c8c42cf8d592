"""
Hypothesis-system deciders.

Every checker renders its theorem's conditions as a list of Constraint records
(in the order the theorem states them) and folds them into a Verdict. Strict
constraints met with equality are "boundary", never silently pass or fail,
unless equality is a known counterexample (the kernel tail conditions of the
nonhomogeneous potentials), where it is "violated".

Endpoint convention: the weight conditions β < n/q (β > −n/q for the decay
estimates) and α < n/p′ are taken non-strict when q = ∞ (resp. p = 1), where
they only ask the weight to be locally bounded.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Optional

from angular_lab.config import get_settings
from angular_lab.errors import ConfigurationError, DomainError, ScalingError
from angular_lab.models.indices import INF, IndexTuple, Number
from angular_lab.models.verdicts import (
    Constraint, DecayVerdict, RegularityClass, ScanAxis, ScanResult, Verdict,
)
from angular_lab.services.index_core import (
    ckn_deltas, compare, holder_conjugate, is_inf, kato_alpha, lambda_index, omega_index,
    ptilde_global, ptilde_local, recip, show, yz_scaling_residual,
)

settings = get_settings()
logger = logging.getLogger(__name__)

STRICT_NOTE = "relaxation via strict inequality applies: 1 ≤ p ≤ q ≤ ∞"
ANNULUS_NOTE = "Fourier support in an annulus: 1 ≤ p ≤ q ≤ ∞ with an R-independent constant"


class ConstraintList:
    """Collects constraints in definition order."""

    def __init__(self):
        self.items: list[Constraint] = []

    def add(self, cid: str, description: str, relation: str, lhs: Number, rhs: Number,
            on_equality: str = "boundary") -> Constraint:
        status = compare(lhs, rhs, relation)
        if status == "boundary":
            status = on_equality
        c = Constraint(id=cid, description=description, relation=relation,
                       lhs=lhs, rhs=rhs, status=status)
        self.items.append(c)
        return c

    def holds_strictly(self, lhs: Number, rhs: Number, relation: str) -> bool:
        """Whether a non-strict relation holds with room to spare."""
        strict = {"≥": ">", "≤": "<"}[relation]
        return compare(lhs, rhs, strict) == "satisfied"


# ============ SHARED CONDITION BLOCKS ============

def _output_weight(cl: ConstraintList, beta: Number, q: Number, n: int, sign: int = 1):
    """β < n/q (sign=+1, Riesz-type) or β > −n/q (sign=−1, decay-type); non-strict at q = ∞."""
    bound = sign * n * recip(q)
    if sign > 0:
        rel = "≤" if is_inf(q) else "<"
        cl.add("beta_upper", f"β {rel} n/q", rel, beta, bound)
    else:
        rel = "≥" if is_inf(q) else ">"
        cl.add("beta_lower", f"β {rel} −n/q", rel, beta, bound)


def _input_weight(cl: ConstraintList, alpha: Number, p: Number, n: int):
    """α < n/p′; non-strict at p = 1."""
    bound = n * recip(holder_conjugate(p))
    rel = "≤" if p == 1 else "<"
    cl.add("alpha_upper", f"α {rel} n/p′", rel, alpha, bound)


def _lebesgue_range(cl: ConstraintList, p: Number, q: Number, relaxed: bool, factor: int = 1,
                    names: tuple[str, str] = ("p", "q")):
    """1 < p ≤ q < ∞ (factor 2 gives p ≤ 2q), or 1 ≤ p ≤ factor·q ≤ ∞ when relaxed."""
    pn, qn = names
    qlabel = f"{factor}{qn}" if factor != 1 else qn
    if relaxed:
        cl.add(f"{pn}_lower", f"{pn} ≥ 1", "≥", p, 1)
        cl.add(f"{pn}_le_{qn}", f"{pn} ≤ {qlabel}", "≤", p, factor * q)
        return
    cl.add(f"{pn}_lower", f"{pn} > 1", ">", p, 1)
    cl.add(f"{pn}_le_{qn}", f"{pn} ≤ {qlabel}", "≤", p, factor * q)
    cl.add(f"{qn}_finite", f"{qlabel} < ∞", "<", factor * q, INF)


def _angular_range(cl: ConstraintList, p_tilde: Number, q_tilde: Number):
    cl.add("ptilde_le_qtilde", "p̃ ≤ q̃", "≤", p_tilde, q_tilde)


def _mixed_gap(n: int, p, q, p_tilde, q_tilde) -> Number:
    """(n−1)(1/q − 1/p + 1/p̃ − 1/q̃)."""
    return (n - 1) * (recip(q) - recip(p) + recip(p_tilde) - recip(q_tilde))


# ============ STEIN–WEISS ============

def check_stein_weiss(t: IndexTuple, variant: str = "mixed", mode: str = "general") -> Verdict:
    """
    Weighted Riesz-potential bound ‖|x|^{−β}T_γφ‖_{L^q L^q̃} ≲ ‖|x|^α φ‖_{L^p L^p̃}.

    variant: classical (α+β ≥ 0), radial (α+β ≥ (n−1)(1/q−1/p)) or mixed
    (α+β ≥ (n−1)(1/q−1/p+1/p̃−1/q̃)). For mixed, mode "strict" asks the last
    condition strictly and "annulus" assumes annular Fourier support; both
    relax the range to 1 ≤ p ≤ q ≤ ∞.
    """
    if variant not in ("classical", "radial", "mixed"):
        raise ConfigurationError(f"unknown Stein–Weiss variant '{variant}'")
    if mode not in ("general", "strict", "annulus"):
        raise ConfigurationError(f"unknown Stein–Weiss mode '{mode}'")
    if mode != "general" and variant != "mixed":
        raise ConfigurationError(f"mode '{mode}' applies to the mixed variant only")

    n, p, q, alpha, beta, gamma = t.require("n", "p", "q", "alpha", "beta", "gamma")
    cl = ConstraintList()
    notes = []
    relaxed = mode in ("strict", "annulus")
    _lebesgue_range(cl, p, q, relaxed=relaxed)
    if variant == "mixed":
        p_tilde, q_tilde = t.require("p_tilde", "q_tilde")
        _angular_range(cl, p_tilde, q_tilde)

    _output_weight(cl, beta, q, n)
    _input_weight(cl, alpha, p, n)
    cl.add("gamma_positive", "γ > 0", ">", gamma, 0)
    cl.add("gamma_below_n", "γ < n", "<", gamma, n)
    cl.add("scaling", "α + β + γ = n + n/q − n/p", "=",
           alpha + beta + gamma, n + n * recip(q) - n * recip(p))

    if variant == "classical":
        cl.add("weight_sum", "α + β ≥ 0", "≥", alpha + beta, 0)
    elif variant == "radial":
        cl.add("weight_sum", "α + β ≥ (n−1)(1/q − 1/p)", "≥",
               alpha + beta, (n - 1) * (recip(q) - recip(p)))
    else:
        rel = ">" if mode == "strict" else "≥"
        cl.add("weight_sum", f"α + β {rel} (n−1)(1/q − 1/p + 1/p̃ − 1/q̃)", rel,
               alpha + beta, _mixed_gap(n, p, q, p_tilde, q_tilde))

    if mode == "strict":
        notes.append(STRICT_NOTE)
    elif mode == "annulus":
        notes.append(ANNULUS_NOTE)
    theorem = {"classical": "classical-sw", "radial": "radial-sw", "mixed": "mixed-sw"}[variant]
    if mode != "general":
        theorem = f"{theorem}-{mode}"
    return Verdict.from_constraints(theorem, cl.items, notes)


def check_nonhomogeneous(t: IndexTuple) -> Verdict:
    """
    Smooth-kernel potentials: S_γ = ⟨·⟩^{−γ} * (γ-form) or ⟨·⟩^{−μ} * (μ-form,
    unweighted input). Range 1 ≤ p ≤ q ≤ ∞ throughout.

    kernel_decay at equality fails: for p = q the kernel must be integrable,
    and ⟨x⟩^{−n} is not, so S_n is unbounded on L².
    """
    if t.gamma is None and t.mu is None:
        raise ConfigurationError("nonhomogeneous check needs gamma or mu", field="gamma")
    n, p, q, p_tilde, q_tilde, alpha, beta = t.require(
        "n", "p", "q", "p_tilde", "q_tilde", "alpha", "beta")
    cl = ConstraintList()
    _lebesgue_range(cl, p, q, relaxed=True)
    _angular_range(cl, p_tilde, q_tilde)
    _output_weight(cl, beta, q, n)
    _input_weight(cl, alpha, p, n)
    cl.add("weight_sum", "α + β ≥ (n−1)(1/q − 1/p + 1/p̃ − 1/q̃)", "≥",
           alpha + beta, _mixed_gap(n, p, q, p_tilde, q_tilde))

    scale = n * (1 + recip(q) - recip(p))
    if t.gamma is not None:
        cl.add("kernel_decay", "α + β + γ > n(1 + 1/q − 1/p)", ">", alpha + beta + t.gamma, scale,
               on_equality="violated")
        theorem = "nonhomogeneous"
    else:
        cl.add("kernel_decay", "μ > −α − β + n(1 + 1/q − 1/p)", ">", t.mu, -alpha - beta + scale,
               on_equality="violated")
        theorem = "nonhomogeneous-mu"
    return Verdict.from_constraints(theorem, cl.items)


# ============ SOBOLEV ============

def check_sobolev_embedding(t: IndexTuple, mode: str = "weighted") -> Verdict:
    """
    Sobolev-type consequences of the Stein–Weiss bound.

    weighted:  ‖|x|^{−β}u‖_{L^q L^q̃} ≲ ‖|x|^α |D|^σ u‖_{L^p L^p̃}
    pointwise: |x|^{−β}|u(x)| ≲ ‖|x|^α |D|^σ u‖_{L^p L^p̃}
    strauss:   |x|^{n/p−σ}|u(x)| ≲ ‖|D|^σ u‖_{L^p L^p̃}, (n−1)/p̃ + 1/p < σ < n/p
    """
    if mode == "weighted":
        return _sobolev_weighted(t)
    if mode == "pointwise":
        return _sobolev_pointwise(t)
    if mode == "strauss":
        return _strauss_window(t)
    raise ConfigurationError(f"unknown Sobolev mode '{mode}'")


def _sobolev_weighted(t: IndexTuple) -> Verdict:
    n, p, q, p_tilde, q_tilde, alpha, beta, sigma = t.require(
        "n", "p", "q", "p_tilde", "q_tilde", "alpha", "beta", "sigma")
    gap = _mixed_gap(n, p, q, p_tilde, q_tilde)
    cl = ConstraintList()
    relaxed = cl.holds_strictly(alpha + beta, gap, "≥")
    notes = [STRICT_NOTE] if relaxed else []
    _lebesgue_range(cl, p, q, relaxed=relaxed)
    _angular_range(cl, p_tilde, q_tilde)
    _output_weight(cl, beta, q, n)
    _input_weight(cl, alpha, p, n)
    cl.add("sigma_positive", "σ > 0", ">", sigma, 0)
    cl.add("sigma_below_n", "σ < n", "<", sigma, n)
    cl.add("scaling", "α + β = σ + n/q − n/p", "=", alpha + beta, sigma + n * recip(q) - n * recip(p))
    cl.add("weight_sum", "α + β ≥ (n−1)(1/q − 1/p + 1/p̃ − 1/q̃)", "≥", alpha + beta, gap)
    return Verdict.from_constraints("sobolev", cl.items, notes)


def _sobolev_pointwise(t: IndexTuple) -> Verdict:
    n, p, p_tilde, alpha, beta, sigma = t.require("n", "p", "p_tilde", "alpha", "beta", "sigma")
    cl = ConstraintList()
    cl.add("p_lower", "p ≥ 1", "≥", p, 1)
    cl.add("beta_negative", "β < 0", "<", beta, 0)
    _input_weight(cl, alpha, p, n)
    cl.add("sigma_positive", "σ > 0", ">", sigma, 0)
    cl.add("sigma_below_n", "σ < n", "<", sigma, n)
    cl.add("scaling", "α + β = σ − n/p", "=", alpha + beta, sigma - n * recip(p))
    cl.add("weight_sum", "α + β > (n−1)(1/p̃ − 1/p)", ">",
           alpha + beta, (n - 1) * (recip(p_tilde) - recip(p)))
    return Verdict.from_constraints("sobolev-pointwise", cl.items)


def _strauss_window(t: IndexTuple) -> Verdict:
    n, p, p_tilde, sigma = t.require("n", "p", "p_tilde", "sigma")
    cl = ConstraintList()
    cl.add("p_lower", "p > 1", ">", p, 1)
    cl.add("p_finite", "p < ∞", "<", p, INF)
    lower = (n - 1) * recip(p_tilde) + recip(p)
    upper = n * recip(p)
    cl.add("window_lower", "σ > (n−1)/p̃ + 1/p", ">", sigma, lower)
    cl.add("window_upper", "σ < n/p", "<", sigma, upper)
    notes = [f"window ({show(lower)}, {show(upper)}); weight exponent n/p − σ = {show(upper - sigma)}"]
    if lower >= upper:
        notes.append("empty window")
    return Verdict.from_constraints("strauss", cl.items, notes)


# ============ CAFFARELLI–KOHN–NIRENBERG ============

def check_ckn(t: IndexTuple, mode: str = "fractional") -> Verdict:
    """
    ‖|x|^{−γ}u‖_{L^r L^r̃} ≲ ‖|x|^{−α}|D|^σ u‖^a_{L^p L^p̃} ‖|x|^{−β}u‖^{1−a}_{L^q L^q̃}.

    Scaling is enforced through Δ = γ − aα − (1−a)β. When Δ + (n−1)Δ̃ ≥ 0 holds
    strictly, the band conditions on Δ and Δ̃ are taken non-strict.
    integer_sigma drops α > n/p − n and asks σ ∈ {1, …, n−1}.
    """
    if mode not in ("fractional", "integer_sigma"):
        raise ConfigurationError(f"unknown CKN mode '{mode}'")
    n, a, sigma, alpha, beta, gamma = t.require("n", "a", "sigma", "alpha", "beta", "gamma")
    p, q, r, p_tilde, q_tilde, r_tilde = t.require("p", "q", "r", "p_tilde", "q_tilde", "r_tilde")
    delta, delta_tilde, _ = ckn_deltas(t)

    cl = ConstraintList()
    notes = []
    for name, value in (("r", r), ("r_tilde", r_tilde), ("p", p),
                        ("p_tilde", p_tilde), ("q", q), ("q_tilde", q_tilde)):
        cl.add(f"{name}_finite", f"{name} < ∞", "<", value, INF)
    cl.add("a_range", "0 < a ≤ 1", "≤", a, 1)
    cl.add("sigma_positive", "σ > 0", ">", sigma, 0)
    cl.add("sigma_below_n", "σ < n", "<", sigma, n)
    if mode == "integer_sigma":
        cl.add("sigma_integer", "σ ∈ {1, …, n−1}", "=", sigma, _nearest_integer(sigma, n))

    cl.add("gamma_upper", "γ < n/r", "<", gamma, n * recip(r))
    cl.add("beta_upper", "β < n/q", "<", beta, n * recip(q))
    if mode == "fractional":
        cl.add("alpha_lower", "α > n/p − n", ">", alpha, n * recip(p) - n)
    else:
        notes.append("integer σ: the lower bound α > n/p − n is not required")
    cl.add("alpha_upper", "α < n/p − σ", "<", alpha, n * recip(p) - sigma)

    # The printed scaling line has n/r where the Δ identity needs n/p; the identity is used.
    cl.add("scaling", "Δ = γ − aα − (1−a)β", "=", delta, gamma - a * alpha - (1 - a) * beta)

    balance = delta + (n - 1) * delta_tilde
    cl.add("delta_balance", "Δ + (n−1)Δ̃ ≥ 0", "≥", balance, 0)
    relaxed = cl.holds_strictly(balance, 0, "≥")
    if relaxed:
        notes.append("Δ + (n−1)Δ̃ > 0: band conditions relaxed to non-strict")

    cl.add("p_above_one", "p > 1", ">", p, 1)
    rel_low = "≤" if relaxed else "<"
    cl.add("delta_lower", f"a(σ − n/p) {rel_low} Δ", "≥" if relaxed else ">",
           delta, a * (sigma - n * recip(p)))
    cl.add("delta_upper", "Δ ≤ aσ", "≤", delta, a * sigma)
    cl.add("delta_tilde_lower", "a(σ − n/p̃) ≤ Δ̃", "≥", delta_tilde, a * (sigma - n * recip(p_tilde)))
    cl.add("delta_tilde_upper", "Δ̃ ≤ aσ", "≤", delta_tilde, a * sigma)

    tight = [c.id for c in cl.items if c.relation in ("≤", "≥") and c.lhs == c.rhs]
    if tight:
        notes.append(f"tight: {', '.join(tight)}")
    notes.append(f"Δ = {show(delta)}, Δ̃ = {show(delta_tilde)}")
    theorem = "ckn" if mode == "fractional" else "ckn-integer"
    return Verdict.from_constraints(theorem, cl.items, notes)


def _nearest_integer(sigma: Number, n: int) -> Number:
    """sigma itself when it is one of 1..n−1, else the nearest admissible integer."""
    k = min(max(round(sigma), 1), n - 1)
    return Fraction(k)


# ============ DECAY ESTIMATES ============

DECAY_KINDS = ("pointwise_heat", "pointwise_oseen", "local_parabola", "time_integrated", "duhamel")


def check_decay_estimate(t: IndexTuple, kind: str = "pointwise_heat") -> DecayVerdict:
    """
    Weighted decay of e^{tΔ} (heat), e^{tΔ}P∇· (Oseen), their Π(R)-localized
    versions, the L^r_t integrated bound and the Duhamel bound. Output weight
    |x|^β on (q, q̃), input weight |x|^α on (p, p̃).

    predicted_exponent is the time-decay rate (|η| + n/p − n/q + α − β)/2,
    plus 1/2 for Oseen; for time_integrated it equals 1/r on the scaling line.
    """
    if kind not in DECAY_KINDS:
        raise ConfigurationError(f"unknown decay kind '{kind}'")
    n, p, q, p_tilde, q_tilde, alpha, beta = t.require(
        "n", "p", "q", "p_tilde", "q_tilde", "alpha", "beta")
    eta = t.eta or 0
    lam_a = lambda_index(alpha, p, p_tilde, n)
    lam_b = lambda_index(beta, q, q_tilde, n)
    rate = eta + n * recip(p) - n * recip(q) + alpha - beta

    if kind == "duhamel":
        return _duhamel(t, n, p, q, p_tilde, q_tilde, alpha, beta, eta, lam_a, lam_b, rate)

    cl = ConstraintList()
    notes = []
    extra = {}
    if kind in ("pointwise_heat", "pointwise_oseen"):
        relaxed = cl.holds_strictly(lam_a, lam_b, "≥")
        if relaxed:
            notes.append("Λ_α > Λ_β: range relaxed to 1 ≤ p ≤ q ≤ ∞")
        _lebesgue_range(cl, p, q, relaxed=relaxed)
    elif kind == "local_parabola":
        _lebesgue_range(cl, p, q, relaxed=False)
    else:
        cl.add("p_lower", "p > 1", ">", p, 1)
        cl.add("p_le_q", "p ≤ q", "≤", p, q)
        denom = (eta + alpha - beta) * p + n - 2
        upper = n * p / denom if denom > 0 else INF
        cl.add("q_upper", "q < np/((|η| + α − β)p + n − 2)", "<", q, upper)
    _angular_range(cl, p_tilde, q_tilde)
    _output_weight(cl, beta, q, n, sign=-1)
    _input_weight(cl, alpha, p, n)

    if kind == "pointwise_oseen":
        rate = rate + 1
        cl.add("lambda_order", "Λ(α,p,p̃) ≥ Λ(β,q,q̃)", "≥", lam_a, lam_b)
        cl.add("rate_sign", "1 + |η| + n/p − n/q + α − β > 0", ">", rate, 0)
    elif kind == "pointwise_heat":
        cl.add("lambda_order", "Λ(α,p,p̃) ≥ Λ(β,q,q̃)", "≥", lam_a, lam_b)
        cl.add("rate_sign", "|η| + n/p − n/q + α − β ≥ 0", "≥", rate, 0)
    elif kind == "local_parabola":
        gap = lam_a - lam_b
        cl.add("lambda_order", "Λ(α,p,p̃) < Λ(β,q,q̃)", "<", lam_a, lam_b)
        cl.add("rate_sign", "|η| + n/p − n/q + α − β ≥ 0", "≥", rate, 0)
        extra = {"lambda_gap": gap, "amplification_exponent": -gap}
        notes.append(f"Π(R) constant grows like R^{show(-gap)}")
    else:
        r = t.require("r")[0]
        cl.add("r_lower", "r > 1", ">", r, 1)
        cl.add("r_finite", "r < ∞", "<", r, INF)
        cl.add("scaling", "|η| + Ω(α,p,∞) = Ω(β,q,r)", "=",
               eta + omega_index(alpha, p, INF, n), omega_index(beta, q, r, n))
        if lam_a >= lam_b:
            cl.add("lambda_order", "Λ(α,p,p̃) ≥ Λ(β,q,q̃)", "≥", lam_a, lam_b)
        else:
            gap = lam_a - lam_b
            extra = {"lambda_gap": gap, "amplification_exponent": -gap}
            notes.append(f"localized to Π(R): constant grows like R^{show(-gap)}")

    return DecayVerdict.from_constraints(f"decay-{kind}", cl.items, notes, kind=kind,
                                         predicted_exponent=rate / 2, **extra)


def _duhamel(t, n, p, q, p_tilde, q_tilde, alpha, beta, eta, lam_a, lam_b, rate) -> DecayVerdict:
    """Bilinear Duhamel bound: input (α, p, p̃, s), output (β, q, q̃, r)."""
    s, r = t.require("s", "r")
    cl = ConstraintList()
    relaxed = cl.holds_strictly(2 * lam_a, lam_b, "≥")
    notes = ["2Λ_α > Λ_β: range relaxed to 1 ≤ p ≤ 2q ≤ ∞"] if relaxed else []
    _lebesgue_range(cl, p, q, relaxed=relaxed, factor=2)
    _lebesgue_range(cl, s, r, relaxed=relaxed, factor=2, names=("s", "r"))
    _output_weight(cl, beta, q, n, sign=-1)
    _input_weight(cl, alpha, p, n)
    cl.add("lambda_order", "2Λ(α,p,p̃) ≥ Λ(β,q,q̃)", "≥", 2 * lam_a, lam_b)
    cl.add("scaling", "2Ω(α,p,s) = Ω(β,q,r) + 1 − |η|", "=",
           2 * omega_index(alpha, p, s, n), omega_index(beta, q, r, n) + 1 - eta)
    return DecayVerdict.from_constraints("decay-duhamel", cl.items, notes, kind="duhamel",
                                         predicted_exponent=(rate + 1) / 2)


# ============ SMALL DATA ============

def check_weighted_kato(t: IndexTuple) -> Verdict:
    """
    Small-data global existence in |x|^α L^p L^p̃ with α = 1 − n/p; the monitored
    bound ‖|x|^β u‖_{L^q L^q̃} < 2c₀ε is checked when β, q, q̃, r are present.
    """
    n, p, p_tilde, alpha = t.require("n", "p", "p_tilde", "alpha")
    cl = ConstraintList()
    cl.add("dimension", "n ≥ 3", "≥", n, 3)
    cl.add("p_lower", "p ≥ 2", "≥", p, 2)
    cl.add("p_upper", "p ≤ 2 + n", "≤", p, 2 + n)
    cl.add("critical_weight", "α = 1 − n/p", "=", alpha, kato_alpha(p, n))
    cl.add("angular", "p̃ ≥ (n−1)p/(p−1)", "≥", p_tilde, (n - 1) * p / (p - 1) if p > 1 else INF)

    notes = []
    if None not in (t.beta, t.q, t.q_tilde, t.r):
        beta, q, q_tilde, r = t.beta, t.q, t.q_tilde, t.r
        cl.add("q_lower", "q ≥ p", "≥", q, p)
        denom = (alpha - beta) * p + n - 2
        cl.add("q_upper", "q < np/((α − β)p + n − 2)", "<", q, n * p / denom if denom > 0 else INF)
        _angular_range(cl, p_tilde, q_tilde)
        cl.add("r_lower", "r > 1", ">", r, 1)
        cl.add("r_finite", "r < ∞", "<", r, INF)
        cl.add("lambda_order", "Λ(α,p,p̃) > Λ(β,q,q̃)", ">",
               lambda_index(alpha, p, p_tilde, n), lambda_index(beta, q, q_tilde, n))
        # L^r_t L^q scaling of the monitored norm
        cl.add("monitor_scaling", "2/r + n/q = 1 − β", "=", 2 * recip(r) + n * recip(q), 1 - beta)
    else:
        notes.append("no monitor (β, q, q̃, r): existence hypotheses only")
    return Verdict.from_constraints("kato", cl.items, notes)


# ============ REGULARITY CRITERIA ============

def check_regularity_criterion(t: IndexTuple, scope: str = "global") -> Verdict:
    """
    Full hypothesis systems of the weighted regularity criteria for Leray
    solutions: space-time bound |x|^α u ∈ L^s_T L^p L^p̃ plus datum conditions
    on (α₀, p₀, p̃₀). Each case of the datum brackets is its own constraint.
    """
    if scope not in ("global", "local"):
        raise ConfigurationError(f"unknown regularity scope '{scope}'")
    n, alpha, p, p_tilde, s = t.require("n", "alpha", "p", "p_tilde", "s")
    alpha0, p0, p0_tilde = t.require("alpha0", "p0", "p0_tilde")
    cl = ConstraintList()
    cl.add("dimension", "n ≥ 3", "≥", n, 3)

    if scope == "global":
        _global_criterion(cl, n, alpha, p, p_tilde, alpha0, p0, p0_tilde)
    else:
        _local_criterion(cl, n, alpha, p, p_tilde, alpha0, p0, p0_tilde)

    cl.add("datum_scaling", "α₀ = 1 − n/p₀", "=", alpha0, 1 - n * recip(p0))
    cl.add("time_scaling", "2/s + n/p = 1 − α", "=", 2 * recip(s) + n * recip(p), 1 - alpha)
    cl.add("s_lower", "s > 2/(1 − α)", ">", s, 2 / (1 - alpha) if alpha != 1 else INF)
    cl.add("s_finite", "s < ∞", "<", s, INF)
    return Verdict.from_constraints(f"yz-{scope}", cl.items)


def _threshold(fn, alpha, p, n) -> Number:
    """Threshold value, or ∞ outside its range (the range constraints already fail there)."""
    try:
        return fn(alpha, p, n)
    except DomainError:
        return INF


def _global_criterion(cl, n, alpha, p, p_tilde, alpha0, p0, p0_tilde):
    if alpha < 0:
        cl.add("alpha_lower", "α ≥ (1−n)/2", "≥", alpha, Fraction(1 - n, 2))
        cl.add("p_lower", "p > n/(1 − α)", ">", p, n / (1 - alpha))
        cl.add("p_upper", "p ≤ (1−n)/α", "≤", p, (1 - n) / alpha)
    else:
        cl.add("alpha_upper", "α ≤ 1/2", "≤", alpha, Fraction(1, 2))
        if p == 4:
            cl.add("p_endpoint", "p = 4", "=", p, 4)
        else:
            cl.add("p_lower", "p > max(4, n/(1 − α))", ">", p, max(Fraction(4), n / (1 - alpha)))
            cl.add("p_finite", "p < ∞", "<", p, INF)
    cl.add("alpha0_lower", "α₀ ≥ (2−n)/2", "≥", alpha0, Fraction(2 - n, 2))
    cl.add("alpha0_upper", "α₀ < 2/(2+n)", "<", alpha0, Fraction(2, 2 + n))

    pg = _threshold(ptilde_global, alpha, p, n)
    # datum ceiling: p̃_G for α < 0, p for α ≥ 0
    ceiling, label = (pg, "p̃_G") if alpha < 0 else (p, "p")
    cl.add("datum_angular", f"p̃₀ ≤ {label}/2", "≤", p0_tilde, ceiling / 2)
    cl.add("datum_p0_lower", "p₀ ≥ 2", "≥", p0, 2)
    cl.add("datum_p0_upper", f"p₀ ≤ {label}/2", "≤", p0, ceiling / 2)
    if ceiling > 2 * n:
        cl.add("datum_p0_branch_large", f"p₀ < 2{label}/({label} − 2n)  [{label} > 2n]", "<",
               p0, 2 * ceiling / (ceiling - 2 * n) if not is_inf(ceiling) else 2)
    cl.add("angular", "p̃ ≥ p̃_G", "≥", p_tilde, pg)


def _local_criterion(cl, n, alpha, p, p_tilde, alpha0, p0, p0_tilde):
    cl.add("alpha_lower", "α ≥ −1/2", "≥", alpha, Fraction(-1, 2))
    cl.add("alpha_upper", "α < 1", "<", alpha, 1)
    if p == 2:
        cl.add("p_endpoint", "p = 2", "=", p, 2)
    else:
        cl.add("p_lower", "p > max(2, n/(1 − α))", ">", p,
               max(Fraction(2), n / (1 - alpha)) if alpha != 1 else INF)
        cl.add("p_finite", "p < ∞", "<", p, INF)

    if alpha < 0:
        cl.add("alpha0_lower", "α₀ ≥ 1 − n", "≥", alpha0, 1 - n)
        cl.add("alpha0_upper", "α₀ < (2−n)/(2+n)", "<", alpha0, Fraction(2 - n, 2 + n))
    else:
        cl.add("alpha0_lower", "α₀ ≥ 1 − (1−α)n", "≥", alpha0, 1 - (1 - alpha) * n)
        cl.add("alpha0_upper", "α₀ < 1 − (1−α)·2n/(2+n)", "<",
               alpha0, 1 - (1 - alpha) * Fraction(2 * n, 2 + n))

    cl.add("datum_angular", "p̃₀ ≤ p/2", "≤", p0_tilde, p / 2)
    cl.add("datum_lambda", "Λ(α₀, p₀, p̃₀) ≥ 0", "≥", lambda_index(alpha0, p0, p0_tilde, n), 0)
    if alpha < 0:
        cl.add("datum_p0_lower", "p₀ ≥ 1", "≥", p0, 1)
        cl.add("datum_p0_upper", "p₀ ≤ p/2", "≤", p0, p / 2)
        if p > n:
            cl.add("datum_p0_branch_large", "p₀ < p/(p − n)  [p > n]", "<",
                   p0, p / (p - n) if not is_inf(p) else 1)
    else:
        cl.add("datum_p0_lower", "p₀ ≥ 1/(1 − α)", "≥", p0, 1 / (1 - alpha))
        cl.add("datum_p0_upper", "p₀ ≤ p/2", "≤", p0, p / 2)
        denom = (1 - alpha) * p - n
        cl.add("datum_p0_branch", "p₀ < p/((1−α)p − n)", "<", p0,
               p / denom if denom > 0 and not is_inf(p) else INF)
    cl.add("angular", "p̃ ≥ p̃_L", "≥", p_tilde, _threshold(ptilde_local, alpha, p, n))


def classify_regularity(alpha: Number, p: Number, p_tilde: Number, s: Number, n: int) -> RegularityClass:
    """
    Global if p̃ ≥ p̃_G, LocalOnly if p̃_L ≤ p̃ < p̃_G, Unknown otherwise.
    The space-time scaling 2/s + n/p = 1 − α must hold.
    """
    residual = yz_scaling_residual(alpha, p, s, n)
    if compare(residual, 0, "=") != "satisfied":
        raise ScalingError("2/s + n/p = 1 − α violated", float(residual))
    if not (Fraction(1 - n, 2) <= alpha < 1):
        raise DomainError(f"α = {show(alpha)} outside [(1−n)/2, 1)", field="alpha")

    pl = ptilde_local(alpha, p, n) if alpha >= Fraction(-1, 2) else None
    pg = ptilde_global(alpha, p, n) if alpha <= Fraction(1, 2) else None
    notes = []
    if pg is not None and p_tilde >= pg:
        return RegularityClass(value="Global", p_tilde_local=pl, p_tilde_global=pg,
                               boundary=compare(p_tilde, pg, "=") == "satisfied")
    if pl is not None and p_tilde >= pl:
        if pg is None:
            notes.append("α > 1/2: no global threshold")
        return RegularityClass(value="LocalOnly", p_tilde_local=pl, p_tilde_global=pg,
                               boundary=compare(p_tilde, pl, "=") == "satisfied", notes=notes)
    if pl is None:
        notes.append("α < −1/2: no local threshold")
    return RegularityClass(value="Unknown", p_tilde_local=pl, p_tilde_global=pg, notes=notes)


# ============ CHECKER REGISTRY ============

CHECKERS: dict[str, Callable[[IndexTuple], Verdict]] = {
    "classical-sw": lambda t: check_stein_weiss(t, "classical"),
    "radial-sw": lambda t: check_stein_weiss(t, "radial"),
    "mixed-sw": lambda t: check_stein_weiss(t, "mixed"),
    "mixed-sw-strict": lambda t: check_stein_weiss(t, "mixed", "strict"),
    "mixed-sw-annulus": lambda t: check_stein_weiss(t, "mixed", "annulus"),
    "nonhomogeneous": check_nonhomogeneous,
    "sobolev": lambda t: check_sobolev_embedding(t, "weighted"),
    "sobolev-pointwise": lambda t: check_sobolev_embedding(t, "pointwise"),
    "strauss": lambda t: check_sobolev_embedding(t, "strauss"),
    "ckn": lambda t: check_ckn(t, "fractional"),
    "ckn-integer": lambda t: check_ckn(t, "integer_sigma"),
    "decay-heat": lambda t: check_decay_estimate(t, "pointwise_heat"),
    "decay-oseen": lambda t: check_decay_estimate(t, "pointwise_oseen"),
    "decay-local": lambda t: check_decay_estimate(t, "local_parabola"),
    "decay-integrated": lambda t: check_decay_estimate(t, "time_integrated"),
    "decay-duhamel": lambda t: check_decay_estimate(t, "duhamel"),
    "kato": check_weighted_kato,
    "yz-global": lambda t: check_regularity_criterion(t, "global"),
    "yz-local": lambda t: check_regularity_criterion(t, "local"),
}


def get_checker(checker_id: str) -> Callable[[IndexTuple], Verdict]:
    try:
        return CHECKERS[checker_id]
    except KeyError:
        raise ConfigurationError(f"unknown checker '{checker_id}'; known: {', '.join(CHECKERS)}",
                                 field="checker")


def run_checker(checker_id: str, t: IndexTuple) -> Verdict:
    return get_checker(checker_id)(t)


# ============ REGION SCAN ============

def axis_values(axis: ScanAxis) -> list[Number]:
    """Evenly spaced values, exact when the endpoints are rational."""
    if axis.steps == 0:
        return [axis.start]
    if is_inf(axis.start) or is_inf(axis.stop):
        raise ConfigurationError(f"scan axis '{axis.field}' needs finite endpoints", field=axis.field)
    step = (axis.stop - axis.start) / axis.steps
    return [axis.start + k * step for k in range(axis.steps + 1)]


def scan_region(template: IndexTuple, axes: list[ScanAxis], checker: str,
                workers: Optional[int] = None) -> ScanResult:
    """
    Raster of verdicts over one or two axes, row-major (first axis slowest).
    Points whose tuple is invalid or leaves a domain are recorded as fail; a
    template lacking a field the checker needs is a ConfigurationError.
    """
    if not 1 <= len(axes) <= 2:
        raise ConfigurationError("scan_region takes one or two axes", field="axes")
    for axis in axes:
        if axis.field not in IndexTuple.model_fields:
            raise ConfigurationError(f"unknown scan field '{axis.field}'", field=axis.field)
    check = get_checker(checker)
    values = [axis_values(axis) for axis in axes]
    points = list(itertools.product(*values))

    def evaluate(point) -> str:
        try:
            t = template.updated(**{axis.field: v for axis, v in zip(axes, point)})
            return check(t).overall
        except ValueError as e:
            logger.debug(f"scan point {point} rejected: {e}")
            return "fail"

    with ThreadPoolExecutor(max_workers=workers or settings.threads) as pool:
        overall = list(pool.map(evaluate, points))

    logger.info(f"Scanned {checker} over {len(points)} points: "
                f"{overall.count('pass')} pass, {overall.count('boundary')} boundary")
    return ScanResult(checker=checker, template=template, axes=axes, axis_values=values,
                      shape=[len(v) for v in values], overall=overall)
