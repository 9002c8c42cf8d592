"""
Angular singular integrals

    I_ν(x)    = ∫_{S^{n−1}} |x − y|^{−ν} dS(y)
    J_ν(x, ρ) = ∫_{S^{n−1}} ⟨x − ρθ⟩^{−ν} dS(θ)

their n = 3 closed form and the constant-free regime envelopes. Both depend on
x only through r = |x|. Divergent values (r = 1, ν ≥ n − 1) come back as
math.inf; test them with is_divergent.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.integrate import quad

from angular_lab.config import get_settings
from angular_lab.errors import DomainError
from angular_lab.models.fields import SphereGrid
from angular_lab.models.reports import EnvelopeScan, Regime, RegimeEnvelope, SingintReport
from angular_lab.services.grids_norms import sphere_area

settings = get_settings()
logger = logging.getLogger(__name__)

QUAD_LIMIT = 200


def bracket(x):
    """Japanese bracket ⟨x⟩ = (1 + x²)^{1/2}."""
    return np.sqrt(1.0 + np.square(x))


def is_divergent(value: float) -> bool:
    return math.isinf(value)


def _check_nu(nu: float, n: int):
    if nu <= 0:
        raise DomainError(f"ν must be positive, got {nu}", field="nu")
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}", field="n")


def _graded_quad(fn, lo: float, hi: float, scale: float, tol: float) -> float:
    """Adaptive quadrature on panels [lo + scale·(2^k − 1)] refined toward lo."""
    edges = [lo]
    step = scale
    while lo + step < hi:
        edges.append(lo + step)
        step *= 2
    edges.append(hi)
    return math.fsum(quad(fn, a, b, epsabs=0.0, epsrel=tol, limit=QUAD_LIMIT)[0]
                     for a, b in zip(edges[:-1], edges[1:]))


# ============ I_ν ============

def eval_I(nu: float, r: float, n: int = 3, tol: Optional[float] = None) -> float:
    """
    I_ν at |x| = r. For n ≥ 3 the θ₁ integral is rewritten with σ = |x − y|,
    2σ dσ = 2r sin θ₁ dθ₁, giving

        I_ν = |S^{n−2}|/r ∫_{|r−1|}^{r+1} σ^{1−ν} sin^{n−3}θ₁(σ) dσ,

    with panels graded geometrically toward σ = |r − 1|. n = 2 integrates in θ₁.
    """
    _check_nu(nu, n)
    if r < 0:
        raise DomainError(f"r must be nonnegative, got {r}", field="r")
    tol = tol or settings.quad_tol
    if r == 0:
        return sphere_area(n)
    if r == 1 and nu >= n - 1:
        logger.debug(f"I_ν divergent at r=1, ν={nu}, n={n}")
        return math.inf
    ring = sphere_area(n - 1)

    if n == 2:
        def integrand(t):
            return (r * r + 1 - 2 * r * math.cos(t)) ** (-nu / 2)

        if r == 1:
            # (2 sin(θ/2))^{−ν} = θ^{−ν}·(2 sin(θ/2)/θ)^{−ν}
            value = quad(lambda t: (2 * math.sin(t / 2) / t) ** (-nu) if t > 0 else 1.0, 0.0, math.pi,
                         weight="alg", wvar=(-nu, 0.0), epsabs=0.0, epsrel=tol, limit=QUAD_LIMIT)[0]
        else:
            value = _graded_quad(integrand, 0.0, math.pi, abs(r - 1), tol)
        return ring * value

    lo, hi = abs(r - 1), r + 1

    def angular(sigma):
        if n == 3:
            return 1.0
        c = (r * r + 1 - sigma * sigma) / (2 * r)
        return max(0.0, 1 - c * c) ** ((n - 3) / 2)

    if r == 1:
        value = quad(angular, 0.0, hi, weight="alg", wvar=(1 - nu, 0.0),
                     epsabs=0.0, epsrel=tol, limit=QUAD_LIMIT)[0]
    else:
        value = _graded_quad(lambda s: s ** (1 - nu) * angular(s), lo, hi, lo, tol)
    return ring * value / r


def closed_form_I_n3(nu: float, r: float) -> float:
    """(2π/(r(2−ν)))((r+1)^{2−ν} − |r−1|^{2−ν}); (2π/r) log((r+1)/|r−1|) at ν = 2."""
    _check_nu(nu, 3)
    if r < 0:
        raise DomainError(f"r must be nonnegative, got {r}", field="r")
    if r == 0:
        return 4 * math.pi
    if r == 1 and nu >= 2:
        return math.inf
    if nu == 2:
        return 2 * math.pi / r * math.log((r + 1) / abs(r - 1))
    return 2 * math.pi / (r * (2 - nu)) * ((r + 1) ** (2 - nu) - abs(r - 1) ** (2 - nu))


def eval_I_on_sphere(nu: float, x: np.ndarray, sphere: SphereGrid) -> float:
    """Direct sphere-grid quadrature of I_ν(x) for a Cartesian point x; accurate away from |x| = 1."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sphere.n,):
        raise DomainError(f"point must have {sphere.n} coordinates", field="x")
    dist = np.linalg.norm(x[None, :] - sphere.points, axis=1)
    return float(np.sum(sphere.weights * dist ** (-nu)))


def envelope_I(nu: float, r: float, n: int = 3) -> RegimeEnvelope:
    """
    Regime and constant-free size of I_ν:
      r ≥ 2       far          ⟨r⟩^{−ν}
      r ≤ 1/2     near_origin  1
      1/2 < r < 2 shell_sub 1 (ν < n−1), shell_log |log|r−1|| + 1 (ν = n−1),
                  shell_super |r−1|^{n−1−ν} (ν > n−1)
    """
    _check_nu(nu, n)
    if r >= 2:
        return RegimeEnvelope(regime="far", value=float(bracket(r) ** (-nu)), formula_id="I_far")
    if r <= 0.5:
        return RegimeEnvelope(regime="near_origin", value=1.0, formula_id="I_near_origin")
    gap = abs(r - 1)
    if nu < n - 1:
        return RegimeEnvelope(regime="shell_sub", value=1.0, formula_id="I_shell_sub")
    if nu == n - 1:
        value = math.inf if gap == 0 else abs(math.log(gap)) + 1
        return RegimeEnvelope(regime="shell_log", value=value, formula_id="I_shell_log")
    value = math.inf if gap == 0 else gap ** (n - 1 - nu)
    return RegimeEnvelope(regime="shell_super", value=value, formula_id="I_shell_super")


# ============ J_ν ============

def eval_J(nu: float, r: float, rho: float, n: int = 3, tol: Optional[float] = None) -> float:
    """J_ν at |x| = r; the kernel is bounded by 1 so the value never diverges."""
    _check_nu(nu, n)
    if r < 0 or rho < 0:
        raise DomainError(f"r and ρ must be nonnegative, got r={r}, ρ={rho}", field="rho")
    tol = tol or settings.quad_tol
    if rho == 0 or r == 0:
        return sphere_area(n) * float(bracket(max(r, rho))) ** (-nu)

    def integrand(t):
        return ((1 + r * r + rho * rho - 2 * r * rho * math.cos(t)) ** (-nu / 2)
                * math.sin(t) ** (n - 2))

    # peak at t = 0 of angular width ⟨r − ρ⟩/√(rρ)
    scale = min(math.pi / 4, float(bracket(r - rho)) / math.sqrt(r * rho))
    return sphere_area(n - 1) * _graded_quad(integrand, 0.0, math.pi, scale, tol)


def envelope_J(nu: float, r: float, rho: float, n: int = 3) -> RegimeEnvelope:
    """
    x-dominant (ρ ≤ 1 or r ≥ 2ρ): ⟨x⟩^{−ν}; ρ-dominant (r ≤ 1 or ρ ≥ 2r): ⟨ρ⟩^{−ν};
    diagonal (r, ρ ≥ 1, ρ/2 ≤ r ≤ 2ρ): ⟨ρ⟩^{−ν}, ⟨ρ⟩^{−ν} log(2⟨ρ⟩/⟨r−ρ⟩) or
    ⟨ρ⟩^{1−n}⟨r−ρ⟩^{n−1−ν} as ν <, =, > n − 1. The bracket in the log case is
    the Japanese bracket of r − ρ.
    """
    _check_nu(nu, n)
    if rho <= 1 or r >= 2 * rho:
        return RegimeEnvelope(regime="far", value=float(bracket(r) ** (-nu)), formula_id="J_x_dominant")
    if r <= 1 or rho >= 2 * r:
        return RegimeEnvelope(regime="near_origin", value=float(bracket(rho) ** (-nu)),
                              formula_id="J_rho_dominant")
    b_rho, b_gap = float(bracket(rho)), float(bracket(r - rho))
    if nu < n - 1:
        return RegimeEnvelope(regime="mixed_J", value=b_rho ** (-nu), formula_id="J_diagonal_sub")
    if nu == n - 1:
        return RegimeEnvelope(regime="mixed_J", value=b_rho ** (-nu) * math.log(2 * b_rho / b_gap),
                              formula_id="J_diagonal_log")
    return RegimeEnvelope(regime="mixed_J", value=b_rho ** (1 - n) * b_gap ** (n - 1 - nu),
                          formula_id="J_diagonal_super")


# ============ RATIO SCANS ============

SHELL_REGIMES = {"shell_sub": -1, "shell_log": 0, "shell_super": 1}


def _regime_points(nu: float, n: int, regime: Regime, samples: int,
                   band: Optional[tuple[float, float]]) -> list[tuple[float, ...]]:
    if regime == "far":
        lo, hi = band or (2.0, 100.0)
        return [(r,) for r in np.geomspace(lo, hi, samples)]
    if regime == "near_origin":
        lo, hi = band or (1e-3, 0.5)
        return [(r,) for r in np.geomspace(lo, hi, samples)]
    if regime in SHELL_REGIMES:
        if np.sign(nu - (n - 1)) != SHELL_REGIMES[regime]:
            raise DomainError(f"regime {regime} needs ν {'<=>'[SHELL_REGIMES[regime] + 1]} n − 1, "
                              f"got ν={nu}, n={n}", field="regime")
        lo, hi = band or (1e-4, 0.45)
        gaps = np.geomspace(lo, hi, (samples + 1) // 2)
        return [(1 + g,) for g in gaps] + [(1 - g,) for g in gaps]
    if regime == "mixed_J":
        lo, hi = band or (1.0, 50.0)
        rhos = np.geomspace(lo, hi, samples)
        offsets = np.geomspace(1e-3, 0.9, samples)
        return [(rho * (1 + u), rho) for rho, u in zip(rhos, offsets)]
    raise DomainError(f"unknown regime '{regime}'", field="regime")


def envelope_ratio_scan(nu: float, n: int, regime: Regime, samples: int = 50,
                        band: Optional[tuple[float, float]] = None) -> EnvelopeScan:
    """Measured bracket [min, max] of eval / envelope over a log-spaced sample of the regime band."""
    points = _regime_points(nu, n, regime, samples, band)

    def ratio(point) -> float:
        if regime == "mixed_J":
            r, rho = point
            return eval_J(nu, r, rho, n) / envelope_J(nu, r, rho, n).value
        (r,) = point
        return eval_I(nu, r, n) / envelope_I(nu, r, n).value

    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        ratios = np.array(list(pool.map(ratio, points)))

    first = points[0][0]
    last = points[-1][0]
    logger.info(f"Envelope scan {regime} ν={nu} n={n}: ratios in [{ratios.min():.4g}, {ratios.max():.4g}]")
    return EnvelopeScan(regime=regime, nu=nu, n=n, band=(min(first, last), max(first, last)),
                        samples=len(points), min_ratio=float(ratios.min()),
                        max_ratio=float(ratios.max()))


def singint_report(nu: float, r: float, n: int = 3) -> SingintReport:
    """eval_I, the n = 3 closed form and the envelope at one radius."""
    value = eval_I(nu, r, n)
    closed = closed_form_I_n3(nu, r) if n == 3 else None
    return SingintReport(nu=nu, r=r, n=n, value=value, closed_form=closed, envelope=envelope_I(nu, r, n),
                         divergent=is_divergent(value))
