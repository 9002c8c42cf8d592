"""
Test-function families and inequality-ratio experiments.

Every experiment evaluates lhs / rhs of one inequality on concrete fields.
Suprema over a family are maxima over a declared finite parameter ladder.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np

from angular_lab.config import get_settings
from angular_lab.errors import DomainError
from angular_lab.models.fields import GridField, RadialGrid, SphereGrid, SpectralField
from angular_lab.models.indices import IndexTuple
from angular_lab.models.reports import CapTrend, DilationScan, RatioReport, SharpnessRow, TestFamily
from angular_lab.services.admissibility import check_sobolev_embedding, run_checker
from angular_lab.services.grids_norms import (
    build_radial_grid, build_sphere_grid, dilate_field, gradient_magnitude, mixed_norm, sample_function,
)
from angular_lab.services.index_core import ckn_deltas, sw_scaling_residual
from angular_lab.services.kernels import fractional_derivative, riesz_potential
from angular_lab.services.nse_picard import default_grids, sample_on_grid

settings = get_settings()
logger = logging.getLogger(__name__)

GRID_STABILITY = 0.02
RatioKind = Literal["stein_weiss", "ckn"]


# ============ FAMILIES ============

def _smootherstep(s: np.ndarray) -> np.ndarray:
    """C² ramp from 0 (s ≤ 0) to 1 (s ≥ 1)."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10 - 15 * s + 6 * s * s)


def _spike_profile(rho: np.ndarray, exponent: float, delta: float) -> np.ndarray:
    """ρ^e log(1/ρ) for ρ ≥ δ, the C²-matching even quartic a + bρ² + cρ⁴ below."""
    h = delta ** exponent * math.log(1 / delta)
    L = math.log(1 / delta)
    dh = delta ** (exponent - 1) * (exponent * L - 1)
    d2h = delta ** (exponent - 2) * ((exponent - 1) * (exponent * L - 1) - exponent)
    matrix = np.array([[1, delta ** 2, delta ** 4],
                       [0, 2 * delta, 4 * delta ** 3],
                       [0, 2, 12 * delta ** 2]])
    a, b, c = np.linalg.solve(matrix, [h, dh, d2h])
    inner = a + b * rho ** 2 + c * rho ** 4
    with np.errstate(divide="ignore", invalid="ignore"):
        outer = np.where(rho > 0, rho ** exponent * np.log(1 / np.where(rho > 0, rho, 1.0)), 0.0)
    return np.where(rho >= delta, outer, inner)


def evaluate_family(fam: TestFamily, points: np.ndarray) -> np.ndarray:
    """Family member at Cartesian points of shape (..., n)."""
    points = np.asarray(points, dtype=float)
    rho = np.linalg.norm(points, axis=-1)
    w = fam.width

    if fam.kind == "gaussian":
        return np.exp(-(rho / w) ** 2)

    if fam.kind == "bump":
        s = np.minimum(rho / w, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(s < 1, np.exp(1 - 1 / (1 - s * s)), 0.0)

    if fam.kind == "power_log_spike":
        # cutoff stays inside the unit ball, where log(1/ρ) > 0
        cut = min(w, 1.0)
        cutoff = 1 - _smootherstep((rho - cut / 4) / (cut / 2))
        return _spike_profile(rho, fam.exponent, fam.delta) * cutoff

    if fam.kind == "angular_cap":
        envelope = np.exp(-(rho / w) ** 2)
        if fam.aperture >= math.pi:
            return envelope
        with np.errstate(invalid="ignore", divide="ignore"):
            cos_theta = np.where(rho > 0, points[..., -1] / np.where(rho > 0, rho, 1.0), 1.0)
        theta = np.arccos(np.clip(cos_theta, -1.0, 1.0))
        kappa = fam.aperture
        return envelope * (1 - _smootherstep((theta - kappa) / (kappa / 2)))

    if fam.kind == "dilated":
        return evaluate_family(fam.base, points / fam.dilation)

    raise DomainError(f"unknown family kind '{fam.kind}'", field="kind")


def make_test_field(fam: TestFamily, radial: RadialGrid, sphere: SphereGrid) -> GridField:
    field = sample_function(lambda x: evaluate_family(fam, x), radial, sphere)
    if not np.all(np.isfinite(field.values)):
        raise DomainError(f"{fam.kind} family is not finite on the grid", field="kind")
    return field


def make_spectral_field(fam: TestFamily, N: int = 32, length: float = 20.0) -> SpectralField:
    """Scalar family member on the periodic box, centered."""
    x = np.arange(N) * (length / N) - length / 2
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    values = evaluate_family(fam, np.stack([X, Y, Z], axis=-1))
    return SpectralField(length=length, values=values)


# ============ RATIOS ============

def _report(lhs: float, rhs: float, t: IndexTuple, family: Optional[TestFamily],
            parts: Sequence[float], label: Optional[str] = None) -> RatioReport:
    if not rhs > 0:
        raise DomainError(f"ratio denominator vanishes (rhs = {rhs})", field="rhs")
    return RatioReport(ratio=lhs / rhs, lhs=lhs, rhs=rhs, tuple=t,
                       family_params=family.params() if family else {}, rhs_parts=list(parts), label=label)


def ratio_stein_weiss(f: GridField, t: IndexTuple, target: Optional[RadialGrid] = None,
                      family: Optional[TestFamily] = None) -> RatioReport:
    """‖|x|^{−β} T_γ f‖_{L^q L^q̃} / ‖|x|^α f‖_{L^p L^p̃}."""
    alpha, beta, gamma = t.require("alpha", "beta", "gamma")
    p, p_tilde, q, q_tilde = t.require("p", "p_tilde", "q", "q_tilde")
    potential = riesz_potential(f, float(gamma), target)
    lhs = mixed_norm(potential, -beta, q, q_tilde)
    rhs = mixed_norm(f, alpha, p, p_tilde)
    logger.debug(f"Stein–Weiss ratio lhs={lhs:.6e} rhs={rhs:.6e}")
    return _report(lhs, rhs, t, family, [rhs])


def _with_derivative(f: Union[GridField, SpectralField], sigma: float,
                     grids: Optional[tuple[RadialGrid, SphereGrid]]) -> tuple[GridField, GridField]:
    """(u, |D|^σ u) on a product grid: spectral multiplier on the box, |∇u| for σ = 1 on a grid."""
    if isinstance(f, SpectralField):
        radial, sphere = grids or default_grids(f)
        return sample_on_grid(f, radial, sphere), sample_on_grid(fractional_derivative(f, sigma), radial, sphere)
    if sigma != 1:
        raise DomainError(f"grid fields support σ = 1 only, got σ={sigma}; use a SpectralField", field="sigma")
    return f, gradient_magnitude(f)


def ratio_ckn(f: Union[GridField, SpectralField], t: IndexTuple,
              grids: Optional[tuple[RadialGrid, SphereGrid]] = None,
              family: Optional[TestFamily] = None) -> RatioReport:
    """
    ‖|x|^{−γ}u‖_{L^r L^r̃} / (‖|x|^{−α}|D|^σ u‖^a_{L^p L^p̃} ‖|x|^{−β}u‖^{1−a}_{L^q L^q̃}).
    At a = 1 the second factor is dropped.
    """
    a, sigma, alpha, beta, gamma = t.require("a", "sigma", "alpha", "beta", "gamma")
    p, p_tilde, q, q_tilde, r, r_tilde = t.require("p", "p_tilde", "q", "q_tilde", "r", "r_tilde")
    u, du = _with_derivative(f, float(sigma), grids)
    lhs = mixed_norm(u, -gamma, r, r_tilde)
    rhs1 = mixed_norm(du, -alpha, p, p_tilde)
    a = float(a)
    if a == 1:
        return _report(lhs, rhs1, t, family, [rhs1])
    rhs2 = mixed_norm(u, -beta, q, q_tilde)
    return _report(lhs, rhs1 ** a * rhs2 ** (1 - a), t, family, [rhs1, rhs2])


def strauss_ratio(f: Union[SpectralField, GridField], sigma, p, p_tilde, n: int = 3,
                  grids: Optional[tuple[RadialGrid, SphereGrid]] = None,
                  family: Optional[TestFamily] = None) -> RatioReport:
    """max |x|^{n/p−σ}|f| over the grid nodes / ‖|D|^σ f‖_{L^p L^p̃}; refuses outside the window."""
    t = IndexTuple(n=n, p=p, p_tilde=p_tilde, sigma=sigma)
    verdict = check_sobolev_embedding(t, "strauss")
    if not verdict.passed:
        logger.warning(f"Strauss window refused: {verdict.notes}")
        failed = ", ".join(c.id for c in verdict.violated()) or "boundary"
        raise DomainError(f"pointwise window fails ({failed})", field="sigma")
    u, du = _with_derivative(f, float(t.sigma), grids)
    weight = u.radial.nodes ** float(n * (1 / t.p) - t.sigma)
    lhs = float(np.max(weight[:, None] * u.magnitude()))
    rhs = mixed_norm(du, 0, t.p, t.p_tilde)
    return _report(lhs, rhs, t, family, [rhs], label="strauss")


# ============ EXPERIMENTS ============

def expected_dilation_slope(t: IndexTuple, kind: RatioKind = "stein_weiss") -> float:
    """Homogeneity of the ratio under f ↦ f(·/λ): log-ratio slope in log λ."""
    if kind == "stein_weiss":
        return -float(sw_scaling_residual(t))
    return float(ckn_deltas(t).residual)


def dilation_scan(f: GridField, t: IndexTuple, lambdas: Sequence[float] = (0.5, 1.0, 2.0, 4.0),
                  kind: RatioKind = "stein_weiss") -> DilationScan:
    """Ratios of f(·/λ) carried on the dilated grid, with the fitted log-log slope."""
    def ratio(lam: float) -> float:
        g = dilate_field(f, lam)
        report = ratio_stein_weiss(g, t) if kind == "stein_weiss" else ratio_ckn(g, t)
        return report.ratio

    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        ratios = list(pool.map(ratio, lambdas))
    slope = float(np.polyfit(np.log(lambdas), np.log(ratios), 1)[0])
    expected = expected_dilation_slope(t, kind)
    logger.info(f"Dilation scan slope {slope:.5f} (expected {expected:.5f})")
    return DilationScan(lambdas=list(lambdas), ratios=ratios, measured_slope=slope, expected_slope=expected)


def grid_doubling_change(fam: TestFamily, t: IndexTuple, rho_min: float = 1e-3, rho_max: float = 8.0,
                         nodes: int = 64, level: int = 8) -> tuple[RatioReport, float]:
    """Stein–Weiss ratio on the doubled grid and its relative change from the coarse grid."""
    n = t.require("n")[0]
    coarse = ratio_stein_weiss(make_test_field(fam, build_radial_grid(rho_min, rho_max, nodes),
                                               build_sphere_grid(n, level)), t, family=fam)
    fine = ratio_stein_weiss(make_test_field(fam, build_radial_grid(rho_min, rho_max, 2 * nodes),
                                             build_sphere_grid(n, 2 * level)), t, family=fam)
    change = abs(fine.ratio - coarse.ratio) / fine.ratio
    if change >= GRID_STABILITY:
        logger.warning(f"Ratio not grid-stable: change {change:.3%} under doubling")
    return fine, change


def expected_spike_growth(t: IndexTuple) -> float:
    """
    Exponent k in ratio ~ log(1/δ)^k for the spike |x|^{γ−n/r} log(1/|x|) at a
    scaling-exact CKN tuple: both sides diverge logarithmically and
    k = (Δ − aσ)/n, positive exactly when Δ ≤ aσ is violated.
    """
    n, a, sigma = t.require("n", "a", "sigma")
    return float(ckn_deltas(t).delta - a * sigma) / n


def _log_growth(parameters: Sequence[float], ratios: Sequence[float]) -> Optional[float]:
    if len(parameters) < 2 or not all(0 < x < 1 for x in parameters):
        return None
    logs = np.log(np.log(1 / np.asarray(parameters, dtype=float)))
    return float(np.polyfit(logs, np.log(ratios), 1)[0])


def sharpness_scan(path: Sequence[IndexTuple], family: Callable[[float], TestFamily],
                   parameters: Sequence[float], radial: RadialGrid, sphere: SphereGrid,
                   kind: RatioKind = "ckn") -> list[SharpnessRow]:
    """
    Per tuple of the path: checker status and the supremum of the ratio over
    family(parameter) for the declared ladder.

    For truncation ladders in (0, 1) each row also carries the fitted growth
    exponent in log(1/δ), and for CKN the predicted one.
    """
    checker = "ckn" if kind == "ckn" else "mixed-sw"
    fields = [make_test_field(family(x), radial, sphere) for x in parameters]
    rows = []
    for t in path:
        status = run_checker(checker, t).overall

        def ratio(k: int) -> float:
            fam = family(parameters[k])
            report = (ratio_ckn(fields[k], t, family=fam) if kind == "ckn"
                      else ratio_stein_weiss(fields[k], t, family=fam))
            return report.ratio

        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            ratios = list(pool.map(ratio, range(len(parameters))))
        growth = _log_growth(parameters, ratios)
        expected = expected_spike_growth(t) if kind == "ckn" and growth is not None else None
        rows.append(SharpnessRow(tuple=t, status=status, parameters=list(parameters), ratios=ratios,
                                 sup_ratio=max(ratios), log_growth=growth, expected_log_growth=expected))
        logger.info(f"Sharpness {checker} [{status}]: sup ratio {max(ratios):.4e}, log growth {growth}")
    return rows


CAP_SPHERE_LEVEL = 96


def cap_trend(p=2, p_tilde=6, n: int = 3, apertures: Sequence[float] = (1.0, 0.5, 0.25),
              radial: Optional[RadialGrid] = None, sphere: Optional[SphereGrid] = None) -> CapTrend:
    """
    Strauss ratio (σ = 1) over shrinking angular caps; reported as a conjectured probe.
    lhs is that of f/‖f‖_{L^p L^p̃}, i.e. measured at fixed data norm. The ratio
    is scale free; the cap's angular gradient grows like 1/κ, so it is reported,
    not asserted.
    """
    radial = radial or build_radial_grid(1e-3, 8.0, 64)
    sphere = sphere or build_sphere_grid(n, CAP_SPHERE_LEVEL)
    lhs, ratios, norms = [], [], []
    for kappa in apertures:
        fam = TestFamily(kind="angular_cap", aperture=kappa)
        field = make_test_field(fam, radial, sphere)
        report = strauss_ratio(field, 1, p, p_tilde, n, family=fam)
        norm = mixed_norm(field, 0, report.tuple.p, report.tuple.p_tilde)
        norms.append(norm)
        lhs.append(report.lhs / norm)
        ratios.append(report.ratio)
    logger.info(f"Cap trend over κ={list(apertures)}: lhs {lhs}, ratios {ratios}")
    return CapTrend(apertures=list(apertures), lhs=lhs, ratios=ratios, data_norms=norms)
