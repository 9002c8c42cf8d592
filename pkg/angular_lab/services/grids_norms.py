"""
Product radial × spherical grids and quadrature of weighted mixed norms

    ‖|x|^α f‖_{L^p_{|x|} L^p̃_θ} = ( ∫₀^∞ ρ^{αp} ‖f(ρ·)‖^p_{L^p̃(S^{n−1})} ρ^{n−1} dρ )^{1/p}

with the unnormalized surface measure (total mass |S^{n−1}|). L^∞ in either
variable is the max over grid nodes.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre
from scipy.integrate import trapezoid

from angular_lab.config import get_settings
from angular_lab.errors import ConfigurationError, DomainError, NonConvergenceError
from angular_lab.models.fields import Grading, GridField, RadialGrid, SphereGrid
from angular_lab.models.indices import Number

settings = get_settings()
logger = logging.getLogger(__name__)


def sphere_area(n: int) -> float:
    """|S^{n−1}| = 2π^{n/2} / Γ(n/2)."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def _exponent(x: Number) -> float:
    return float(x)


# ============ GRIDS ============

def _breakpoints(rho_min: float, rho_max: float, panels: int, grading: Grading) -> np.ndarray:
    if grading == "linear":
        return np.linspace(rho_min, rho_max, panels + 1)
    if grading == "log":
        return np.geomspace(rho_min, rho_max, panels + 1)
    # composite: log panels up to the pivot, linear beyond
    pivot = 1.0 if rho_min < 1.0 < rho_max else math.sqrt(rho_min * rho_max)
    inner = max(1, panels // 2)
    outer = max(1, panels - inner)
    return np.concatenate([np.geomspace(rho_min, pivot, inner + 1),
                           np.linspace(pivot, rho_max, outer + 1)[1:]])


def panel_grid(breakpoints: np.ndarray, order: int, grading: Grading) -> RadialGrid:
    """Gauss–Legendre nodes of the given order on every panel."""
    x, w = legendre.leggauss(order)
    a, b = breakpoints[:-1, None], breakpoints[1:, None]
    nodes = (0.5 * (b - a) * x[None, :] + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w[None, :]).ravel()
    return RadialGrid(nodes=nodes, weights=weights, breakpoints=np.asarray(breakpoints, dtype=float),
                      panel_order=order, grading=grading)


def build_radial_grid(rho_min: float, rho_max: float, N: Optional[int] = None,
                      grading: Grading = "log") -> RadialGrid:
    """Composite Gauss panels on [rho_min, rho_max]; N nodes rounded up to whole panels."""
    N = N or settings.radial_nodes
    if not (0 < rho_min < rho_max) or not math.isfinite(rho_max):
        raise DomainError(f"radial bounds must satisfy 0 < ρ_min < ρ_max < ∞, got ({rho_min}, {rho_max})",
                          field="rho_min")
    if N < 8:
        raise DomainError(f"radial grid needs at least 8 nodes, got {N}", field="N")
    if grading not in ("linear", "log", "composite"):
        raise ConfigurationError(f"unknown grading '{grading}'", field="grading")
    order = settings.radial_panel_order
    panels = max(1, math.ceil(N / order))
    return panel_grid(_breakpoints(rho_min, rho_max, panels, grading), order, grading)


def build_sphere_grid(n: int, level: Optional[int] = None) -> SphereGrid:
    """
    n = 2: level + 1 equispaced angles (trapezoid rule).
    n = 3: Gauss–Legendre in cos θ times equispaced φ, exact up to degree level.
    """
    level = settings.sphere_level if level is None else level
    if level < 0:
        raise DomainError(f"sphere level must be nonnegative, got {level}", field="level")
    if n == 2:
        count = level + 1
        phi = 2 * math.pi * np.arange(count) / count
        points = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        weights = np.full(count, 2 * math.pi / count)
        return SphereGrid(n=2, level=level, points=points, weights=weights,
                          polar_nodes=phi, azimuth_count=count)
    if n == 3:
        polar = level // 2 + 1
        azimuth = level + 1
        z, wz = legendre.leggauss(polar)
        phi = 2 * math.pi * np.arange(azimuth) / azimuth
        sin_t = np.sqrt(1.0 - z ** 2)
        points = np.stack([
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
            np.repeat(z, azimuth),
        ], axis=1)
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        weights = np.repeat(wz, azimuth) * (2 * math.pi / azimuth)
        return SphereGrid(n=3, level=level, points=points, weights=weights,
                          polar_nodes=z, azimuth_count=azimuth)
    raise DomainError(f"sphere grids are available for n ∈ {{2, 3}}, got n = {n}", field="n")


def sample_function(fn: Callable[[np.ndarray], np.ndarray], radial: RadialGrid,
                    sphere: SphereGrid) -> GridField:
    """Evaluate fn on the Cartesian nodes, shape (N, J, n) -> (N, J) or (d, N, J)."""
    points = radial.nodes[:, None, None] * sphere.points[None, :, :]
    return GridField(radial=radial, sphere=sphere, values=np.asarray(fn(points), dtype=float))


def dilate_radial(grid: RadialGrid, lam: float) -> RadialGrid:
    """Grid for f(·/λ): nodes, weights and panel edges scaled by λ."""
    if lam <= 0:
        raise DomainError(f"dilation must be positive, got {lam}", field="lambda")
    return RadialGrid(nodes=grid.nodes * lam, weights=grid.weights * lam,
                      breakpoints=grid.breakpoints * lam, panel_order=grid.panel_order,
                      grading=grid.grading)


def dilate_field(f: GridField, lam: float) -> GridField:
    """f_λ(x) = f(x/λ) carried on the dilated grid (same node values)."""
    return GridField(radial=dilate_radial(f.radial, lam), sphere=f.sphere, values=f.values.copy())


def mask_ball(f: GridField, R: float) -> GridField:
    """Restriction of f to |x| < R."""
    inside = (f.radial.nodes < R)[None, :, None]
    return f.with_values(np.where(inside, f.values, 0.0))


# ============ NORMS ============

def _lp(values: np.ndarray, weights: np.ndarray, p: float, axis: int) -> np.ndarray:
    """(Σ w |v|^p)^{1/p} along axis, max at p = ∞, rescaled against overflow."""
    a = np.abs(values)
    if math.isinf(p):
        return np.max(a, axis=axis)
    scale = np.max(a, axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    shape = [1] * a.ndim
    shape[axis] = -1
    total = np.sum(weights.reshape(shape) * (a / safe) ** p, axis=axis, keepdims=True)
    return np.squeeze(safe * total ** (1.0 / p) * (scale > 0), axis=axis)


def angular_profile(f: GridField, p_tilde: Number) -> np.ndarray:
    """ρ_i ↦ ‖f(ρ_i ·)‖_{L^p̃(S^{n−1})}."""
    return _lp(f.magnitude(), f.sphere.weights, _exponent(p_tilde), axis=1)


def mixed_norm(f: GridField, alpha: Number, p: Number, p_tilde: Number) -> float:
    """‖|x|^α f‖_{L^p_{|x|} L^p̃_θ} on the grid."""
    a, pp = _exponent(alpha), _exponent(p)
    rho = f.radial.nodes
    inner = angular_profile(f, p_tilde)
    if math.isinf(pp):
        return float(np.max(rho ** a * inner))
    if a * pp + f.n - 1 <= -1:
        logger.warning(f"Non-integrable weight: αp + n − 1 = {a * pp + f.n - 1:.6g} ≤ −1")
        raise DomainError(f"weight ρ^(αp+n−1) with αp + n − 1 = {a * pp + f.n - 1:.6g} is not "
                          "integrable at the origin", field="alpha")
    weighted = rho ** a * inner
    return float(_lp(weighted, f.radial.weights * rho ** (f.n - 1), pp, axis=0))


def spacetime_norm(trajectory: list[tuple[float, GridField]], alpha: Number, s: Number,
                   p: Number, p_tilde: Number) -> float:
    """‖|x|^α u‖_{L^s_T L^p L^p̃}: trapezoid in time, max over samples at s = ∞."""
    if not trajectory:
        raise DomainError("empty trajectory", field="trajectory")
    times = np.array([t for t, _ in trajectory], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise DomainError("trajectory times must be strictly increasing", field="times")
    norms = np.array([mixed_norm(f, alpha, p, p_tilde) for _, f in trajectory])
    ss = _exponent(s)
    if math.isinf(ss):
        return float(np.max(norms))
    if len(times) < 2:
        raise DomainError("a finite time exponent needs at least two samples", field="s")
    return float(trapezoid(norms ** ss, times) ** (1.0 / ss))


def converged_mixed_norm(factory: Callable[[int], GridField], alpha: Number, p: Number,
                         p_tilde: Number) -> tuple[float, int]:
    """
    Refinement-doubling rule: factory(k) samples at the k-th doubling; stop
    when the relative change drops below refine_rel_tol.
    """
    previous = mixed_norm(factory(0), alpha, p, p_tilde)
    for k in range(1, settings.refine_max_doublings + 1):
        current = mixed_norm(factory(k), alpha, p, p_tilde)
        change = abs(current - previous) / max(abs(current), 1e-300)
        logger.debug(f"Refinement {k}: norm={current:.12g} change={change:.3e}")
        if change < settings.refine_rel_tol:
            return current, k
        previous = current
    logger.warning(f"Mixed norm did not settle after {settings.refine_max_doublings} doublings")
    raise NonConvergenceError(
        f"mixed norm changed by {change:.3e} at the last doubling (tolerance {settings.refine_rel_tol:g})")


# ============ DIFFERENTIATION ============

def radial_derivative(f: GridField) -> GridField:
    """∂_ρ f by differentiating the per-panel Legendre interpolant."""
    order = f.radial.panel_order
    d, N, J = f.values.shape
    out = np.empty_like(f.values)
    bp = f.radial.breakpoints
    for k in range(len(bp) - 1):
        a, b = bp[k], bp[k + 1]
        sl = slice(k * order, (k + 1) * order)
        x = (2 * f.radial.nodes[sl] - a - b) / (b - a)
        block = np.moveaxis(f.values[:, sl, :], 1, 0).reshape(order, d * J)
        coef = legendre.legfit(x, block, order - 1)
        deriv = legendre.legval(x, legendre.legder(coef)).T * (2.0 / (b - a))
        out[:, sl, :] = np.moveaxis(deriv.reshape(order, d, J), 0, 1)
    return f.with_values(out)


def _periodic_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    m = values.shape[axis]
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        k[m // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = m
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis).real


def angular_gradient_sq(f: GridField) -> np.ndarray:
    """|∇_S f|² on the unit sphere, summed over components, shape (d, N, J)."""
    sphere = f.sphere
    if sphere.n == 2:
        return _periodic_derivative(f.values, axis=2) ** 2
    d, N, _ = f.values.shape
    polar, azimuth = len(sphere.polar_nodes), sphere.azimuth_count
    grid = f.values.reshape(d, N, polar, azimuth)
    d_phi = _periodic_derivative(grid, axis=3)
    z = sphere.polar_nodes
    block = np.moveaxis(grid, 2, 0).reshape(polar, -1)
    coef = legendre.legfit(z, block, polar - 1)
    d_z = np.moveaxis(legendre.legval(z, legendre.legder(coef)).T.reshape(polar, d, N, azimuth), 0, 2)
    sin2 = (1.0 - z ** 2)[None, None, :, None]
    # ∂_θ = −sin θ ∂_z
    total = sin2 * d_z ** 2 + d_phi ** 2 / sin2
    return total.reshape(d, N, polar * azimuth)


def gradient_magnitude(f: GridField) -> GridField:
    """|∇f| = (|∂_ρ f|² + |∇_S f|²/ρ²)^{1/2}, summed over components."""
    radial = radial_derivative(f).values ** 2
    angular = angular_gradient_sq(f) / f.radial.nodes[None, :, None] ** 2
    return f.with_values(np.sqrt(np.sum(radial + angular, axis=0))[None])


# ============ IMPORT / EXPORT ============

def _descriptor(f: GridField) -> dict:
    return {
        "breakpoints": [float(b) for b in f.radial.breakpoints],
        "panel_order": f.radial.panel_order,
        "grading": f.radial.grading,
        "n": f.sphere.n,
        "level": f.sphere.level,
        "components": f.components,
    }


def export_grid_field(f: GridField, path: str | Path):
    """CSV of (rho, omega_index, component, value) under a '# grid:' descriptor line."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# grid: {json.dumps(_descriptor(f), sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(["rho", "omega_index", "component", "value"])
        for c in range(f.components):
            for i, rho in enumerate(f.radial.nodes):
                for j in range(f.sphere.size):
                    writer.writerow([repr(float(rho)), j, c, repr(float(f.values[c, i, j]))])
    logger.info(f"Exported grid field {f.values.shape} to {path}")


def import_grid_field(path: str | Path) -> GridField:
    """Inverse of export_grid_field."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("# grid:"):
            raise ConfigurationError(f"{path} lacks a '# grid:' descriptor line", field="path")
        desc = json.loads(header[len("# grid:"):])
        radial = panel_grid(np.array(desc["breakpoints"]), desc["panel_order"], desc["grading"])
        sphere = build_sphere_grid(desc["n"], desc["level"])
        values = np.zeros((desc["components"], radial.size, sphere.size))
        reader = csv.DictReader(fh)
        index = {rho: i for i, rho in enumerate(radial.nodes)}
        for row in reader:
            i = index.get(float(row["rho"]))
            if i is None:
                i = int(np.argmin(np.abs(radial.nodes - float(row["rho"]))))
            values[int(row["component"]), i, int(row["omega_index"])] = float(row["value"])
    return GridField(radial=radial, sphere=sphere, values=values)
