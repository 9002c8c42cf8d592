"""
Small-data Navier–Stokes machinery on the periodic box [0, L)^3.

    u = e^{tΔ}u₀ − ∫₀^t e^{(t−s)Δ} P∇·(u⊗u) ds

Picard iterates u₁ = e^{tΔ}u₀, u_{k+1} = u₁ − B[u_k]. The Duhamel integral is
advanced with per-mode exponential weights for a nonlinearity interpolated
linearly between time samples. Weights |x − c|^α use the min-image distance
to the box center c, so data must sit well inside the box.
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.ndimage import map_coordinates

from angular_lab.config import get_settings
from angular_lab.errors import DatumSupportError, DomainError
from angular_lab.models.fields import GridField, RadialGrid, SphereGrid, SpectralField
from angular_lab.models.indices import IndexTuple
from angular_lab.models.reports import (
    CalderonSplit, ContractionSweep, MonitorReport, PicardTrace, SplitBound,
)
from angular_lab.services.admissibility import classify_regularity
from angular_lab.services.grids_norms import build_radial_grid, build_sphere_grid, mixed_norm
from angular_lab.services.index_core import yz_time_exponent
from angular_lab.services.kernels import wavevectors

settings = get_settings()
logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6
CONTRACTION_TARGET = 0.5


# ============ SPECTRAL OPERATORS ============

def _k2(xi: np.ndarray) -> np.ndarray:
    k2 = np.sum(xi ** 2, axis=0)
    k2[0, 0, 0] = 1.0
    return k2


def _project_hat(v_hat: np.ndarray, xi: np.ndarray, k2: np.ndarray) -> np.ndarray:
    """δ_jk − ξ_jξ_k/|ξ|² applied mode-wise; the zero mode is left alone."""
    dot = np.einsum("ixyz,ixyz->xyz", xi, v_hat)
    return v_hat - xi * (dot / k2)[None]


def leray_project(f: SpectralField) -> SpectralField:
    """Pf = f − ∇Δ^{−1}∇·f."""
    if f.components != 3:
        raise DomainError(f"Leray projection needs a 3-component field, got {f.components}", field="field")
    xi = wavevectors(f)
    return SpectralField.from_spectrum(_project_hat(f.spectrum(), xi, _k2(xi)), f.length, f.center)


def divergence_measure(f: SpectralField) -> float:
    """max_ξ |ξ·û(ξ)| relative to max |û|."""
    u_hat = f.spectrum()
    peak = np.max(np.abs(u_hat))
    if peak == 0:
        return 0.0
    return float(np.max(np.abs(np.einsum("ixyz,ixyz->xyz", wavevectors(f), u_hat))) / peak)


def dealias_mask(N: int) -> np.ndarray:
    """2/3 rule on integer wavenumbers along each axis."""
    kk = np.abs(np.fft.fftfreq(N, d=1.0 / N))
    keep = kk < settings.dealias_fraction * (N / 2)
    return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]


def _nonlinear_hat(u_hat: np.ndarray, xi: np.ndarray, k2: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """P∇·(u⊗u) in Fourier space, dealiased."""
    u = np.fft.ifftn(u_hat * mask, axes=(1, 2, 3)).real
    F_hat = np.fft.fftn(u[:, None] * u[None, :], axes=(2, 3, 4)) * mask
    div = 1j * np.einsum("jxyz,ijxyz->ixyz", xi, F_hat)
    return _project_hat(div, xi, k2)


def _etd_weights(h: float, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Decay e^{−hλ} and the weights of G_a, G_b in ∫₀^h e^{−(h−u)λ}(G_a(h−u) + G_b u)/h du.
    """
    z = h * lam
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    em1 = np.expm1(-zs)
    phi_a = np.where(small, 0.5 - z / 3 + z * z / 8, (-em1 - zs * np.exp(-zs)) / zs ** 2)
    phi_b = np.where(small, 0.5 - z / 6 + z * z / 24, (zs + em1) / zs ** 2)
    return np.exp(-z), h * phi_a, h * phi_b


def _duhamel_hat(G: Sequence[np.ndarray], times: np.ndarray, lam: np.ndarray) -> list[np.ndarray]:
    """B(t_k) = ∫₀^{t_k} e^{−(t_k−s)λ} G(s) ds for every sample, G linear between samples."""
    out = [np.zeros_like(G[0])]
    for k in range(len(times) - 1):
        decay, wa, wb = _etd_weights(times[k + 1] - times[k], lam)
        out.append(decay[None] * out[-1] + wa[None] * G[k] + wb[None] * G[k + 1])
    return out


def duhamel_step(F: Sequence[SpectralField], t: float, quad: Sequence[float]) -> SpectralField:
    """
    ∫₀^t e^{(t−s)Δ} P∇·F(s) ds for a 9-component tensor trajectory F (F_ij at
    index 3i + j) sampled on quad, with quad[0] = 0 and quad[-1] = t.
    """
    times = np.asarray(quad, dtype=float)
    if len(F) != len(times):
        raise DomainError("tensor trajectory and time grid differ in length", field="quad")
    if times[0] != 0 or not math.isclose(times[-1], t) or np.any(np.diff(times) <= 0):
        raise DomainError("time grid must increase from 0 to t", field="quad")
    first = F[0]
    if first.components != 9:
        raise DomainError(f"Duhamel step needs a 9-component tensor field, got {first.components}",
                          field="F")
    xi = wavevectors(first)
    k2 = _k2(xi)
    lam = np.sum(xi ** 2, axis=0)
    G = []
    for field in F:
        F_hat = field.spectrum().reshape(3, 3, *field.values.shape[1:])
        G.append(_project_hat(1j * np.einsum("jxyz,ijxyz->ixyz", xi, F_hat), xi, k2))
    B = _duhamel_hat(G, times, lam)[-1]
    return SpectralField.from_spectrum(B, first.length, first.center)


def heat_flow(u0: SpectralField, times: Sequence[float]) -> list[SpectralField]:
    """e^{tΔ}u₀ = e^{−t|ξ|²}û₀ at each time."""
    u_hat = u0.spectrum()
    lam = np.sum(wavevectors(u0) ** 2, axis=0)
    return [SpectralField.from_spectrum(np.exp(-t * lam)[None] * u_hat, u0.length, u0.center) for t in times]


# ============ DATA ============

def min_image_distance(f: SpectralField) -> np.ndarray:
    """|x − c| with periodic wraparound, shape (N, N, N)."""
    x = f.coordinates()
    parts = []
    for c in f.center:
        d = np.abs(x - c)
        parts.append(np.minimum(d, f.length - d))
    return np.sqrt(parts[0][:, None, None] ** 2 + parts[1][None, :, None] ** 2 + parts[2][None, None, :] ** 2)


def support_radius(f: SpectralField) -> float:
    """Largest min-image distance at which |f| exceeds support_threshold · max|f|."""
    mag = np.sqrt(np.sum(f.values ** 2, axis=0))
    peak = np.max(mag)
    if peak == 0:
        return 0.0
    return float(np.max(min_image_distance(f)[mag > settings.support_threshold * peak]))


def check_support(f: SpectralField):
    radius = support_radius(f)
    limit = settings.support_fraction * f.length
    if radius > limit:
        logger.warning(f"Datum support {radius:.4g} exceeds {limit:.4g}")
        raise DatumSupportError(radius, limit)


def _curl_of_potential(potential: np.ndarray, length: float) -> SpectralField:
    shell = SpectralField(length=length, values=potential)
    xi = wavevectors(shell)
    a_hat = shell.spectrum()
    u_hat = 1j * np.cross(xi, a_hat, axis=0)
    return SpectralField.from_spectrum(u_hat, length)


def _centered_coordinates(N: int, length: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.arange(N) * (length / N) - length / 2
    return np.meshgrid(x, x, x, indexing="ij")


def localized_taylor_green(N: int = 64, length: float = 20.0, amplitude: float = 1.0,
                           width: float = 1.0, wavenumber: float = 1.0) -> SpectralField:
    """Curl of ψ e_z with ψ = A e^{−|x−c|²/w²} sin(kx') sin(ky'): a Taylor–Green cell under a Gaussian."""
    X, Y, Z = _centered_coordinates(N, length)
    envelope = np.exp(-(X ** 2 + Y ** 2 + Z ** 2) / width ** 2)
    psi = amplitude * envelope * np.sin(wavenumber * X) * np.sin(wavenumber * Y)
    potential = np.stack([np.zeros_like(psi), np.zeros_like(psi), psi])
    return _curl_of_potential(potential, length)


def gaussian_vortex(N: int = 64, length: float = 20.0, amplitude: float = 1.0,
                    width: float = 1.0) -> SpectralField:
    """Swirl about the z-axis: curl of A e^{−|x−c|²/w²} e_z."""
    X, Y, Z = _centered_coordinates(N, length)
    psi = amplitude * np.exp(-(X ** 2 + Y ** 2 + Z ** 2) / width ** 2)
    potential = np.stack([np.zeros_like(psi), np.zeros_like(psi), psi])
    return _curl_of_potential(potential, length)


def jointly_rescaled(f: SpectralField, lam: float) -> SpectralField:
    """λf(λx) on the matched box of length L/λ; same samples, scaled amplitude."""
    if lam <= 0:
        raise DomainError(f"rescaling factor must be positive, got {lam}", field="lam")
    center = tuple(c / lam for c in f.center)
    return SpectralField(length=f.length / lam, values=lam * f.values, center=center)


def box_doubling_bias(datum: Callable[[int, float], SpectralField], t: IndexTuple, N: int = 64,
                      length: float = 20.0, grids: Optional[tuple[RadialGrid, SphereGrid]] = None) -> float:
    """
    Relative change of ‖|x|^α u₀‖_{L^p L^p̃} when the box doubles at fixed
    spacing, datum(N, L) → datum(2N, 2L). Both norms use the small box's grids.
    """
    alpha, p, p_tilde = t.require("alpha", "p", "p_tilde")
    small = datum(N, length)
    large = datum(2 * N, 2 * length)
    radial, sphere = grids or default_grids(small)
    base = mixed_norm(sample_on_grid(small, radial, sphere), alpha, p, p_tilde)
    doubled = mixed_norm(sample_on_grid(large, radial, sphere), alpha, p, p_tilde)
    bias = abs(doubled - base) / doubled if doubled > 0 else 0.0
    logger.info(f"Box doubling L={length:.4g}→{2 * length:.4g}: relative bias {bias:.3e}")
    return bias


def sample_on_grid(f: SpectralField, radial: RadialGrid, sphere: SphereGrid) -> GridField:
    """Periodic cubic-spline resampling at c + ρω for the product grid."""
    if sphere.n != 3:
        raise DomainError("box fields live in three dimensions", field="n")
    if radial.rho_max > f.length / 2:
        raise DomainError(f"radial grid reaches {radial.rho_max:.4g} beyond half the box {f.length / 2:.4g}",
                          field="rho_max")
    points = np.asarray(f.center)[None, None, :] + radial.nodes[:, None, None] * sphere.points[None, :, :]
    coords = (points / f.spacing).reshape(-1, 3).T
    values = np.stack([map_coordinates(component, coords, order=3, mode="grid-wrap")
                       for component in f.values])
    return GridField(radial=radial, sphere=sphere, values=values.reshape(f.components, radial.size, sphere.size))


def default_grids(f: SpectralField) -> tuple[RadialGrid, SphereGrid]:
    """Product grid covering the admissible support ball of the box."""
    reach = settings.support_fraction * f.length * 1.5
    return (build_radial_grid(f.spacing * 1e-2, reach, 128, "composite"),
            build_sphere_grid(3, 16))


# ============ PICARD ============

def _box_l2(u_hat: np.ndarray, length: float) -> float:
    """‖u‖_{L²(box)} from Fourier coefficients (Parseval)."""
    N = u_hat.shape[1]
    return float(math.sqrt(np.sum(np.abs(u_hat) ** 2)) * (length / N) ** 1.5 / N ** 1.5)


def _trajectory_norm(traj_hat: list[np.ndarray], template: SpectralField, monitor: Optional[IndexTuple],
                     grids: Optional[tuple[RadialGrid, SphereGrid]]) -> float:
    """sup over time samples of the box L² norm, or of the monitor's weighted mixed norm."""
    if monitor is None:
        return max(_box_l2(u_hat, template.length) for u_hat in traj_hat)
    radial, sphere = grids or default_grids(template)
    return max(
        mixed_norm(sample_on_grid(SpectralField.from_spectrum(u_hat, template.length, template.center),
                                  radial, sphere), monitor.alpha, monitor.p, monitor.p_tilde)
        for u_hat in traj_hat
    )


def picard_iterate(u0: SpectralField, T: float, steps: int = 20, max_iter: int = 10,
                   monitor: Optional[IndexTuple] = None,
                   grids: Optional[tuple[RadialGrid, SphereGrid]] = None) -> PicardTrace:
    """
    Picard sequence on [0, T] sampled at steps + 1 times. Differences are
    measured in sup_t of the box L² norm, or in the monitor tuple's
    ‖|x|^α ·‖_{L^p L^p̃} when a monitor is given.

    Stops when the difference falls below picard_tol (converged), when two
    successive ratios exceed 1 − picard_stagnation_tol (stagnated), when the
    difference blows up (diverged) or after max_iter iterates.
    """
    if u0.components != 3:
        raise DomainError(f"velocity datum needs 3 components, got {u0.components}", field="u0")
    if T <= 0 or steps < 1 or max_iter < 1:
        raise DomainError("need T > 0, steps ≥ 1 and max_iter ≥ 1", field="T")
    if divergence_measure(u0) > 1e-10:
        raise DomainError(f"datum is not divergence-free (relative divergence {divergence_measure(u0):.2e})",
                          field="u0")
    u0_hat = u0.spectrum()
    if np.max(np.abs(u0_hat[:, 0, 0, 0])) > 1e-10 * max(1.0, np.max(np.abs(u0_hat))):
        raise DomainError("datum must have zero mean", field="u0")
    check_support(u0)
    if monitor is not None:
        monitor.require("alpha", "p", "p_tilde")

    times = np.linspace(0.0, T, steps + 1)
    xi = wavevectors(u0)
    k2 = _k2(xi)
    lam = np.sum(xi ** 2, axis=0)
    mask = dealias_mask(u0.resolution)
    linear = [np.exp(-t * lam)[None] * u0_hat for t in times]

    def to_fields(traj):
        return [SpectralField.from_spectrum(u_hat, u0.length, u0.center) for u_hat in traj]

    current = linear
    kept = [to_fields(current)]
    indices = [1]
    trace = PicardTrace(times=[float(t) for t in times], monitor=monitor)
    trace.divergence.append(max(divergence_measure(u) for u in kept[-1]))
    scale = max(_trajectory_norm(linear, u0, monitor, grids), 1e-300)

    for k in range(2, max_iter + 1):
        G = [_nonlinear_hat(u_hat, xi, k2, mask) for u_hat in current]
        B = _duhamel_hat(G, times, lam)
        following = [lin - b for lin, b in zip(linear, B)]
        diff = _trajectory_norm([a - b for a, b in zip(following, current)], u0, monitor, grids)
        trace.diff_norms.append(diff)
        if len(trace.diff_norms) > 1 and trace.diff_norms[-2] > 0:
            trace.contraction_ratios.append(diff / trace.diff_norms[-2])
        current = following
        kept.append(to_fields(current))
        indices.append(k)
        kept, indices = kept[-settings.picard_keep_iterates:], indices[-settings.picard_keep_iterates:]
        trace.divergence.append(max(divergence_measure(u) for u in kept[-1]))
        ratio = trace.contraction_ratios[-1] if trace.contraction_ratios else float("nan")
        logger.info(f"Picard iteration {k}: diff={diff:.3e} ratio={ratio:.3f}")

        if not math.isfinite(diff) or diff > DIVERGENCE_FACTOR * max(trace.diff_norms[0], scale):
            trace.stop_reason = "diverged"
            logger.warning(f"Picard iteration diverged at k={k} (diff={diff:.3e})")
            break
        if diff <= settings.picard_tol * scale:
            trace.stop_reason = "converged"
            break
        stalled = [q > 1 - settings.picard_stagnation_tol for q in trace.contraction_ratios[-2:]]
        if len(stalled) == 2 and all(stalled):
            trace.stop_reason = "stagnated"
            logger.warning(f"Picard iteration stagnated at k={k}")
            break

    trace.iterates = kept
    trace.iterate_indices = indices
    return trace


# ============ MONITORING ============

def monitor_norms(trace: PicardTrace, t: IndexTuple,
                  grids: Optional[tuple[RadialGrid, SphereGrid]] = None) -> MonitorReport:
    """
    ‖|x|^α u(t)‖_{L^p L^p̃} of the last iterate over time, the empirical linear
    constant c₀ = sup_t ‖|x|^α e^{tΔ}u₀‖ / ε with ε the datum norm, and the
    regularity class of (α, p, p̃, s); s defaults to the solution of 2/s + n/p = 1 − α.
    """
    alpha, p, p_tilde = t.require("alpha", "p", "p_tilde")
    final = trace.final
    u0 = final[0]
    radial, sphere = grids or default_grids(u0)

    def norm(field: SpectralField) -> float:
        return mixed_norm(sample_on_grid(field, radial, sphere), alpha, p, p_tilde)

    norms = [norm(u) for u in final]
    epsilon = norms[0]
    linear = heat_flow(u0, trace.times)
    c0 = max(norm(u) for u in linear) / epsilon if epsilon > 0 else 0.0
    bound = 2 * c0 * epsilon
    sup_norm = max(norms)

    s = t.s if t.s is not None else yz_time_exponent(alpha, p, t.n)
    regularity = classify_regularity(alpha, p, p_tilde, s, t.n)
    logger.info(f"Monitor sup={sup_norm:.4e} bound={bound:.4e} class={regularity.value}")
    return MonitorReport(tuple=t, times=trace.times, norms=norms, sup_norm=sup_norm, c0=c0,
                         epsilon=epsilon, bound=bound, within_bound=sup_norm <= bound * (1 + 1e-12),
                         regularity=regularity)


def measure_contraction_threshold(datum: Callable[[float], SpectralField], amplitudes: Sequence[float],
                                  T: float = 1.0, steps: int = 20, max_iter: int = 8) -> ContractionSweep:
    """
    Largest contraction ratio per amplitude; the threshold is the largest
    amplitude below which every observed ratio is at most 1/2. The Kato
    product 4d₀c₀ε uses ε = ‖u₀‖, c₀ = sup_t ‖e^{tΔ}u₀‖/ε and
    d₀ = ‖B[u₁]‖/‖u₁‖² in the sup_t box L² norm.
    """
    max_ratios, products = [], []
    for amplitude in sorted(amplitudes):
        u0 = datum(amplitude)
        trace = picard_iterate(u0, T, steps, max_iter)
        max_ratios.append(max(trace.contraction_ratios) if trace.contraction_ratios else 0.0)

        times = np.array(trace.times)
        xi = wavevectors(u0)
        k2 = _k2(xi)
        lam = np.sum(xi ** 2, axis=0)
        mask = dealias_mask(u0.resolution)
        linear = [np.exp(-t * lam)[None] * u0.spectrum() for t in times]
        eps = _box_l2(u0.spectrum(), u0.length)
        lin_norm = max(_box_l2(u, u0.length) for u in linear)
        G = [_nonlinear_hat(u, xi, k2, mask) for u in linear]
        bilinear = max(_box_l2(b, u0.length) for b in _duhamel_hat(G, times, lam))
        c0 = lin_norm / eps if eps > 0 else 0.0
        d0 = bilinear / lin_norm ** 2 if lin_norm > 0 else 0.0
        products.append(4 * d0 * c0 * eps)
        logger.info(f"Amplitude {amplitude:.4g}: max ratio {max_ratios[-1]:.3f}, 4d0c0ε={products[-1]:.3f}")

    ordered = sorted(amplitudes)
    threshold = None
    for amplitude, ratio in zip(ordered, max_ratios):
        if ratio > CONTRACTION_TARGET:
            break
        threshold = amplitude
    return ContractionSweep(amplitudes=ordered, max_ratios=max_ratios, kato_products=products,
                            threshold=threshold)


# ============ CALDERÓN SPLIT ============

def calderon_theta(p_tilde: float) -> float:
    """θ with 1/p̃ = (1−θ)/2 + θ/4."""
    if not (2 < p_tilde < 4):
        raise DomainError(f"splitting needs p̃ ∈ (2, 4), got {p_tilde}", field="p_tilde")
    return 2 - 4 / p_tilde


def calderon_constants(theta: float, constant: float = 1.0) -> tuple[float, float, float, float]:
    """(A_θ, B_θ, a, b) with s = θ/(1−θ), A_θ = C s^a, B_θ = C s^{−b}, a = (1−θ)/(2−θ), b = θ/(2−θ)."""
    if not (0 < theta < 1):
        raise DomainError(f"θ must lie in (0, 1), got {theta}", field="theta")
    s = theta / (1 - theta)
    a = (1 - theta) / (2 - theta)
    b = theta / (2 - theta)
    return constant * s ** a, constant * s ** (-b), a, b


def calderon_split(u0: SpectralField, p_tilde: float,
                   grids: Optional[tuple[RadialGrid, SphereGrid]] = None) -> CalderonSplit:
    """
    Amplitude split at s = θ/(1−θ): u_{0,<s} where |u₀| < s, u_{0,>s} elsewhere;
    v₀ = P u_{0,>s}, w₀ = P u_{0,<s}. bound_checks hold the quotients
    ‖|x|^{−1/2}w₀‖_{L²L⁴} / (A_θ ‖|x|^{−1/2}u₀‖^{p̃/4}_{L²L^p̃}) and
    ‖|x|^{−1/2}v₀‖_{L²} / (B_θ ‖|x|^{−1/2}u₀‖^{p̃/2}_{L²L^p̃}), i.e. the measured C.
    """
    if u0.components != 3:
        raise DomainError("splitting needs a 3-component velocity datum", field="u0")
    theta = calderon_theta(p_tilde)
    s = theta / (1 - theta)
    A, B, a_exp, b_exp = calderon_constants(theta)

    magnitude = np.sqrt(np.sum(u0.values ** 2, axis=0))
    small = (magnitude < s)[None]
    v0 = leray_project(u0.with_values(np.where(small, 0.0, u0.values)))
    w0 = leray_project(u0.with_values(np.where(small, u0.values, 0.0)))

    radial, sphere = grids or default_grids(u0)
    datum = mixed_norm(sample_on_grid(u0, radial, sphere), -0.5, 2, p_tilde)
    w_norm = mixed_norm(sample_on_grid(w0, radial, sphere), -0.5, 2, 4)
    v_norm = mixed_norm(sample_on_grid(v0, radial, sphere), -0.5, 2, 2)
    checks = [
        SplitBound(name="w0_L2L4", part_norm=w_norm, datum_norm=datum, power=p_tilde / 4,
                   quotient=w_norm / (A * datum ** (p_tilde / 4)) if datum > 0 else 0.0),
        SplitBound(name="v0_L2", part_norm=v_norm, datum_norm=datum, power=p_tilde / 2,
                   quotient=v_norm / (B * datum ** (p_tilde / 2)) if datum > 0 else 0.0),
    ]
    logger.info(f"Calderón split p̃={p_tilde}: θ={theta:.4f} s={s:.4f} A={A:.4f} B={B:.4f}")
    return CalderonSplit(theta=theta, s=s, v0=v0, w0=w0, A_theta=A, B_theta=B,
                         a_exponent=a_exp, b_exponent=b_exp, bound_checks=checks)


def calderon_family_constant(data: Sequence[SpectralField], p_tilde: float,
                             grids: Optional[tuple[RadialGrid, SphereGrid]] = None) -> float:
    """Single C making both split bounds hold over the datum family (max quotient)."""
    quotients = []
    for u0 in data:
        split = calderon_split(u0, p_tilde, grids)
        quotients.extend(check.quotient for check in split.bound_checks)
    return float(max(quotients))
