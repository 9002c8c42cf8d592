from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from angular_lab.models.fields import SpectralField
from angular_lab.models.indices import IndexTuple, Real
from angular_lab.models.verdicts import Overall, RegularityClass


# ============ SINGULAR INTEGRALS ============

Regime = Literal["far", "near_origin", "shell_sub", "shell_log", "shell_super", "mixed_J"]


class RegimeEnvelope(BaseModel):
    """Constant-free envelope of an angular integral in one regime."""
    regime: Regime
    value: float
    formula_id: str


class SingintReport(BaseModel):
    """I_ν at one radius: quadrature value, n = 3 closed form, envelope."""
    nu: float
    r: float
    n: int
    value: float
    closed_form: Optional[float] = None
    envelope: RegimeEnvelope
    divergent: bool = False


class EnvelopeScan(BaseModel):
    """Measured two-sided bracket of eval / envelope over a regime band."""
    regime: Regime
    nu: float
    n: int
    band: tuple[float, float]
    samples: int
    min_ratio: float
    max_ratio: float

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio


# ============ NORMS ============

class NormReport(BaseModel):
    """Converged ‖|x|^α f‖_{L^p L^p̃} of a family member."""
    family: dict[str, Any]
    alpha: Real
    p: Real
    p_tilde: Real
    value: float
    doublings: int


# ============ DECAY ============

class DecayFit(BaseModel):
    """Least-squares line through (log t, log value)."""
    slope: float
    intercept: float
    residual: float  # max |log value − fitted line|
    window: tuple[float, float]
    points: int


class DecayReport(BaseModel):
    """Measured decay of a heat-evolved datum against the predicted exponent."""
    tuple: IndexTuple
    eta: int = 0
    predicted: Real
    fit: DecayFit
    verdict: Overall
    times: list[float]
    norms: list[float]
    saturating: bool = False
    notes: list[str] = Field(default_factory=list)


class LocalDecayReport(BaseModel):
    """Π(R)-restricted constants and their growth law R^{−Λ_{α,β}}."""
    tuple: IndexTuple
    lambda_gap: Real
    radii: list[float]
    constants: list[float]
    measured_slope: float
    expected_slope: float
    verdict: Overall


# ============ PROBES ============

FamilyKind = Literal["gaussian", "power_log_spike", "angular_cap", "dilated", "bump"]


class TestFamily(BaseModel):
    """A parametrized test function; kind-specific parameters, absent ones unused."""
    model_config = ConfigDict(extra="forbid")
    __test__ = False  # keep pytest from collecting this as a test class

    kind: FamilyKind
    # power_log_spike: |x|^exponent · log(1/|x|) smoothly truncated below delta
    exponent: Optional[float] = None
    delta: Optional[float] = None
    # angular_cap: aperture κ of the cap around the north pole
    aperture: Optional[float] = None
    # dilated: f(x / dilation) of base
    dilation: Optional[float] = None
    base: Optional["TestFamily"] = None
    # radial scale of the envelope (gaussian, bump, cap, spike cutoff)
    width: float = 1.0

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "power_log_spike":
            if self.exponent is None or self.delta is None:
                raise ValueError("power_log_spike needs exponent and delta")
            if not (0 < self.delta < 1):
                raise ValueError("spike truncation delta must lie in (0, 1)")
        if self.kind == "angular_cap" and (self.aperture is None or self.aperture <= 0):
            raise ValueError("angular_cap needs a positive aperture")
        if self.kind == "dilated":
            if self.base is None or self.dilation is None or self.dilation <= 0:
                raise ValueError("dilated family needs a base and a positive dilation")
        if self.width <= 0:
            raise ValueError("width must be positive")
        return self

    def params(self) -> dict[str, float]:
        """Flat parameter record for reports."""
        record = {k: v for k, v in self.model_dump(exclude={"base", "kind"}).items() if v is not None}
        if self.base is not None:
            record.update({f"base_{k}": v for k, v in self.base.params().items()})
        return record


TestFamily.model_rebuild()


class RatioReport(BaseModel):
    """lhs / rhs of an inequality evaluated on one test function."""
    ratio: float
    lhs: float
    rhs: float
    tuple: IndexTuple
    family_params: dict[str, Any] = Field(default_factory=dict)
    rhs_parts: list[float] = Field(default_factory=list)
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if not self.rhs > 0:
            raise ValueError("ratio denominator must be positive")
        return self


class DilationScan(BaseModel):
    """Ratios over a dilation ladder with the fitted log-ratio slope."""
    lambdas: list[float]
    ratios: list[float]
    measured_slope: float
    expected_slope: float


class SharpnessRow(BaseModel):
    tuple: IndexTuple
    status: Overall
    parameters: list[float]
    ratios: list[float]
    sup_ratio: float
    # slope of log ratio against log log(1/δ) for truncation ladders in (0, 1)
    log_growth: Optional[float] = None
    expected_log_growth: Optional[float] = None


class CapTrend(BaseModel):
    """Angular-cap concentration experiment; a conjectured probe, no pass/fail claim."""
    label: str = "conjectured probe"
    apertures: list[float]
    # pointwise side at unit ‖f‖_{L^p L^p̃}
    lhs: list[float]
    ratios: list[float]
    data_norms: list[float] = []


# ============ NAVIER–STOKES ============

StopReason = Literal["converged", "stagnated", "max_iter", "diverged"]


class PicardTrace(BaseModel):
    """Picard sequence record: kept trajectories plus per-iteration diagnostics."""
    times: list[float]
    iterates: list[list[SpectralField]] = Field(default_factory=list)
    iterate_indices: list[int] = Field(default_factory=list)
    diff_norms: list[float] = Field(default_factory=list)
    contraction_ratios: list[float] = Field(default_factory=list)
    # per iterate, worst relative divergence over the trajectory
    divergence: list[float] = Field(default_factory=list)
    stop_reason: StopReason = "max_iter"
    monitor: Optional[IndexTuple] = None

    @property
    def final(self) -> list[SpectralField]:
        return self.iterates[-1]

    def rows(self) -> list[tuple[int, float, float, Optional[float]]]:
        """(iteration, final time, diff norm, ratio) rows, ratios shifted by one."""
        t_final = self.times[-1]
        rows = []
        for k, d in enumerate(self.diff_norms):
            ratio = self.contraction_ratios[k - 1] if k >= 1 else None
            rows.append((k + 2, t_final, d, ratio))
        return rows


class MonitorReport(BaseModel):
    """Weighted mixed norms of the last iterate over time, with the regularity class."""
    tuple: IndexTuple
    times: list[float]
    norms: list[float]
    sup_norm: float
    c0: float
    epsilon: float
    bound: float  # 2 c0 ε
    within_bound: bool
    regularity: Optional[RegularityClass] = None


class ContractionSweep(BaseModel):
    """Largest observed contraction ratio per datum amplitude."""
    amplitudes: list[float]
    max_ratios: list[float]
    kato_products: list[float]  # 4 d0 c0 ε with measured stand-ins
    threshold: Optional[float] = None


class SplitBound(BaseModel):
    """One split-bound quotient: part norm / (A or B · datum norm^power)."""
    name: str
    part_norm: float
    datum_norm: float
    power: float
    quotient: float


class CalderonSplit(BaseModel):
    theta: float
    s: float
    v0: SpectralField
    w0: SpectralField
    A_theta: float
    B_theta: float
    a_exponent: float
    b_exponent: float
    constant: float = 1.0  # C of the bounds, reported separately from A_θ, B_θ
    bound_checks: list[SplitBound] = Field(default_factory=list)


# ============ RUN CONFIGURATION ============

Command = Literal["check", "scan", "norm", "singint", "decay", "probe", "picard", "split"]


class RunConfig(BaseModel):
    """Schema-validated descriptor of one CLI run."""
    model_config = ConfigDict(extra="forbid")

    command: Command
    checker: Optional[str] = None
    tuple: Optional[IndexTuple] = None
    params: dict[str, Any] = Field(default_factory=dict)
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    seed: int = 0
