from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from angular_lab.models.indices import ExtReal, IndexTuple, Real

Relation = Literal["<", "≤", "=", ">", "≥"]
Status = Literal["satisfied", "violated", "boundary"]
Overall = Literal["pass", "fail", "boundary"]


class Constraint(BaseModel):
    """One hypothesis of a condition system, decided on concrete numbers."""
    id: str
    description: str
    relation: Relation
    lhs: Real
    rhs: Real
    status: Status


class Verdict(BaseModel):
    """Outcome of a checker: pass, fail, or boundary (a strict constraint met with equality)."""
    overall: Overall
    theorem_id: str
    constraints: list[Constraint]
    notes: list[str] = Field(default_factory=list)

    @classmethod
    def from_constraints(cls, theorem_id: str, constraints: list[Constraint],
                         notes: Optional[list[str]] = None, **extra) -> "Verdict":
        statuses = {c.status for c in constraints}
        if "violated" in statuses:
            overall = "fail"
        elif "boundary" in statuses:
            overall = "boundary"
        else:
            overall = "pass"
        return cls(overall=overall, theorem_id=theorem_id, constraints=constraints,
                   notes=list(notes or []), **extra)

    @property
    def passed(self) -> bool:
        return self.overall == "pass"

    def constraint(self, constraint_id: str) -> Constraint:
        for c in self.constraints:
            if c.id == constraint_id:
                return c
        raise KeyError(constraint_id)

    def violated(self) -> list[Constraint]:
        return [c for c in self.constraints if c.status == "violated"]


class DecayVerdict(Verdict):
    """Verdict of a decay proposition plus the time-decay exponent it predicts."""
    kind: str
    predicted_exponent: Real = None
    # Localized variant: Λ_{α,β} = Λ_α − Λ_β and the R^{−Λ_{α,β}} amplification exponent
    lambda_gap: Real = None
    amplification_exponent: Real = None


class RegularityClass(BaseModel):
    """Global / LocalOnly / Unknown from the angular-integrability thresholds."""
    value: Literal["Global", "LocalOnly", "Unknown"]
    p_tilde_local: Real = None
    p_tilde_global: Real = None
    boundary: bool = False  # p̃ sits exactly on the threshold that decided the class
    notes: list[str] = Field(default_factory=list)

    @property
    def thresholds(self) -> tuple:
        return (self.p_tilde_local, self.p_tilde_global)


class ScanAxis(BaseModel):
    """One scanned field: values start + k·(stop − start)/steps for k = 0..steps."""
    model_config = ConfigDict(extra="forbid")

    field: str
    start: ExtReal
    stop: ExtReal
    steps: int = Field(default=10, ge=0)


class ScanResult(BaseModel):
    """Row-major raster of Verdict.overall values with axis metadata."""
    checker: str
    template: IndexTuple
    axes: list[ScanAxis]
    axis_values: list[list[ExtReal]]
    shape: list[int]
    overall: list[Overall]

    def row(self, i: int) -> list[str]:
        if len(self.shape) == 1:
            return list(self.overall)
        width = self.shape[1]
        return list(self.overall[i * width:(i + 1) * width])
