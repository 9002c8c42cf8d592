"""Exponent values and the IndexTuple record shared by every condition system."""

import math
from fractions import Fraction
from typing import Annotated, Any, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer, field_validator

from angular_lab.errors import ConfigurationError

INF = math.inf

# Exact rational, or a float (math.inf for the point at infinity)
Number = Union[Fraction, float]

_INF_TOKENS = {"inf", "+inf", "infinity", "+infinity", "∞", "+∞"}


def parse_ext_real(value: Any) -> Optional[Number]:
    """
    Convert user input to an exponent value.

    Integers, decimal literals and "a/b" strings become exact Fractions;
    "inf" / "∞" / float('inf') become math.inf. Floats are read through
    their shortest repr so 0.4 is stored as 2/5.
    """
    if value is None:
        return None
    if isinstance(value, bool):
        raise ValueError("booleans are not exponents")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise ValueError("NaN is not an exponent")
        if math.isinf(value):
            if value < 0:
                raise ValueError("-inf is not an exponent")
            return INF
        return Fraction(repr(value))
    if isinstance(value, str):
        token = value.strip().lower()
        if token in _INF_TOKENS:
            return INF
        try:
            return Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot read {value!r} as a number")
    raise ValueError(f"cannot read {value!r} as a number")


def format_ext_real(value: Optional[Number]) -> Optional[str]:
    """Inverse of parse_ext_real: '3/2', '-1', 'inf'."""
    if value is None:
        return None
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


ExtReal = Annotated[
    Any,
    BeforeValidator(parse_ext_real),
    PlainSerializer(format_ext_real),
]


def parse_real(value: Any) -> Optional[Number]:
    """Like parse_ext_real, but computed floats stay floats (used for reported values)."""
    if isinstance(value, float) and not math.isinf(value):
        return value
    if isinstance(value, float) and value < 0:
        return value
    return parse_ext_real(value)


def format_real(value: Optional[Number]):
    if isinstance(value, float) and math.isfinite(value):
        return value
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format_ext_real(value)


# Reported quantity: exact when it was computed exactly, float otherwise
Real = Annotated[
    Any,
    BeforeValidator(parse_real),
    PlainSerializer(format_real),
]

LEBESGUE_FIELDS = ("p", "p_tilde", "q", "q_tilde", "r", "r_tilde", "s", "p0", "p0_tilde")
WEIGHT_FIELDS = ("alpha", "beta", "gamma", "sigma", "mu", "alpha0")

SYMBOLS = {
    "p_tilde": "p̃", "q_tilde": "q̃", "r_tilde": "r̃", "p0_tilde": "p̃₀",
    "alpha": "α", "beta": "β", "gamma": "γ", "sigma": "σ", "mu": "μ",
    "alpha0": "α₀", "p0": "p₀", "eta": "|η|",
}


class IndexTuple(BaseModel):
    """Every exponent symbol used by any condition system; absent fields are None."""

    model_config = ConfigDict(extra="forbid")

    n: Optional[int] = None

    # Lebesgue exponents in [1, ∞]
    p: ExtReal = None
    p_tilde: ExtReal = None
    q: ExtReal = None
    q_tilde: ExtReal = None
    r: ExtReal = None
    r_tilde: ExtReal = None
    s: ExtReal = None

    # Weight / order exponents
    alpha: ExtReal = None
    beta: ExtReal = None
    gamma: ExtReal = None
    sigma: ExtReal = None
    mu: ExtReal = None

    # CKN interpolation weight in (0, 1]
    a: ExtReal = None

    # Multi-index order |η|
    eta: Optional[int] = None

    # Initial-datum exponents of the regularity criteria
    alpha0: ExtReal = None
    p0: ExtReal = None
    p0_tilde: ExtReal = None

    @field_validator("n")
    @classmethod
    def _check_dimension(cls, v):
        if v is not None and v < 2:
            raise ValueError("dimension n must be an integer ≥ 2")
        return v

    @field_validator(*LEBESGUE_FIELDS)
    @classmethod
    def _check_lebesgue(cls, v):
        if v is not None and v < 1:
            raise ValueError(f"Lebesgue exponent must lie in [1, ∞], got {format_ext_real(v)}")
        return v

    @field_validator(*WEIGHT_FIELDS)
    @classmethod
    def _check_finite(cls, v):
        if v is not None and math.isinf(v):
            raise ValueError("weight and order exponents must be finite")
        return v

    @field_validator("a")
    @classmethod
    def _check_interpolation(cls, v):
        if v is not None and not (0 < v <= 1):
            raise ValueError("interpolation weight a must lie in (0, 1]")
        return v

    @field_validator("eta")
    @classmethod
    def _check_order(cls, v):
        if v is not None and v < 0:
            raise ValueError("multi-index order must be a nonnegative integer")
        return v

    def require(self, *names: str) -> tuple:
        """Return the named fields, raising ConfigurationError on the first missing one."""
        values = []
        for name in names:
            value = getattr(self, name)
            if value is None:
                raise ConfigurationError(
                    f"field '{name}' ({SYMBOLS.get(name, name)}) is required here", field=name
                )
            values.append(value)
        return tuple(values)

    def updated(self, **changes) -> "IndexTuple":
        """Validated copy with some fields replaced."""
        data = self.model_dump(exclude_none=True)
        data.update({k: v for k, v in changes.items()})
        return IndexTuple.model_validate(data)
