"""API routes exposing the admissibility deciders and the singular-integral oracle."""

import logging
from typing import Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, ConfigDict

from angular_lab.config import get_settings
from angular_lab.errors import AngularLabError, ConfigurationError
from angular_lab.models.indices import ExtReal, IndexTuple
from angular_lab.models.reports import EnvelopeScan, SingintReport
from angular_lab.models.verdicts import RegularityClass, ScanAxis, ScanResult, Verdict
from angular_lab.services.admissibility import CHECKERS, classify_regularity, run_checker, scan_region
from angular_lab.services.singular_integrals import envelope_ratio_scan, singint_report

settings = get_settings()
logger = logging.getLogger(__name__)
router = APIRouter()


# ============ REQUEST MODELS ============

class ClassifyInput(BaseModel):
    """Exponents of a space-time criterion norm."""
    model_config = ConfigDict(extra="forbid")

    alpha: ExtReal
    p: ExtReal
    p_tilde: ExtReal
    s: ExtReal
    n: int = 3


class ScanInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    template: IndexTuple
    axes: list[ScanAxis]
    checker: str


def _raise_http(e: AngularLabError):
    """Configuration problems are 422, numerical failures 500."""
    status = 422 if isinstance(e, ConfigurationError) else 500
    logger.warning(f"Request failed ({status}): {e}")
    raise HTTPException(status_code=status, detail=str(e))


# ============ CHECKERS ============

@router.get("/api/checkers")
async def list_checkers() -> list[str]:
    """Registered checker ids."""
    return list(CHECKERS)


@router.post("/api/check/{checker_id}", response_model=Verdict)
async def check(checker_id: str, t: IndexTuple):
    if checker_id not in CHECKERS:
        raise HTTPException(status_code=404, detail=f"Unknown checker '{checker_id}'")
    try:
        return run_checker(checker_id, t)
    except AngularLabError as e:
        _raise_http(e)


@router.post("/api/classify", response_model=RegularityClass)
async def classify(data: ClassifyInput):
    try:
        return classify_regularity(data.alpha, data.p, data.p_tilde, data.s, data.n)
    except AngularLabError as e:
        _raise_http(e)


@router.post("/api/scan", response_model=ScanResult)
def scan(data: ScanInput):
    """Verdict raster; runs in the worker threadpool."""
    try:
        return scan_region(data.template, data.axes, data.checker)
    except AngularLabError as e:
        _raise_http(e)


# ============ SINGULAR INTEGRALS ============

@router.get("/api/singint", response_model=SingintReport)
def singint(nu: float, r: float, n: int = 3):
    """I_ν at |x| = r with the n = 3 closed form and the regime envelope."""
    try:
        return singint_report(nu, r, n)
    except AngularLabError as e:
        _raise_http(e)


@router.get("/api/singint/scan", response_model=EnvelopeScan)
def singint_scan(nu: float, regime: str, n: int = 3, samples: int = 50, lo: Optional[float] = None,
                 hi: Optional[float] = None):
    band = (lo, hi) if lo is not None and hi is not None else None
    try:
        return envelope_ratio_scan(nu, n, regime, samples, band)
    except AngularLabError as e:
        _raise_http(e)
