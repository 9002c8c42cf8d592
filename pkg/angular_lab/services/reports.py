"""Report serialization: JSON for structured results, CSV for tables."""

import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from pydantic import BaseModel

from angular_lab import __version__
from angular_lab.config import get_settings
from angular_lab.errors import ConfigurationError
from angular_lab.models.indices import format_ext_real
from angular_lab.models.reports import (
    CalderonSplit, DecayReport, DilationScan, EnvelopeScan, LocalDecayReport, MonitorReport, PicardTrace,
    RunConfig, SharpnessRow,
)
from angular_lab.models.verdicts import ScanResult

settings = get_settings()
logger = logging.getLogger(__name__)

# Array-valued fields kept out of JSON reports
EXCLUDE = {
    PicardTrace: {"iterates"},
    CalderonSplit: {"v0", "w0"},
}

Result = Union[BaseModel, Sequence[BaseModel]]


def config_hash(config: Optional[RunConfig]) -> str:
    """SHA-256 of the canonical JSON form of the run configuration."""
    if config is None:
        return ""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"),
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _meta(config: Optional[RunConfig]) -> dict[str, str]:
    return {"tool": settings.tool_name, "version": __version__, "config_sha256": config_hash(config)}


def _round(value: float) -> float:
    """One rule for JSON and CSV: report_digits significant digits, written shortest."""
    return float(f"{value:.{settings.report_digits}g}")


def _rounded(node: Any) -> Any:
    if isinstance(node, float):
        return _round(node)
    if isinstance(node, dict):
        return {k: _rounded(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_rounded(v) for v in node]
    return node


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(_round(value))
    if value is None:
        return ""
    return str(value)


def _dump(result: Result) -> Any:
    if isinstance(result, BaseModel):
        return result.model_dump(mode="json", exclude=EXCLUDE.get(type(result)))
    return [_dump(item) for item in result]


# ============ JSON ============

def to_json(result: Result, config: Optional[RunConfig] = None) -> str:
    """Result fields in definition order under a leading _meta record."""
    body = _rounded(_dump(result))
    document = {"_meta": _meta(config), "result": body}
    return json.dumps(document, indent=2, ensure_ascii=False)


# ============ CSV ============

def _table(result: Result) -> tuple[list[str], list[str], list[list[Any]]]:
    """(comment lines, header, rows) for the result type."""
    if isinstance(result, ScanResult):
        comments = [f"checker: {result.checker}"]
        for axis, values in zip(result.axes, result.axis_values):
            comments.append(f"axis {axis.field}: {' '.join(_dump_values(values))}")
        if len(result.shape) == 1:
            header = [result.axes[0].field, "overall"]
            rows = [[v, o] for v, o in zip(_dump_values(result.axis_values[0]), result.overall)]
        else:
            header = [f"{result.axes[0].field}\\{result.axes[1].field}"] + _dump_values(result.axis_values[1])
            rows = [[v] + result.row(i) for i, v in enumerate(_dump_values(result.axis_values[0]))]
        return comments, header, rows
    if isinstance(result, PicardTrace):
        return ([f"stop_reason: {result.stop_reason}"], ["iteration", "time", "norm", "ratio"],
                [list(row) for row in result.rows()])
    if isinstance(result, DecayReport):
        return ([f"slope: {_fmt(result.fit.slope)}", f"verdict: {result.verdict}"], ["time", "norm"],
                [list(row) for row in zip(result.times, result.norms)])
    if isinstance(result, LocalDecayReport):
        return ([f"slope: {_fmt(result.measured_slope)}", f"expected: {_fmt(result.expected_slope)}"],
                ["R", "constant"], [list(row) for row in zip(result.radii, result.constants)])
    if isinstance(result, MonitorReport):
        return ([f"c0: {_fmt(result.c0)}", f"bound: {_fmt(result.bound)}"], ["time", "norm"],
                [list(row) for row in zip(result.times, result.norms)])
    if isinstance(result, DilationScan):
        return ([f"slope: {_fmt(result.measured_slope)}", f"expected: {_fmt(result.expected_slope)}"],
                ["lambda", "ratio"], [list(row) for row in zip(result.lambdas, result.ratios)])
    if isinstance(result, EnvelopeScan):
        return ([], ["regime", "nu", "n", "band_lo", "band_hi", "samples", "min_ratio", "max_ratio"],
                [[result.regime, result.nu, result.n, *result.band, result.samples,
                  result.min_ratio, result.max_ratio]])
    if isinstance(result, list) and result and isinstance(result[0], SharpnessRow):
        header = ["status", "sup_ratio"] + [f"ratio@{_fmt(x)}" for x in result[0].parameters]
        return [], header, [[row.status, row.sup_ratio, *row.ratios] for row in result]
    raise ConfigurationError(f"no CSV layout for {type(result).__name__}; use JSON", field="format")


def _dump_values(values) -> list[str]:
    return [format_ext_real(v) for v in values]


def to_csv(result: Result, config: Optional[RunConfig] = None) -> str:
    """'#'-prefixed header lines, a column header, then one row per record."""
    comments, header, rows = _table(result)
    buffer = io.StringIO()
    meta = _meta(config)
    buffer.write(f"# {meta['tool']} {meta['version']}\n")
    if meta["config_sha256"]:
        buffer.write(f"# config_sha256: {meta['config_sha256']}\n")
    for line in comments:
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buffer.getvalue()


def write_report(result: Result, path: Optional[Union[str, Path]] = None, format: str = "json",
                 config: Optional[RunConfig] = None) -> str:
    """Serialize result; written to path when given, returned either way."""
    if format == "json":
        text = to_json(result, config)
    elif format == "csv":
        text = to_csv(result, config)
    else:
        raise ConfigurationError(f"unknown report format '{format}'", field="format")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {format} report to {path}")
    return text
