"""
Command-line entry point.

    python -m angular_lab.cli [-v] <command> [options]

Exit codes: 0 success or passing verdict, 1 failing verdict, 2 configuration
error, 3 numerical non-convergence.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from angular_lab.config import get_settings
from angular_lab.errors import AngularLabError, ConfigurationError, NonConvergenceError
from angular_lab.models.indices import IndexTuple
from angular_lab.models.reports import NormReport, RunConfig, TestFamily
from angular_lab.models.verdicts import ScanAxis
from angular_lab.services import admissibility, kernels, nse_picard, probe, singular_integrals
from angular_lab.services.grids_norms import build_radial_grid, build_sphere_grid, converged_mixed_norm
from angular_lab.services.reports import write_report

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DATA = {
    "taylor-green": nse_picard.localized_taylor_green,
    "vortex": nse_picard.gaussian_vortex,
}


# ============ ARGUMENTS ============

def _json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _axis(text: str) -> dict:
    """field:start:stop[:steps]"""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError(f"axis must be field:start:stop[:steps], got '{text}'")
    axis = {"field": parts[0], "start": parts[1], "stop": parts[2]}
    if len(parts) == 4:
        axis["steps"] = int(parts[3])
    return axis


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="angular-lab",
                                     description="Mixed radial-angular weighted inequality lab")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    parser.add_argument("--config", type=Path, help="RunConfig JSON file; replaces the subcommand flags.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tuple", type=_json, help="IndexTuple as JSON.")
    common.add_argument("--output", "-o", help="Report path (default: stdout).")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=0)

    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("check", parents=[common], help="Decide a theorem's hypothesis system.")
    p.add_argument("--theorem", required=True, help="Checker id, e.g. mixed-sw.")

    p = sub.add_parser("scan", parents=[common], help="Verdict raster over one or two fields.")
    p.add_argument("--checker", required=True)
    p.add_argument("--axis", type=_axis, action="append", required=True, help="field:start:stop[:steps]")

    p = sub.add_parser("norm", parents=[common], help="Converged weighted mixed norm of a family member.")
    p.add_argument("--family", type=_json, default={"kind": "gaussian"})
    p.add_argument("--alpha", default="0")
    p.add_argument("--p", default="2")
    p.add_argument("--p-tilde", dest="p_tilde", default="2")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--rho-min", dest="rho_min", type=float, default=1e-4)
    p.add_argument("--rho-max", dest="rho_max", type=float, default=12.0)
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--level", type=int, default=8)

    p = sub.add_parser("singint", parents=[common], help="Angular singular integral I_ν.")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--regime", default=None, help="Run an envelope ratio scan over this regime.")
    p.add_argument("--samples", type=int, default=50)

    p = sub.add_parser("decay", parents=[common], help="Measured heat decay against the predicted rate.")
    p.add_argument("--kind", choices=["heat", "local"], default="heat")
    p.add_argument("--eta", type=int, default=0)
    p.add_argument("--times", type=_floats, default=None, help="Comma-separated times.")
    p.add_argument("--family", type=_json, default={"kind": "gaussian"})
    p.add_argument("--saturating", action="store_true")
    p.add_argument("--radii", type=_floats, default=None)

    p = sub.add_parser("probe", parents=[common], help="Inequality-ratio experiments.")
    p.add_argument("--experiment", choices=["stein-weiss", "ckn", "strauss", "dilation", "sharpness", "cap"],
                   required=True)
    p.add_argument("--family", type=_json, default={"kind": "gaussian"})
    p.add_argument("--lambdas", type=_floats, default=[0.5, 1.0, 2.0, 4.0])
    p.add_argument("--ratio", choices=["stein_weiss", "ckn"], default="stein_weiss")
    p.add_argument("--path", type=_json, default=None, help="JSON list of IndexTuples for sharpness.")
    p.add_argument("--scan-field", dest="scan_field", default="delta")
    p.add_argument("--parameters", type=_floats, default=None)
    p.add_argument("--apertures", type=_floats, default=[1.0, 0.5, 0.25])
    p.add_argument("--rho-min", dest="rho_min", type=float, default=1e-4)
    p.add_argument("--rho-max", dest="rho_max", type=float, default=12.0)
    p.add_argument("--nodes", type=int, default=96)
    p.add_argument("--level", type=int, default=None)

    p = sub.add_parser("picard", parents=[common], help="Small-data Navier–Stokes Picard iteration.")
    _datum_arguments(p)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=10)
    p.add_argument("--monitor", type=_json, default=None, help="Monitor IndexTuple as JSON.")

    p = sub.add_parser("split", parents=[common], help="Amplitude splitting of a datum.")
    _datum_arguments(p)
    p.add_argument("--p-tilde", dest="p_tilde", type=float, required=True)
    return parser


def _datum_arguments(p: argparse.ArgumentParser):
    p.add_argument("--datum", choices=sorted(DATA), default="taylor-green")
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--length", type=float, default=20.0)
    p.add_argument("--width", type=float, default=1.0)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """RunConfig from the --config file, or from the subcommand flags."""
    if args.config is not None:
        return RunConfig.model_validate_json(args.config.read_text(encoding="utf-8"))
    if args.command is None:
        raise ConfigurationError("no command given", field="command")
    skip = {"verbose", "config", "command", "tuple", "output", "format", "seed", "theorem", "checker"}
    params = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return RunConfig(command=args.command, checker=getattr(args, "theorem", None) or getattr(args, "checker", None),
                     tuple=args.tuple, params=params, output=args.output, format=args.format, seed=args.seed)


# ============ DISPATCH ============

def _require_tuple(config: RunConfig) -> IndexTuple:
    if config.tuple is None:
        raise ConfigurationError(f"'{config.command}' needs --tuple", field="tuple")
    return config.tuple


def _grids(params: dict, n: int = 3):
    return (build_radial_grid(params.get("rho_min", 1e-4), params.get("rho_max", 12.0), params.get("nodes", 64)),
            build_sphere_grid(n, params.get("level") or 8))


def _datum(params: dict):
    build = DATA[params.get("datum", "taylor-green")]
    return build(N=params.get("N", 64), length=params.get("length", 20.0),
                 amplitude=params.get("amplitude", 0.1), width=params.get("width", 1.0))


def _run_check(config: RunConfig):
    verdict = admissibility.run_checker(config.checker or "", _require_tuple(config))
    return verdict, EXIT_FAIL if verdict.overall == "fail" else EXIT_OK


def _run_scan(config: RunConfig):
    axes = [ScanAxis.model_validate(a) for a in config.params.get("axis", [])]
    return admissibility.scan_region(_require_tuple(config), axes, config.checker or ""), EXIT_OK


def _run_norm(config: RunConfig):
    params = config.params
    fam = TestFamily.model_validate(params.get("family", {"kind": "gaussian"}))
    n = params.get("n", 3)
    base_nodes, base_level = params.get("nodes", 64), params.get("level", 8)

    def factory(k: int):
        doubled = {**params, "nodes": base_nodes * 2 ** k, "level": base_level * 2 ** k}
        return probe.make_test_field(fam, *_grids(doubled, n))

    alpha, p, p_tilde = params.get("alpha", "0"), params.get("p", "2"), params.get("p_tilde", "2")
    t = IndexTuple(alpha=alpha, p=p, p_tilde=p_tilde)
    value, doublings = converged_mixed_norm(factory, t.alpha, t.p, t.p_tilde)
    return NormReport(family=fam.params() | {"kind": fam.kind}, alpha=t.alpha, p=t.p, p_tilde=t.p_tilde,
                      value=value, doublings=doublings), EXIT_OK


def _run_singint(config: RunConfig):
    params = config.params
    nu, n = params["nu"], params.get("n", 3)
    if params.get("regime"):
        return singular_integrals.envelope_ratio_scan(nu, n, params["regime"], params.get("samples", 50)), EXIT_OK
    if params.get("r") is None:
        raise ConfigurationError("singint needs --r or --regime", field="r")
    return singular_integrals.singint_report(nu, params["r"], n), EXIT_OK


def _run_decay(config: RunConfig):
    params = config.params
    t = _require_tuple(config)
    if params.get("kind", "heat") == "local":
        report = kernels.local_decay_constants(t, radii=tuple(params.get("radii") or (16.0, 32.0, 64.0)))
        return report, EXIT_FAIL if report.verdict == "fail" else EXIT_OK
    fam = TestFamily.model_validate(params.get("family", {"kind": "gaussian"}))
    n = t.require("n")[0]
    u0 = probe.make_test_field(fam, build_radial_grid(1e-3, 8.0 * fam.width, 64),
                               build_sphere_grid(n, 0 if n == 3 else 1))
    times = params.get("times") or list(np.geomspace(10.0, 1000.0, 9))
    report = kernels.verify_decay(t, params.get("eta", 0), u0, times, params.get("saturating", False))
    return report, EXIT_FAIL if report.verdict == "fail" else EXIT_OK


def _run_probe(config: RunConfig):
    params = config.params
    experiment = params["experiment"]
    fam = TestFamily.model_validate(params.get("family", {"kind": "gaussian"}))
    if experiment == "strauss":
        t = _require_tuple(config)
        field = probe.make_spectral_field(fam)
        return probe.strauss_ratio(field, t.sigma, t.p, t.p_tilde, t.n or 3, family=fam), EXIT_OK

    t = _require_tuple(config)
    n = t.n or 3
    radial, sphere = _grids({"level": 12, **params}, n)
    if experiment == "cap":
        # caps below κ = 1/2 need the finer default sphere unless a level is given
        return probe.cap_trend(t.p or 2, t.p_tilde or 6, n, params.get("apertures", [1.0, 0.5, 0.25]),
                               radial, sphere if "level" in params else None), EXIT_OK
    field = probe.make_test_field(fam, radial, sphere)
    if experiment == "stein-weiss":
        return probe.ratio_stein_weiss(field, t, family=fam), EXIT_OK
    if experiment == "ckn":
        return probe.ratio_ckn(field, t, family=fam), EXIT_OK
    if experiment == "dilation":
        return probe.dilation_scan(field, t, params.get("lambdas", [0.5, 1.0, 2.0, 4.0]),
                                   params.get("ratio", "stein_weiss")), EXIT_OK

    # sharpness
    path = [IndexTuple.model_validate(item) for item in (params.get("path") or [t.model_dump(exclude_none=True)])]
    ladder = params.get("parameters")
    if not ladder:
        raise ConfigurationError("sharpness needs --parameters", field="parameters")
    scan_field = params.get("scan_field", "delta")
    template = fam.model_dump(exclude_none=True)

    def family(x: float) -> TestFamily:
        return TestFamily.model_validate({**template, scan_field: x})

    kind = "ckn" if params.get("ratio") == "ckn" else "stein_weiss"
    return probe.sharpness_scan(path, family, ladder, radial, sphere, kind), EXIT_OK


def _run_picard(config: RunConfig):
    params = config.params
    monitor = IndexTuple.model_validate(params["monitor"]) if params.get("monitor") else None
    trace = nse_picard.picard_iterate(_datum(params), params.get("T", 1.0), params.get("steps", 20),
                                      params.get("max_iter", 10), monitor=monitor)
    if trace.stop_reason == "diverged":
        raise NonConvergenceError(f"Picard iteration diverged after {len(trace.diff_norms) + 1} iterates")
    if monitor is not None and config.format == "json":
        return [trace, nse_picard.monitor_norms(trace, monitor)], EXIT_OK
    return trace, EXIT_OK


def _run_split(config: RunConfig):
    params = config.params
    return nse_picard.calderon_split(_datum(params), params["p_tilde"]), EXIT_OK


COMMANDS = {
    "check": _run_check,
    "scan": _run_scan,
    "norm": _run_norm,
    "singint": _run_singint,
    "decay": _run_decay,
    "probe": _run_probe,
    "picard": _run_picard,
    "split": _run_split,
}


def dispatch(config: RunConfig):
    """(result, exit code) for a validated run configuration."""
    logger.info(f"Running {config.command} (checker={config.checker})")
    return COMMANDS[config.command](config)


def _print_validation(e: ValidationError):
    for err in e.errors():
        location = ".".join(str(part) for part in err["loc"]) or "config"
        print(f"error: {location}: {err['msg']}", file=sys.stderr)


def run(argv: Optional[list[str]] = None) -> int:
    """Parse argv, dispatch, write the report; returns the exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    logger.debug(f"Settings: {get_settings().model_dump()}")

    try:
        config = config_from_args(args)
        result, code = dispatch(config)
        text = write_report(result, config.output, config.format, config)
    except ValidationError as e:
        _print_validation(e)
        return EXIT_CONFIG
    except AngularLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    if config.output is None:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(run())
