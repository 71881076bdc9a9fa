"""Command-line front end: ``truncdep <command>``.

Commands
--------
fit        maximum-likelihood fit of (theta, vartheta) from an x,t CSV
test       fit plus the independence test (and trend report under FGM)
simulate   draw a truncated sample to CSV
mc         Monte Carlo study over one or more scenarios
alpha      print the selection probability for given parameters
tau        print Kendall's tau for given parameters

Data interchange is CSV with header ``x,t`` (UTF-8, LF, ``.`` decimal);
structured results are JSON matching the schemas under docs/schemas/.
Exit codes: 0 success, 2 input or validation error, 3 non-convergence,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

import numpy as np

from .copula import CopulaFamily, ModelParams, StudyDesign, kendall_tau
from .errors import (
    ConvergenceError,
    DataError,
    DomainError,
    TruncdepError,
)
from .estimation import FitResult, fit
from .inference import (
    TestResult,
    TrendReport,
    trend_report_fgm,
    wald_boundary_test,
    wald_interior_test_fgm,
)
from .montecarlo import McSummary, ScenarioSpec, power_curve, run_scenario
from .sampling import TruncatedSample, simulate_truncated
from .selection import alpha

__all__ = ["main"]

_FAMILY_BY_TAG = {
    "gb": CopulaFamily.GUMBEL_BARNETT,
    "fgm": CopulaFamily.FGM,
}
_TAG_BY_FAMILY = {v: k for k, v in _FAMILY_BY_TAG.items()}

_CSV_HEADER = ["x", "t"]

_MC_COLUMNS = [
    "family",
    "theta0",
    "vartheta0",
    "G",
    "s",
    "n",
    "replications",
    "seed",
    "level",
    "bias_theta",
    "bias_vartheta",
    "var_theta",
    "var_vartheta",
    "var_central_theta",
    "var_central_vartheta",
    "rejection_rate",
    "boundary_fraction",
    "failures",
    "se_bias_theta",
    "se_bias_vartheta",
    "se_var_theta",
    "se_var_vartheta",
    "se_rejection_rate",
    "se_boundary_fraction",
]

_POWER_COLUMNS = ["vartheta0", "rejection_rate", "mc_se"]


# ---------------------------------------------------------------------------
# Serialization helpers


def _jsonable(value: Any) -> Any:
    """Recursively convert to JSON-safe types; non-finite floats become null."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump_json(obj: dict, out: str | None) -> None:
    _write_text(json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n", out)


def _csv_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _dump_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], sink: TextIO) -> None:
    sink.write(",".join(header) + "\n")
    for row in rows:
        sink.write(",".join(_csv_cell(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Input parsing


def _family_from_tag(tag: str) -> CopulaFamily:
    try:
        return _FAMILY_BY_TAG[tag]
    except KeyError:
        raise DomainError(f"family must be one of {sorted(_FAMILY_BY_TAG)}, got {tag!r}")


def _read_sample(path: str, design: StudyDesign) -> TruncatedSample:
    """Parse an x,t CSV, validating every row against the observable region.

    Line numbers in error messages are 1-based physical lines with the
    header on line 1.
    """
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise DataError(
                f"{path}:1: header must be exactly 'x,t', got {header!r}"
            )
        xs: list[float] = []
        ts: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                x, t = float(row[0]), float(row[1])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
            if not (math.isfinite(x) and math.isfinite(t)):
                raise DataError(f"{path}:{lineno}: non-finite value")
            if not 0.0 < t < design.big_g:
                raise DataError(
                    f"{path}:{lineno}: t={t!r} outside (0, {design.big_g})"
                )
            if not t <= x <= t + design.s:
                raise DataError(
                    f"{path}:{lineno}: x={x!r} outside [t, t+s] = "
                    f"[{t!r}, {t + design.s!r}]"
                )
            xs.append(x)
            ts.append(t)
    if not xs:
        raise DataError(f"{path}: no observations after the header")
    return TruncatedSample.from_arrays(np.array(xs), np.array(ts), design)


def _load_scenarios(args: argparse.Namespace) -> list[ScenarioSpec]:
    if args.scenarios is not None:
        try:
            raw = json.loads(Path(args.scenarios).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read {args.scenarios}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.scenarios}: invalid JSON ({exc})") from exc
        if isinstance(raw, dict):
            raw = [raw]
        if not isinstance(raw, list) or not raw:
            raise DataError(f"{args.scenarios}: expected a scenario object or array")
        return [_scenario_from_dict(entry, i) for i, entry in enumerate(raw)]
    missing = [
        flag
        for flag, value in [
            ("--family", args.family),
            ("--theta", args.theta),
            ("--vartheta", args.vartheta),
            ("--G", args.big_g),
            ("--s", args.s),
            ("--n", args.n),
            ("--seed", args.seed),
        ]
        if value is None
    ]
    if missing:
        raise DataError(
            "single-scenario mode needs " + ", ".join(missing) + " (or --scenarios)"
        )
    return [
        ScenarioSpec(
            design=StudyDesign(big_g=args.big_g, s=args.s),
            n=args.n,
            params0=ModelParams(
                _family_from_tag(args.family), args.theta, args.vartheta
            ),
            replications=args.replications,
            seed=args.seed,
            level=args.level,
        )
    ]


def _scenario_from_dict(entry: Any, index: int) -> ScenarioSpec:
    where = f"scenario {index}"
    if not isinstance(entry, dict):
        raise DataError(f"{where}: expected an object, got {type(entry).__name__}")
    try:
        design = entry["design"]
        params0 = entry["params0"]
        spec = ScenarioSpec(
            design=StudyDesign(big_g=design["big_g"], s=design["s"]),
            n=int(entry["n"]),
            params0=ModelParams(
                _family_from_tag(params0["family"]),
                params0["theta"],
                params0["vartheta"],
            ),
            replications=int(entry["replications"]),
            seed=int(entry["seed"]),
            level=float(entry.get("level", 0.05)),
        )
    except KeyError as exc:
        raise DataError(f"{where}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: {exc}") from exc
    except DomainError as exc:
        raise DataError(f"{where}: {exc}") from exc
    return spec


# ---------------------------------------------------------------------------
# Result shaping


def _fit_payload(result: FitResult, sample: TruncatedSample) -> dict:
    params = result.params_hat
    notes = []
    if result.at_boundary:
        notes.append(
            "vartheta_hat is on the boundary: se_theta comes from the "
            "restricted information 1/I_11 and the vartheta row of cov_hat "
            "is a diagnostic, not a standard-error basis"
        )
    if not result.converged:
        notes.append("optimizer did not meet the convergence contract")
    return {
        "family": _TAG_BY_FAMILY[params.family],
        "design": {"G": sample.design.big_g, "s": sample.design.s},
        "m": sample.m,
        "theta_hat": params.theta,
        "vartheta_hat": params.vartheta,
        "n_hat": result.n_hat,
        "at_boundary": result.at_boundary,
        "log_lik": result.log_lik,
        "se_theta": result.se[0],
        "se_vartheta": result.se[1],
        "converged": result.converged,
        "iterations": result.iterations,
        "info_hat": result.info_hat,
        "cov_hat": result.cov_hat,
        "notes": notes,
    }


def _test_payload(test: TestResult, trend: TrendReport | None) -> dict:
    payload: dict[str, Any] = {
        "test": {
            "statistic": test.statistic,
            "p_value": test.p_value,
            "reject": test.reject,
            "level": test.level,
            "sigma_vartheta_hat": test.sigma_vartheta_hat,
            "boundary": test.boundary,
        },
        "trend": None,
    }
    if trend is not None:
        payload["trend"] = {
            "life_expectancy_at_mid": trend.life_expectancy_at_mid,
            "annual_change": trend.annual_change,
            "annual_change_days": trend.annual_change_days,
        }
    return payload


def _summary_row(spec: ScenarioSpec, summary: McSummary) -> list:
    return [
        _TAG_BY_FAMILY[spec.params0.family],
        spec.params0.theta,
        spec.params0.vartheta,
        spec.design.big_g,
        spec.design.s,
        spec.n,
        spec.replications,
        spec.seed,
        spec.level,
        summary.bias_theta,
        summary.bias_vartheta,
        summary.var_theta,
        summary.var_vartheta,
        summary.var_central_theta,
        summary.var_central_vartheta,
        summary.rejection_rate,
        summary.boundary_fraction,
        summary.failures,
        summary.mc_se["bias_theta"],
        summary.mc_se["bias_vartheta"],
        summary.mc_se["var_theta"],
        summary.mc_se["var_vartheta"],
        summary.mc_se["rejection_rate"],
        summary.mc_se["boundary_fraction"],
    ]


# ---------------------------------------------------------------------------
# Commands


def _cmd_fit(args: argparse.Namespace) -> int:
    design = StudyDesign(big_g=args.big_g, s=args.s)
    sample = _read_sample(args.input, design)
    result = fit(sample, _family_from_tag(args.family))
    _dump_json(_fit_payload(result, sample), args.out)
    return 0 if result.converged else 3


def _cmd_test(args: argparse.Namespace) -> int:
    design = StudyDesign(big_g=args.big_g, s=args.s)
    family = _family_from_tag(args.family)
    sample = _read_sample(args.input, design)
    result = fit(sample, family)
    if family is CopulaFamily.GUMBEL_BARNETT:
        test = wald_boundary_test(result, sample, args.level)
        trend = None
    else:
        test = wald_interior_test_fgm(result, sample, args.level)
        trend = trend_report_fgm(result, design)
    payload = {"fit": _fit_payload(result, sample)}
    payload.update(_test_payload(test, trend))
    _dump_json(payload, args.out)
    return 0 if result.converged else 3


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = ModelParams(_family_from_tag(args.family), args.theta, args.vartheta)
    design = StudyDesign(big_g=args.big_g, s=args.s)
    rng = np.random.default_rng(args.seed)
    sample = simulate_truncated(params, design, args.n, rng)
    lines = ["x,t"]
    lines.extend(
        f"{o.x_tilde!r},{o.t_tilde!r}" for o in sample.observations
    )
    _write_text("\n".join(lines) + "\n", args.out)
    print(f"M={sample.m} M/n={sample.m / args.n!r}", file=sys.stderr)
    return 0


def _cmd_mc(args: argparse.Namespace) -> int:
    scenarios = _load_scenarios(args)
    grid = None
    if args.power_grid is not None:
        if len(scenarios) != 1:
            raise DomainError("--power-grid needs exactly one base scenario")
        try:
            grid = [float(v) for v in args.power_grid.split(",")]
        except ValueError as exc:
            raise DomainError(f"--power-grid: {exc}") from exc
    rows = [
        _summary_row(spec, run_scenario(spec, threads=args.threads))
        for spec in scenarios
    ]
    curve = (
        power_curve(scenarios[0], grid, threads=args.threads)
        if grid is not None
        else None
    )
    if args.format == "json":
        payload: dict[str, Any] = {
            "scenarios": [dict(zip(_MC_COLUMNS, row)) for row in rows]
        }
        if curve is not None:
            payload["power_curve"] = [
                dict(zip(_POWER_COLUMNS, point)) for point in curve
            ]
        _dump_json(payload, args.out)
        return 0
    if args.out is None:
        _dump_csv(_MC_COLUMNS, rows, sys.stdout)
        if curve is not None:
            sys.stdout.write("\n")
            _dump_csv(_POWER_COLUMNS, curve, sys.stdout)
        return 0
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="") as sink:
        _dump_csv(_MC_COLUMNS, rows, sink)
    if curve is not None:
        curve_path = out.with_suffix(".power.csv")
        with open(curve_path, "w", encoding="utf-8", newline="") as sink:
            _dump_csv(_POWER_COLUMNS, curve, sink)
        print(f"power curve written to {curve_path}", file=sys.stderr)
    return 0


def _cmd_alpha(args: argparse.Namespace) -> int:
    params = ModelParams(_family_from_tag(args.family), args.theta, args.vartheta)
    design = StudyDesign(big_g=args.big_g, s=args.s)
    print(f"{alpha(params, design):.10g}")
    return 0


def _cmd_tau(args: argparse.Namespace) -> int:
    print(f"{kendall_tau(_family_from_tag(args.family), args.vartheta):.10g}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_design_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--G", dest="big_g", type=float, required=True,
                     help="study window length G (years)")
    sub.add_argument("--s", type=float, required=True,
                     help="follow-up length s (years)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="truncdep",
        description="Dependent double truncation: fitting, testing, simulation.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_fit = commands.add_parser("fit", help="fit (theta, vartheta) from an x,t CSV")
    p_fit.add_argument("input", help="CSV file with header x,t")
    p_fit.add_argument("--family", choices=sorted(_FAMILY_BY_TAG), required=True)
    _add_design_flags(p_fit)
    p_fit.add_argument("--out", help="write JSON here instead of stdout")
    p_fit.set_defaults(func=_cmd_fit)

    p_test = commands.add_parser(
        "test", help="fit plus the independence test for the chosen family"
    )
    p_test.add_argument("input", help="CSV file with header x,t")
    p_test.add_argument("--family", choices=sorted(_FAMILY_BY_TAG), required=True)
    _add_design_flags(p_test)
    p_test.add_argument("--level", type=float, default=0.05,
                        help="test level (default 0.05)")
    p_test.add_argument("--out", help="write JSON here instead of stdout")
    p_test.set_defaults(func=_cmd_test)

    p_sim = commands.add_parser("simulate", help="draw a truncated sample to CSV")
    p_sim.add_argument("--family", choices=sorted(_FAMILY_BY_TAG), required=True)
    p_sim.add_argument("--theta", type=float, required=True)
    p_sim.add_argument("--vartheta", type=float, required=True)
    _add_design_flags(p_sim)
    p_sim.add_argument("--n", type=int, required=True, help="latent sample size")
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out", help="write CSV here instead of stdout")
    p_sim.set_defaults(func=_cmd_simulate)

    p_mc = commands.add_parser("mc", help="Monte Carlo study over scenarios")
    p_mc.add_argument("--scenarios",
                      help="JSON file with a scenario object or array of them")
    p_mc.add_argument("--family", choices=sorted(_FAMILY_BY_TAG))
    p_mc.add_argument("--theta", type=float)
    p_mc.add_argument("--vartheta", type=float)
    p_mc.add_argument("--G", dest="big_g", type=float)
    p_mc.add_argument("--s", type=float)
    p_mc.add_argument("--n", type=int)
    p_mc.add_argument("--replications", type=int, default=200)
    p_mc.add_argument("--seed", type=int)
    p_mc.add_argument("--level", type=float, default=0.05)
    p_mc.add_argument("--threads", type=int, default=None,
                      help="worker processes (default: TRUNCDEP_THREADS or cores)")
    p_mc.add_argument("--power-grid",
                      help="comma list of vartheta0 values for a power sweep")
    p_mc.add_argument("--format", choices=["csv", "json"], default="csv")
    p_mc.add_argument("--out", help="write the summary here instead of stdout")
    p_mc.set_defaults(func=_cmd_mc)

    p_alpha = commands.add_parser("alpha", help="print the selection probability")
    p_alpha.add_argument("family", choices=sorted(_FAMILY_BY_TAG))
    p_alpha.add_argument("theta", type=float)
    p_alpha.add_argument("vartheta", type=float)
    _add_design_flags(p_alpha)
    p_alpha.set_defaults(func=_cmd_alpha)

    p_tau = commands.add_parser("tau", help="print Kendall's tau")
    p_tau.add_argument("family", choices=sorted(_FAMILY_BY_TAG))
    p_tau.add_argument("vartheta", type=float)
    p_tau.set_defaults(func=_cmd_tau)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TruncdepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
