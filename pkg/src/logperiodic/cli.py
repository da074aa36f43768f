"""Batch CLI over the pipeline: ingest, resample, synth, fit, scan, classify.

Configuration precedence is flags > config file > built-in defaults; the
config file is flat `key = value` text with keys named after RunConfig
fields. Every output embeds the resolved configuration (and seed), so a
result file is sufficient to reproduce itself.

Exit codes: 0 success, 2 usage, 3 I/O, 4 validation, 5 computation.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import fractions
import json
import os
import sys
from dataclasses import dataclass

from . import calibrate, indicator
from . import series as series_mod
from . import synth as synth_mod
from .classify import assess
from .qualify import FilterConfig
from .qualify import qualify as qualify_fit
from .errors import (
    DegenerateBasisError,
    DomainError,
    FitFailedError,
    LogPeriodicError,
    ValidationError,
)
from .model import LpplsParams

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_COMPUTE = 5

WORKERS_ENV = "LOGPERIODIC_WORKERS"


@dataclass
class RunConfig:
    """Every tunable of the pipeline, with defaults matching the reference setup."""

    input: str | None = None
    stride: int = 1
    max_window: int = 650
    min_window: int = 30
    window_step: int = 5
    m_min: float = 0.0
    m_max: float = 1.0
    omega_min: float = 1.0
    omega_max: float = 50.0
    tc_extension: float = 1.0 / 3.0
    damping_floor: float = 1.0
    population: int = 7
    max_evaluations: int = 2000
    restarts: int = 5
    filter_m_min: float = 0.01
    filter_m_max: float = 0.99
    filter_omega_min: float = 2.0
    filter_omega_max: float = 25.0
    filter_tc_extension: float = 0.2
    oscillation_threshold: float = 2.5
    oscillation_divisor: float = 2.0
    max_rel_error: float = 0.20
    lomb_alpha: float = 0.05
    ou_alpha: float = 0.05
    threshold: float | None = None  # resolved: 0.05 for stride 1, 0.02 coarser
    t2_first: int | None = None
    t2_last: int | None = None
    t2_step: int = 1
    seed: int | None = None
    output: str | None = None
    format: str | None = None
    workers: int | None = None

    def search_config(self) -> calibrate.SearchConfig:
        return calibrate.SearchConfig(
            m_min=self.m_min,
            m_max=self.m_max,
            omega_min=self.omega_min,
            omega_max=self.omega_max,
            tc_extension=self.tc_extension,
            damping_floor=self.damping_floor,
            population=self.population,
            max_evaluations=self.max_evaluations,
            restarts=self.restarts,
            seed=self.seed if self.seed is not None else 0,
        )

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            m_min=self.filter_m_min,
            m_max=self.filter_m_max,
            omega_min=self.filter_omega_min,
            omega_max=self.filter_omega_max,
            tc_extension=self.filter_tc_extension,
            oscillation_threshold=self.oscillation_threshold,
            oscillation_divisor=self.oscillation_divisor,
            max_rel_error=self.max_rel_error,
            lomb_alpha=self.lomb_alpha,
            ou_alpha=self.ou_alpha,
        )

    def scheme(self) -> indicator.WindowScheme:
        return indicator.WindowScheme(self.max_window, self.min_window, self.window_step)

    def resolved_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return 0.05 if self.stride == 1 else 0.02

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        env = os.environ.get(WORKERS_ENV)
        if env:
            return int(env)
        return os.cpu_count() or 1


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_INT_FIELDS = {
    "stride", "max_window", "min_window", "window_step", "population",
    "max_evaluations", "restarts", "t2_first", "t2_last", "t2_step",
    "seed", "workers",
}
_STR_FIELDS = {"input", "output", "format"}


def _coerce_field(name: str, raw: str):
    if name in _STR_FIELDS:
        return raw
    if name in _INT_FIELDS:
        return int(raw)
    return float(raw)


def load_config_file(path: str) -> dict:
    """Flat `key = value` file, # comments allowed; keys are RunConfig fields."""
    values = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path} line {line_no}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ValidationError(f"{path} line {line_no}: unknown config key {key!r}")
            values[key] = _coerce_field(key, raw.strip())
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            setattr(cfg, key, value)
    for name in _FIELD_TYPES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def config_dict(cfg: RunConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["threshold"] = cfg.resolved_threshold()
    out["seed"] = cfg.seed if cfg.seed is not None else 0
    out["workers"] = cfg.resolved_workers()
    return out


def _json_default(obj):
    if isinstance(obj, fractions.Fraction):
        return {"numerator": obj.numerator, "denominator": obj.denominator, "value": float(obj)}
    if isinstance(obj, _dt.date):
        return obj.isoformat()
    if hasattr(obj, "value") and isinstance(obj, object) and obj.__class__.__module__.startswith("logperiodic"):
        return obj.value  # enums
    return str(obj)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, default=_json_default, sort_keys=True, indent=2) + "\n"


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _read_series(cfg: RunConfig) -> series_mod.PriceSeries:
    if not cfg.input:
        raise ValidationError("an input CSV is required (--input)")
    with open(cfg.input, encoding="utf-8") as handle:
        text = handle.read()
    loaded = series_mod.ingest(text)
    if cfg.stride > 1:
        loaded = series_mod.resample(loaded, cfg.stride)
    return loaded


def _csv_with_config(cfg: RunConfig, body: str) -> str:
    header = "# config: " + json.dumps(config_dict(cfg), default=_json_default, sort_keys=True)
    return header + "\n" + body


def cmd_ingest(cfg: RunConfig, args) -> int:
    loaded = _read_series(cfg)
    _write_output(_csv_with_config(cfg, series_mod.emit_csv(loaded)), cfg.output)
    return EXIT_OK


def cmd_resample(cfg: RunConfig, args) -> int:
    if cfg.stride < 2:
        raise ValidationError("resample needs --stride >= 2")
    loaded = _read_series(cfg)  # applies the stride
    _write_output(_csv_with_config(cfg, series_mod.emit_csv(loaded)), cfg.output)
    return EXIT_OK


def cmd_synth(cfg: RunConfig, args) -> int:
    params = LpplsParams(
        tc=args.tc, m=args.m, omega=args.omega,
        A=args.A, B=args.B, C1=args.C1, C2=args.C2,
    )
    spec = synth_mod.SynthSpec(
        params=params,
        n=args.n,
        noise_sigma=args.noise_sigma,
        seed=cfg.seed if cfg.seed is not None else 0,
        noise_phi=args.noise_phi,
        start_date=_dt.date.fromisoformat(args.start_date),
    )
    generated = synth_mod.generate(spec)
    _write_output(_csv_with_config(cfg, series_mod.emit_csv(generated)), cfg.output)
    return EXIT_OK


def _fit_payload(cfg, window, result, report):
    return {
        "config": config_dict(cfg),
        "window": {"t1": window.t1, "t2": window.t2, "length": window.length},
        "params": dataclasses.asdict(result.params),
        "cost": result.cost,
        "n_points": result.n_points,
        "converged": result.converged,
        "evaluations": result.evaluations,
        "qualification": {
            "m_in_range": report.m_in_range,
            "omega_in_range": report.omega_in_range,
            "tc_in_range": report.tc_in_range,
            "oscillations_ok": report.oscillations_ok,
            "rel_error_ok": report.rel_error_ok,
            "lomb_ok": report.lomb_ok,
            "ou_ok": report.ou_ok,
            "oscillation_count": report.oscillation_count,
            "max_relative_error": report.max_relative_error,
            "lomb_false_alarm": report.lomb_false_alarm,
            "ar1_coefficient": report.ar1_coefficient,
            "qualified": report.qualified,
        },
        "sign": report.sign.value,
    }


def cmd_fit(cfg: RunConfig, args) -> int:
    loaded = _read_series(cfg)
    window = calibrate.Window(args.t1, args.t2)
    window.check_within(loaded)
    result = calibrate.fit(loaded, window, cfg.search_config())
    report = qualify_fit(result, loaded, window, cfg.filter_config())
    _write_output(_dump_json(_fit_payload(cfg, window, result, report)), cfg.output)
    return EXIT_OK


def _scan_rows(loaded, points):
    rows = ["date,t2,positive_ci,negative_ci,pos_count,neg_count,total_windows"]
    for p in points:
        date = loaded.date_of(p.t2)
        rows.append(
            f"{date.isoformat() if date else ''},{p.t2},{p.positive_ci!r},{p.negative_ci!r},"
            f"{p.windows_qualified_pos},{p.windows_qualified_neg},{p.windows_total}"
        )
    return "\n".join(rows) + "\n"


def cmd_scan(cfg: RunConfig, args) -> int:
    loaded = _read_series(cfg)
    scheme = cfg.scheme()
    first = cfg.t2_first if cfg.t2_first is not None else scheme.max_len - 1
    last = cfg.t2_last if cfg.t2_last is not None else len(loaded) - 1
    points = indicator.scan(
        loaded,
        first,
        last,
        cfg.t2_step,
        scheme=scheme,
        search_cfg=cfg.search_config(),
        filter_cfg=cfg.filter_config(),
        base_seed=cfg.seed,
        workers=cfg.resolved_workers(),
    )
    if not points:
        raise FitFailedError(
            f"no endpoint in [{first}, {last}] has {scheme.max_len} points of history"
        )
    if (cfg.format or "csv") == "json":
        payload = {
            "config": config_dict(cfg),
            "points": [
                {
                    "date": loaded.date_of(p.t2),
                    "t2": p.t2,
                    "positive_ci": p.positive_ci,
                    "negative_ci": p.negative_ci,
                    "pos_count": p.windows_qualified_pos,
                    "neg_count": p.windows_qualified_neg,
                    "total_windows": p.windows_total,
                }
                for p in points
            ],
        }
        _write_output(_dump_json(payload), cfg.output)
    else:
        _write_output(_csv_with_config(cfg, _scan_rows(loaded, points)), cfg.output)
    return EXIT_OK


def read_scan_csv(text: str) -> list[indicator.IndicatorPoint]:
    """Rebuild indicator points (exact counts) from a scan CSV."""
    points = []
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValidationError("empty indicator table")
    expected = "date,t2,positive_ci,negative_ci,pos_count,neg_count,total_windows"
    if lines[0].strip() != expected:
        raise ValidationError(f"unexpected indicator table header {lines[0]!r}")
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 7:
            raise ValidationError(f"malformed indicator row {line!r}")
        points.append(
            indicator.IndicatorPoint(
                t2=int(cells[1]),
                windows_total=int(cells[6]),
                windows_qualified_pos=int(cells[4]),
                windows_qualified_neg=int(cells[5]),
            )
        )
    return points


def _resolve_review_bound(loaded, raw: str, is_start: bool) -> int:
    """A review bound is an index or an ISO date (bracketed to trading days)."""
    try:
        return int(raw)
    except ValueError:
        pass
    target = _dt.date.fromisoformat(raw)
    if loaded.dates is None:
        raise ValidationError("series has no dates; use integer review bounds")
    if is_start:
        for i, d in enumerate(loaded.dates):
            if d >= target:
                return i
        raise ValidationError(f"review start {raw} is after the last observation")
    for i in range(len(loaded) - 1, -1, -1):
        if loaded.dates[i] <= target:
            return i
    raise ValidationError(f"review end {raw} is before the first observation")


def cmd_classify(cfg: RunConfig, args) -> int:
    loaded = _read_series(cfg)
    with open(args.scan_table, encoding="utf-8") as handle:
        points = read_scan_csv(handle.read())
    lo = _resolve_review_bound(loaded, args.review_first, True)
    hi = _resolve_review_bound(loaded, args.review_last, False)
    assessment = assess(
        loaded, points, (lo, hi), cfg.resolved_threshold(), sign=args.sign
    )
    payload = {
        "config": config_dict(cfg),
        "review": {"first": lo, "last": hi},
        "sign": args.sign,
        "peak_ci": assessment.peak_ci,
        "peak_ci_t2": assessment.peak_ci_t2,
        "peak_ci_date": assessment.peak_ci_date,
        "threshold": assessment.threshold,
        "crash_type": assessment.crash_type.value,
        "peak_price": assessment.peak_price,
        "peak_date": assessment.peak_date,
        "valley_price": assessment.valley_price,
        "valley_date": assessment.valley_date,
        "crash_size": assessment.crash_size,
    }
    _write_output(_dump_json(payload), cfg.output)
    return EXIT_OK


def _add_config_flags(parser: argparse.ArgumentParser, names) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    for name in names:
        flag = "--" + name.replace("_", "-")
        if name in _STR_FIELDS:
            parser.add_argument(flag, dest=name, default=None)
        elif name in _INT_FIELDS:
            parser.add_argument(flag, dest=name, type=int, default=None)
        else:
            parser.add_argument(flag, dest=name, type=float, default=None)


_SEARCH_FILTER_FIELDS = [
    "m_min", "m_max", "omega_min", "omega_max", "tc_extension", "damping_floor",
    "population", "max_evaluations", "restarts",
    "filter_m_min", "filter_m_max", "filter_omega_min", "filter_omega_max",
    "filter_tc_extension", "oscillation_threshold", "oscillation_divisor",
    "max_rel_error", "lomb_alpha", "ou_alpha",
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logperiodic",
        description="Bubble-signature detection via log-periodic power law calibration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate a date,close CSV and normalize it")
    _add_config_flags(p_ingest, ["input", "output"])
    p_ingest.set_defaults(handler=cmd_ingest)

    p_resample = sub.add_parser("resample", help="extract every stride-th point, anchored at the last")
    _add_config_flags(p_resample, ["input", "stride", "output"])
    p_resample.set_defaults(handler=cmd_resample)

    p_synth = sub.add_parser("synth", help="generate a synthetic model-driven CSV")
    _add_config_flags(p_synth, ["seed", "output"])
    p_synth.add_argument("--tc", type=float, required=True)
    p_synth.add_argument("--m", type=float, required=True)
    p_synth.add_argument("--omega", type=float, required=True)
    p_synth.add_argument("--A", type=float, required=True)
    p_synth.add_argument("--B", type=float, required=True)
    p_synth.add_argument("--C1", type=float, default=0.0)
    p_synth.add_argument("--C2", type=float, default=0.0)
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.0)
    p_synth.add_argument("--noise-phi", dest="noise_phi", type=float, default=0.0)
    p_synth.add_argument("--start-date", dest="start_date", default="2000-01-03")
    p_synth.set_defaults(handler=cmd_synth)

    p_fit = sub.add_parser("fit", help="calibrate and qualify one window")
    _add_config_flags(p_fit, ["input", "stride", "seed", "output"] + _SEARCH_FILTER_FIELDS)
    p_fit.add_argument("--t1", type=int, required=True)
    p_fit.add_argument("--t2", type=int, required=True)
    p_fit.set_defaults(handler=cmd_fit)

    p_scan = sub.add_parser("scan", help="confidence indicator over a range of endpoints")
    _add_config_flags(
        p_scan,
        ["input", "stride", "max_window", "min_window", "window_step",
         "t2_first", "t2_last", "t2_step", "output", "format", "workers"]
        + _SEARCH_FILTER_FIELDS,
    )
    p_scan.add_argument("--seed", dest="seed", type=int, required=True,
                        help="base seed; required so scans are reproducible")
    p_scan.set_defaults(handler=cmd_scan)

    p_classify = sub.add_parser("classify", help="classify a crash from a scan table")
    _add_config_flags(p_classify, ["input", "stride", "threshold", "output"])
    p_classify.add_argument("--scan-table", dest="scan_table", required=True,
                            help="CSV produced by the scan subcommand")
    p_classify.add_argument("--review-first", dest="review_first", required=True,
                            help="start of the review interval (index or YYYY-MM-DD)")
    p_classify.add_argument("--review-last", dest="review_last", required=True,
                            help="end of the review interval (index or YYYY-MM-DD)")
    p_classify.add_argument("--sign", choices=("positive", "negative"), default="positive")
    p_classify.set_defaults(handler=cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.handler(cfg, args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FitFailedError, DegenerateBasisError, LogPeriodicError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
