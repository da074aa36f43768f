"""Confidence indicator: fraction of shrinking windows whose fits qualify.

For an endpoint t2, a family of nested windows (all ending at t2, lengths
shrinking from max_len to min_len in fixed steps) is calibrated and
filtered; the positive (negative) indicator is the fraction of windows
with a qualifying B<0 (B>0) fit. The denominator is always the scheme's
window count: failed fits count as unqualified, they never shrink it.
Only data at indices <= t2 is touched, so the indicator is causal.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .calibrate import SearchConfig, Window, fit
from .errors import FitFailedError, InsufficientHistoryError, ValidationError
from .qualify import BubbleSign, FilterConfig, QualificationReport, qualify
from .series import PriceSeries

__all__ = [
    "WindowScheme",
    "WindowOutcome",
    "IndicatorPoint",
    "windows_for",
    "window_seed",
    "confidence_at",
    "scan",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowScheme:
    """Nested window lengths: max_len, max_len-step, ..., min_len."""

    max_len: int = 650
    min_len: int = 30
    step: int = 5

    def __post_init__(self):
        if self.min_len < 8:
            raise ValidationError(f"min_len must be >= 8, got {self.min_len}")
        if self.step < 1:
            raise ValidationError(f"step must be >= 1, got {self.step}")
        if self.max_len < self.min_len:
            raise ValidationError("max_len must be >= min_len")
        if (self.max_len - self.min_len) % self.step != 0:
            raise ValidationError(
                f"window range {self.max_len}..{self.min_len} not divisible by step {self.step}"
            )

    @property
    def count(self) -> int:
        return (self.max_len - self.min_len) // self.step + 1

    def lengths(self) -> range:
        return range(self.max_len, self.min_len - 1, -self.step)


@dataclass(frozen=True)
class WindowOutcome:
    """Per-window diagnostic retained by confidence_at on request."""

    window: Window
    qualified: bool
    sign: BubbleSign
    cost: float
    report: QualificationReport | None
    error: str | None


@dataclass(frozen=True)
class IndicatorPoint:
    """Confidence indicator at one endpoint, counts kept exact."""

    t2: int
    windows_total: int
    windows_qualified_pos: int
    windows_qualified_neg: int
    diagnostics: tuple[WindowOutcome, ...] | None = None

    @property
    def positive_ci(self) -> float:
        return self.windows_qualified_pos / self.windows_total

    @property
    def negative_ci(self) -> float:
        return self.windows_qualified_neg / self.windows_total

    @property
    def positive_ci_fraction(self) -> Fraction:
        return Fraction(self.windows_qualified_pos, self.windows_total)

    @property
    def negative_ci_fraction(self) -> Fraction:
        return Fraction(self.windows_qualified_neg, self.windows_total)


def windows_for(t2: int, scheme: WindowScheme = WindowScheme()) -> list[Window]:
    """All scheme windows ending at t2, longest first."""
    t2 = int(t2)
    if t2 - (scheme.max_len - 1) < 0:
        raise InsufficientHistoryError(
            f"endpoint {t2} needs {scheme.max_len} points of history"
        )
    return [Window(t2 - length + 1, t2) for length in scheme.lengths()]


def window_seed(base_seed: int, t2: int, length: int) -> int:
    """Stable per-window seed; identical across runs, platforms and workers."""
    ss = np.random.SeedSequence(entropy=[int(base_seed), int(t2), int(length)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _window_task(args) -> WindowOutcome:
    series, window, search_cfg, filter_cfg, keep = args
    try:
        result = fit(series, window, search_cfg)
    except FitFailedError as exc:
        return WindowOutcome(
            window=window, qualified=False, sign=BubbleSign.INDETERMINATE,
            cost=float("inf"), report=None, error=str(exc),
        )
    report = qualify(result, series, window, filter_cfg)
    return WindowOutcome(
        window=window, qualified=report.qualified, sign=report.sign,
        cost=result.cost, report=report if keep else None, error=None,
    )


def _run_tasks(tasks, workers):
    if workers is not None and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_window_task, tasks))
    return [_window_task(t) for t in tasks]


def _point_from_outcomes(t2, outcomes, total, keep_diagnostics) -> IndicatorPoint:
    pos = sum(1 for o in outcomes if o.qualified and o.sign is BubbleSign.POSITIVE)
    neg = sum(1 for o in outcomes if o.qualified and o.sign is BubbleSign.NEGATIVE)
    return IndicatorPoint(
        t2=t2,
        windows_total=total,
        windows_qualified_pos=pos,
        windows_qualified_neg=neg,
        diagnostics=tuple(outcomes) if keep_diagnostics else None,
    )


def confidence_at(
    series: PriceSeries,
    t2: int,
    scheme: WindowScheme = WindowScheme(),
    search_cfg: SearchConfig = SearchConfig(),
    filter_cfg: FilterConfig = FilterConfig(),
    base_seed: int = 0,
    workers: int | None = None,
    keep_diagnostics: bool = False,
) -> IndicatorPoint:
    """Indicator at one endpoint: fit and qualify every scheme window.

    Each window gets a seed derived from (base_seed, t2, length), so the
    value is reproducible and independent of execution order or worker
    count, and identical on the series truncated at t2.
    """
    t2 = int(t2)
    if t2 >= len(series):
        raise ValidationError(f"endpoint {t2} outside series of length {len(series)}")
    tasks = [
        (series, w, search_cfg.with_seed(window_seed(base_seed, t2, w.length)), filter_cfg, keep_diagnostics)
        for w in windows_for(t2, scheme)
    ]
    outcomes = _run_tasks(tasks, workers)
    return _point_from_outcomes(t2, outcomes, scheme.count, keep_diagnostics)


def scan(
    series: PriceSeries,
    t2_first: int,
    t2_last: int,
    t2_step: int = 1,
    scheme: WindowScheme = WindowScheme(),
    search_cfg: SearchConfig = SearchConfig(),
    filter_cfg: FilterConfig = FilterConfig(),
    base_seed: int = 0,
    workers: int | None = None,
) -> list[IndicatorPoint]:
    """Indicator points for endpoints t2_first, t2_first+t2_step, ..., t2_last.

    Endpoints without max_len points of history are skipped (and logged),
    keeping every reported fraction on the same denominator. Window fits
    across the whole scan may run in parallel; results are ordered by t2
    and equal to a sequential run.
    """
    t2_first, t2_last, t2_step = int(t2_first), int(t2_last), int(t2_step)
    if t2_step < 1:
        raise ValidationError(f"t2_step must be >= 1, got {t2_step}")
    if t2_last < t2_first:
        raise ValidationError(f"empty scan range [{t2_first}, {t2_last}]")
    if t2_last >= len(series):
        raise ValidationError(
            f"scan end {t2_last} outside series of length {len(series)}"
        )

    endpoints = []
    for t2 in range(t2_first, t2_last + 1, t2_step):
        if t2 - (scheme.max_len - 1) < 0:
            log.warning("skipping endpoint %d: fewer than %d points of history", t2, scheme.max_len)
            continue
        endpoints.append(t2)

    tasks = []
    owners = []
    for t2 in endpoints:
        for w in windows_for(t2, scheme):
            tasks.append(
                (series, w, search_cfg.with_seed(window_seed(base_seed, t2, w.length)), filter_cfg, False)
            )
            owners.append(t2)
    results = _run_tasks(tasks, workers)

    by_endpoint: dict[int, list[WindowOutcome]] = {t2: [] for t2 in endpoints}
    for t2, outcome in zip(owners, results):
        by_endpoint[t2].append(outcome)
    return [
        _point_from_outcomes(t2, by_endpoint[t2], scheme.count, False)
        for t2 in endpoints
    ]
