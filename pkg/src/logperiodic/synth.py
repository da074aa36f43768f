"""Synthetic price trajectories with known ground-truth parameters.

Used for parameter-recovery tests, filter calibration and end-to-end
pipeline checks: log prices are the model curve plus seeded Gaussian
noise (optionally AR(1)-correlated, matching the mean-reverting residual
assumption behind the qualification battery).
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import LpplsParams, evaluate
from .series import PriceSeries

__all__ = ["SynthSpec", "generate", "trading_dates"]

DEFAULT_START_DATE = _dt.date(2000, 1, 3)  # a Monday


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic series.

    t_range defaults to (0, n-1): unit spacing, so series indices coincide
    with model time and params.tc is directly comparable to fitted values.
    noise_sigma is the innovation standard deviation; with noise_phi > 0
    the noise is a stationary AR(1) process instead of white.
    """

    params: LpplsParams
    n: int
    noise_sigma: float = 0.0
    seed: int = 0
    t_range: tuple[float, float] | None = None
    noise_phi: float = 0.0
    start_date: _dt.date | None = DEFAULT_START_DATE

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"need n >= 2 points, got {self.n}")
        if self.noise_sigma < 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0.0 <= self.noise_phi < 1.0:
            raise ValidationError(f"noise_phi must lie in [0, 1), got {self.noise_phi}")
        t_start, t_end = self.times()
        if t_start >= t_end:
            raise ValidationError(f"empty time range ({t_start}, {t_end})")
        if t_end >= self.params.tc:
            raise ValidationError(
                f"time range must end before tc={self.params.tc}, got t_end={t_end}"
            )

    def times(self) -> tuple[float, float]:
        return self.t_range if self.t_range is not None else (0.0, float(self.n - 1))


def trading_dates(start: _dt.date, n: int) -> tuple[_dt.date, ...]:
    """n consecutive weekdays starting at (or after) `start`."""
    out = []
    day = start
    while len(out) < n:
        if day.weekday() < 5:
            out.append(day)
        day += _dt.timedelta(days=1)
    return tuple(out)


def generate(spec: SynthSpec) -> PriceSeries:
    """Deterministic series: price = exp(model log price + seeded noise)."""
    t_start, t_end = spec.times()
    t = np.linspace(t_start, t_end, spec.n)
    log_prices = evaluate(spec.params, t)
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(spec.seed)
        noise = rng.normal(0.0, spec.noise_sigma, spec.n)
        if spec.noise_phi > 0.0:
            eps = np.empty(spec.n)
            eps[0] = noise[0] / np.sqrt(1.0 - spec.noise_phi**2)
            for i in range(1, spec.n):
                eps[i] = spec.noise_phi * eps[i - 1] + noise[i]
            noise = eps
        log_prices = log_prices + noise
    dates = trading_dates(spec.start_date, spec.n) if spec.start_date is not None else None
    return PriceSeries(np.exp(log_prices), dates, stride=1)
