"""Price series ingestion and resampling.

A PriceSeries is an immutable, trading-step-indexed view of closing prices:
indices are always 0..N-1 after construction, calendar dates are optional
metadata, and all downstream time arithmetic happens in step units.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["PricePoint", "PriceSeries", "ingest", "resample", "emit_csv"]

CSV_HEADER = "date,close"


@dataclass(frozen=True)
class PricePoint:
    """One observation: trading-step index, optional date, price and log price."""

    index: int
    date: _dt.date | None
    price: float
    log_price: float


class PriceSeries:
    """Ordered positive prices at a fixed stride (1=daily, 5=weekly, 21=monthly).

    Immutable after construction; safe to share across threads/processes.
    """

    __slots__ = ("_prices", "_log_prices", "_dates", "_stride")

    def __init__(self, prices, dates=None, stride: int = 1):
        prices = np.asarray(prices, dtype=float)
        if prices.ndim != 1 or prices.size < 2:
            raise ValidationError("a price series needs at least 2 observations")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            bad = int(np.flatnonzero(~np.isfinite(prices) | (prices <= 0.0))[0])
            raise ValidationError(f"non-positive or non-finite price at index {bad}")
        if int(stride) < 1:
            raise ValidationError(f"stride must be >= 1, got {stride}")
        if dates is not None:
            dates = tuple(dates)
            if len(dates) != prices.size:
                raise ValidationError("dates and prices must have equal length")
            for a, b in zip(dates, dates[1:]):
                if b <= a:
                    raise ValidationError(f"dates not strictly increasing at {b}")
        prices.setflags(write=False)
        log_prices = np.log(prices)
        log_prices.setflags(write=False)
        object.__setattr__(self, "_prices", prices)
        object.__setattr__(self, "_log_prices", log_prices)
        object.__setattr__(self, "_dates", dates)
        object.__setattr__(self, "_stride", int(stride))

    def __setattr__(self, name, value):
        raise AttributeError("PriceSeries is immutable")

    def __reduce__(self):
        return (PriceSeries, (self._prices, self._dates, self._stride))

    def __len__(self) -> int:
        return self._prices.size

    @property
    def prices(self) -> np.ndarray:
        return self._prices

    @property
    def log_prices(self) -> np.ndarray:
        return self._log_prices

    @property
    def dates(self) -> tuple[_dt.date, ...] | None:
        return self._dates

    @property
    def stride(self) -> int:
        return self._stride

    def point(self, i: int) -> PricePoint:
        i = int(i)
        date = self._dates[i] if self._dates is not None else None
        return PricePoint(i, date, float(self._prices[i]), float(self._log_prices[i]))

    @property
    def points(self) -> tuple[PricePoint, ...]:
        return tuple(self.point(i) for i in range(len(self)))

    def date_of(self, i: int) -> _dt.date | None:
        return self._dates[int(i)] if self._dates is not None else None

    def truncate(self, last_index: int) -> "PriceSeries":
        """Series restricted to indices 0..last_index (inclusive)."""
        last_index = int(last_index)
        if not 1 <= last_index < len(self):
            raise ValidationError(f"truncation index {last_index} out of range")
        dates = self._dates[: last_index + 1] if self._dates is not None else None
        return PriceSeries(self._prices[: last_index + 1], dates, self._stride)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self._stride == other._stride
            and self._dates == other._dates
            and np.array_equal(self._prices, other._prices)
        )

    def __repr__(self) -> str:
        span = ""
        if self._dates is not None:
            span = f", {self._dates[0].isoformat()}..{self._dates[-1].isoformat()}"
        return f"PriceSeries(n={len(self)}, stride={self._stride}{span})"


def _parse_date(text: str, line_no: int) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ValidationError(f"line {line_no}: invalid date {text!r} (expected YYYY-MM-DD)") from None


def ingest(csv_text: str) -> PriceSeries:
    """Parse `date,close` CSV text into a stride-1 PriceSeries.

    One row per trading day, dates strictly increasing, prices positive.
    Rows are rejected rather than repaired; errors carry the offending
    line number (header is line 1). A trailing `index` column, as written
    by emit_csv, is accepted and ignored, as are `#` comment lines.
    """
    lines = [ln for ln in csv_text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValidationError("empty CSV input")
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header[:2] != ["date", "close"] or (len(header) == 3 and header[2] != "index") or len(header) > 3:
        raise ValidationError(f"expected header '{CSV_HEADER}', got {lines[0]!r}")
    if len(lines) == 1:
        raise ValidationError("CSV has a header but no data rows")

    dates: list[_dt.date] = []
    prices: list[float] = []
    for line_no, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) < 2:
            raise ValidationError(f"line {line_no}: expected 'date,close', got {line!r}")
        date = _parse_date(cells[0], line_no)
        try:
            price = float(cells[1])
        except ValueError:
            raise ValidationError(f"line {line_no}: non-numeric close {cells[1]!r}") from None
        if not np.isfinite(price) or price <= 0.0:
            raise ValidationError(f"line {line_no}: non-positive close {cells[1]!r}")
        if dates and date <= dates[-1]:
            raise ValidationError(
                f"line {line_no}: date {date.isoformat()} not after {dates[-1].isoformat()}"
            )
        dates.append(date)
        prices.append(price)
    return PriceSeries(prices, dates, stride=1)


def resample(series: PriceSeries, stride: int) -> PriceSeries:
    """Keep every stride-th point counting backward from the last observation.

    The final point always survives, so every scan endpoint stays aligned
    with a real observation; the result is re-indexed 0..M-1 and carries
    the requested stride. Output length is ceil(N / stride).
    """
    stride = int(stride)
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    if series.stride != 1:
        raise ValidationError(f"can only resample a stride-1 series, got stride {series.stride}")
    if stride == 1:
        return series
    n = len(series)
    keep = np.arange(n - 1, -1, -stride)[::-1]
    if keep.size < 2:
        raise ValidationError(f"stride {stride} leaves fewer than 2 of {n} points")
    dates = None
    if series.dates is not None:
        dates = tuple(series.dates[i] for i in keep)
    return PriceSeries(series.prices[keep], dates, stride=stride)


def emit_csv(series: PriceSeries) -> str:
    """Render a series in the ingestible CSV format plus an `index` column."""
    if series.dates is None:
        raise ValidationError("cannot emit CSV for a series without dates")
    rows = [CSV_HEADER + ",index"]
    for i in range(len(series)):
        rows.append(f"{series.dates[i].isoformat()},{float(series.prices[i])!r},{i}")
    return "\n".join(rows) + "\n"
