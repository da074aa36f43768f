"""Classify crashes as endogenous or exogenous from peak indicator values.

First replays the ten published 2020-crash rows (daily resolution,
5% threshold): indexes whose peak confidence indicator reached 5% are
endogenous (a bubble had formed internally), the rest exogenous. Then
computes crash statistics from peak/valley prices.

Run: python demos/04_classify_crash.py
"""

from logperiodic import CrashType, PriceSeries, classify, crash_stats

# (index, peak CI over the crash review period, daily data)
DAILY_PEAKS = [
    ("SP500", 0.160), ("DJIA", 0.216), ("NASDAQ", 0.120), ("FTSE", 0.008),
    ("DAX", 0.080), ("NIKKEI", 0.008), ("CSI300", 0.088), ("HSI", 0.024),
    ("BSESN", 0.064), ("BOVESPA", 0.120),
]

print("daily resolution, threshold 5%:")
for name, peak in DAILY_PEAKS:
    kind = classify(peak, 0.05)
    marker = "**" if kind is CrashType.ENDOGENOUS else "  "
    print(f"  {name:8s} peak CI {peak:5.1%}  -> {kind.value} {marker}")

print("\nsame peaks against the weekly 2% threshold:")
flips = [name for name, peak in DAILY_PEAKS
         if classify(peak, 0.05) is not classify(peak, 0.02)]
print(f"  classification flips for: {flips or 'none'}")

# Crash statistics: the S&P 500's 2020 numbers. Peak first, valley after.
prices = [3225.5, 3386.1, 3003.4, 2237.4, 2626.7]
series = PriceSeries(prices, None, stride=1)
stats = crash_stats(series, (0, 4))
print("\nS&P 500 style review interval:")
print(f"  peak  {stats.peak_price:8.1f} at index {stats.peak_index}")
print(f"  valley {stats.valley_price:7.1f} at index {stats.valley_index}")
print(f"  crash size {stats.crash_size:.1%}")
