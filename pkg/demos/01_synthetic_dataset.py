"""
Synthetic hourly dataset
========================

Generate three years of hourly consumption and weather, then compare the
column statistics with the calibration targets the generator aims for.
"""

import numpy as np

from chronocast.synth import SynthConfig, generate, summarize

TARGETS = {
    "consumption": (312.5, 78.6, 150, 520),
    "temperature": (22.1, 6.4, 5, 38),
    "humidity": (65.2, 12.1, 30, 90),
    "wind_speed": (4.2, 2.1, 0, 12),
}

frame = generate(SynthConfig(seed=42))
print(f"{len(frame)} hourly rows from {frame.timestamps[0]} to {frame.timestamps[-1]}\n")

print(f"{'column':<12}{'mean':>9}{'target':>9}{'std':>8}{'target':>9}   range")
for col, s in summarize(frame).items():
    mean, std, lo, hi = TARGETS[col]
    print(f"{col:<12}{s['mean']:>9.2f}{mean:>9.1f}{s['std']:>8.2f}{std:>9.1f}   "
          f"{s['min']:.1f}-{s['max']:.1f} (limits {lo}-{hi})")

# the lag features only make sense if the series repeats daily and weekly
c = frame.consumption - frame.consumption.mean()
for lag in (1, 24, 168):
    print(f"autocorrelation at lag {lag:>3}: {np.dot(c[:-lag], c[lag:]) / np.dot(c, c):.3f}")
