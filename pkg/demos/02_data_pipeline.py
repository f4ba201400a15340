"""
From raw CSV to supervised windows
==================================

Round-trip the synthetic data through CSV with a few holes punched in it,
impute, engineer features, split in time order and scale with statistics
from the training rows only.
"""

import tempfile
from pathlib import Path

import numpy as np

from chronocast.data import load_csv, write_csv
from chronocast.pipeline import prepare
from chronocast.synth import SynthConfig, generate

frame = generate(SynthConfig(n_hours=24 * 120, seed=1))
holes = frame.consumption.copy()
holes[[100, 101, 102, 500]] = np.nan
frame = frame.replace(consumption=holes)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "raw.csv"
    write_csv(frame, path)
    raw = load_csv(path)
print("missing values after loading:", raw.missing_count())

data = prepare(raw)
print("feature columns:", ", ".join(data.columns))
print("feature rows:", len(data.scaled), "(the first 168 hours only feed the weekly lag)")
for name, r in data.split.items():
    print(f"  {name:<10} rows {r.start:>5}-{r.stop:<5} windows {len(data.windows(name))}")

# training rows span [0, 1]; later rows may fall outside, they are not clipped
scaled = data.scaled.column("consumption")
train = scaled[data.split.train.start:data.split.train.stop]
test = scaled[data.split.test.start:data.split.test.stop]
print(f"scaled consumption: train {train.min():.3f}..{train.max():.3f}, test {test.min():.3f}..{test.max():.3f}")

ws = data.windows("train")
print("window tensor:", ws.inputs.shape, "first target at", ws.target_timestamps[0])
