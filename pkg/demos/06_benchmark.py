"""
Four-model comparison
=====================

ARIMA, FNN, GRU and LSTM trained on the same splits and scored on the same
test windows. Writes report.txt, report.json and per-model artifacts.
"""

import argparse
import time

from chronocast.benchmark import run_benchmark, write_report
from chronocast.pipeline import prepare
from chronocast.synth import generate

parser = argparse.ArgumentParser()
parser.add_argument("--epoch-cap", type=int, default=30)
parser.add_argument("--seed", type=int, default=42)
parser.add_argument("--out", default="benchmark_out")
args = parser.parse_args()

start = time.perf_counter()
report = run_benchmark(prepare(generate()), seed=args.seed, epoch_cap=args.epoch_cap)
write_report(report, args.out)
print(report.to_text())
print(f"finished in {time.perf_counter() - start:.0f} s; artifacts in {args.out}/")
