"""
Training and evaluating the LSTM
================================

Train the LSTM on the synthetic dataset with early stopping, then score it
on the test split: metrics, confusion matrix over Low/Medium/High load and
the residual distribution.
"""

import argparse

from chronocast.benchmark import evaluate_predictions
from chronocast.pipeline import prepare
from chronocast.synth import generate
from chronocast.training import TrainConfig, train

parser = argparse.ArgumentParser()
parser.add_argument("--epochs", type=int, default=10)
parser.add_argument("--model", default="lstm", choices=["lstm", "gru", "fnn"])
args = parser.parse_args()

data = prepare(generate())
config = TrainConfig(model=args.model, max_epochs=args.epochs)
model, history = train(config, config.build(len(data.columns)), data.windows("train"), data.windows("validation"))
for epoch, tr, va in history.to_rows():
    print(f"epoch {epoch:>3}  train {tr:.6f}  validation {va:.6f}")
print(f"best epoch {history.best_epoch}, stopped by {history.stop_reason}\n")

result = evaluate_predictions(args.model, data, model.predict(data.windows("test").inputs))
for scale, metrics in (("normalized", result.metrics.normalized), ("kWh", result.metrics.original)):
    print(scale.ljust(11), "  ".join(f"{k} {v:.4f}" for k, v in metrics.items() if v is not None))

print("\nconfusion matrix (rows actual, columns predicted):")
for row in result.confusion.to_rows():
    print("  " + "".join(f"{str(v):>18}" for v in row))

res = result.residuals
print(f"\nresiduals: mean {res.mean:.2f} kWh, std {res.std:.2f}, skewness {res.skewness:.3f}")
worst = max(res.hourly, key=lambda h: h["q3"] - h["q1"])
print(f"widest hourly spread at {worst['hour']:02d}:00 (IQR {worst['q3'] - worst['q1']:.2f} kWh)")
