"""Four-model comparison on identical splits plus the evaluation artifacts it emits."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import svg
from .arima import DEFAULT_GRID, fit_css, one_step_predictions, select_order
from .checkpoint import save_checkpoint, to_checkpoint
from .data import format_timestamp, invert_scale, scale_values
from .errors import ChronocastError
from .evaluation import (
    MetricsReport,
    discretize_and_confuse,
    residual_analysis,
    tertile_edges,
)
from .pipeline import PreparedDataset
from .training import TrainConfig, train

log = logging.getLogger(__name__)

MODEL_ORDER = ("arima", "fnn", "gru", "lstm")
REPORT_FORMAT_VERSION = 1


@dataclass
class ModelResult:
    kind: str
    status: str = "ok"
    error: str | None = None
    metrics: MetricsReport | None = None
    residuals: object = None
    confusion: object = None
    timestamps: np.ndarray | None = None
    y_kwh: np.ndarray | None = None
    pred_kwh: np.ndarray | None = None
    details: dict = field(default_factory=dict)
    checkpoint: dict | None = None

    def to_dict(self):
        return {
            "model": self.kind,
            "status": self.status,
            "error": self.error,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "residuals": self.residuals.summary() if self.residuals is not None else None,
            "confusion": self.confusion.to_dict() if self.confusion is not None else None,
            "details": self.details,
        }


def bin_edges(data: PreparedDataset):
    kwh = data.consumption_kwh()
    return tertile_edges(kwh[data.split.train.start:data.split.train.stop])


def evaluate_predictions(kind, data: PreparedDataset, pred_scaled, split="test") -> ModelResult:
    """Score scaled one-step predictions against the targets of ``split``'s windows."""
    rows = data.target_rows(split)
    y_scaled = data.scaled.column("consumption")[rows]
    pred_scaled = np.asarray(pred_scaled, dtype=float)
    y_kwh = invert_scale(y_scaled, data.scaler, "consumption")
    pred_kwh = invert_scale(pred_scaled, data.scaler, "consumption")
    stamps = data.scaled.timestamps[rows]
    return ModelResult(
        kind,
        metrics=MetricsReport.compute(y_scaled, pred_scaled, y_kwh, pred_kwh),
        residuals=residual_analysis(y_kwh, pred_kwh, stamps),
        confusion=discretize_and_confuse(y_kwh, pred_kwh, bin_edges(data)),
        timestamps=stamps,
        y_kwh=y_kwh,
        pred_kwh=pred_kwh,
    )


def arima_test_predictions(model, data: PreparedDataset, split="test"):
    """Scaled one-step ARIMA forecasts for the split's window targets, feeding actuals forward."""
    preds = one_step_predictions(model, data.consumption_kwh())
    return scale_values(preds[data.target_rows(split)], data.scaler, "consumption")


def fit_arima(data: PreparedDataset, grid=DEFAULT_GRID, order=None):
    series = data.consumption_kwh()[data.split.train.start:data.split.train.stop]
    if order is not None:
        return fit_css(series, order), None
    _, model, table = select_order(series, grid)
    return model, {f"{o.p},{o.d},{o.q}": aic for o, aic in table.items()}


def run_model(kind, data: PreparedDataset, config: TrainConfig, arima_grid=DEFAULT_GRID) -> ModelResult:
    if kind == "arima":
        model, table = fit_arima(data, arima_grid)
        result = evaluate_predictions(kind, data, arima_test_predictions(model, data))
        o = model.order
        result.details = {"order": [o.p, o.d, o.q], "aic": model.aic, "aic_table": table}
        result.checkpoint = to_checkpoint(model, data.scaler, data.columns, config.seed)
        return result
    train_set, val_set, test_set = (data.windows(s) for s in ("train", "validation", "test"))
    config = replace(config, model=kind)
    net, history = train(config, config.build(len(data.columns), data.window), train_set, val_set)
    result = evaluate_predictions(kind, data, net.predict(test_set.inputs))
    result.details = {
        "hyperparameters": net.hyperparameters(),
        "epochs_run": len(history.val_loss),
        "best_epoch": history.best_epoch,
        "best_val_loss": history.best_val_loss,
        "stop_reason": history.stop_reason,
        "max_epochs": config.max_epochs,
    }
    result.checkpoint = to_checkpoint(net, data.scaler, data.columns, config.seed,
                                      {"train_config": config.to_dict()})
    return result


@dataclass
class BenchmarkReport:
    results: list
    seed: int
    epoch_cap: int | None
    dataset: dict

    @property
    def complete(self):
        return all(r.status == "ok" for r in self.results)

    def to_dict(self):
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "seed": self.seed,
            "epoch_cap": self.epoch_cap,
            "dataset": self.dataset,
            "models": [r.to_dict() for r in self.results],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self):
        header = f"{'Model':<14}{'MAE':>9}{'RMSE':>9}{'MAPE (%)':>10}{'r':>8}{'R2':>8}{'MAE kWh':>10}{'RMSE kWh':>10}"
        lines = ["Model performance on test set (MAE/RMSE normalized; MAPE on kWh scale)", header,
                 "-" * len(header)]
        for r in self.results:
            name = r.kind.upper()
            if r.kind == "arima" and "order" in r.details:
                name = "ARIMA({},{},{})".format(*r.details["order"])
            if r.status != "ok":
                lines.append(f"{name:<14}FAILED: {r.error}")
                continue
            n, o = r.metrics.normalized, r.metrics.original
            lines.append(f"{name:<14}{n['mae']:>9.4f}{n['rmse']:>9.4f}{_fmt(o['mape_percent'], 2):>10}"
                         f"{_fmt(o['pearson_r'], 3):>8}{_fmt(o['r_squared'], 3):>8}{o['mae']:>10.2f}{o['rmse']:>10.2f}")
        lines.append("")
        lines.append(f"seed {self.seed}; epoch cap {self.epoch_cap if self.epoch_cap else 'none'}; "
                     f"test windows {self.dataset.get('test_windows')}")
        return "\n".join(lines) + "\n"


def _fmt(v, digits):
    return "n/a" if v is None else f"{v:.{digits}f}"


def default_configs(seed=42, max_epochs=100):
    return {k: TrainConfig(model=k, seed=seed, max_epochs=max_epochs) for k in ("fnn", "gru", "lstm")}


def run_benchmark(data: PreparedDataset, configs=None, seed: int = 42, epoch_cap: int | None = None,
                  arima_grid=DEFAULT_GRID, models=MODEL_ORDER) -> BenchmarkReport:
    """Train or fit every model on the same splits and score it on the test windows."""
    configs = dict(configs or default_configs(seed))
    results = []
    for kind in models:
        config = configs.get(kind, TrainConfig(model=kind if kind != "arima" else "lstm", seed=seed))
        if epoch_cap is not None:
            config = replace(config, max_epochs=min(config.max_epochs, epoch_cap))
        log.info("benchmark: running %s", kind)
        try:
            results.append(run_model(kind, data, config, arima_grid))
        except (ChronocastError, np.linalg.LinAlgError, FloatingPointError) as exc:
            log.warning("benchmark: %s failed: %s", kind, exc)
            results.append(ModelResult(kind, status="failed", error=f"{type(exc).__name__}: {exc}"))
    sizes = data.split.sizes()
    dataset = {
        "rows": len(data.scaled),
        "train_rows": sizes[0],
        "validation_rows": sizes[1],
        "test_rows": sizes[2],
        "test_windows": max(sizes[2] - data.window, 0),
        "bin_edges_kwh": list(bin_edges(data)),
    }
    return BenchmarkReport(results, seed, epoch_cap, dataset)


# ---------------------------------------------------------------- artifacts

ARTIFACT_FILES = (
    "metrics.json",
    "predictions.csv",
    "confusion_matrix.csv",
    "residual_histogram.csv",
    "residual_kde.csv",
    "hourly_box.csv",
    "error_over_time.csv",
    "actual_vs_predicted.svg",
    "error_over_time.svg",
    "residual_histogram.svg",
    "error_histogram.svg",
)


def _write_csv(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_artifacts(result: ModelResult, out_dir) -> None:
    """Metrics JSON, predictions/residual CSVs, confusion matrix CSV and SVG plots for one model."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # top-level metric fields are on the kWh scale
    doc = {"model": result.kind, "n": result.metrics.n, **result.metrics.original,
           "normalized": result.metrics.normalized, "residuals": result.residuals.summary()}
    (out / "metrics.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    stamps = [format_timestamp(t) for t in result.timestamps]
    _write_csv(out / "predictions.csv", ["timestamp", "actual_kwh", "predicted_kwh"],
               [(s, repr(float(a)), repr(float(p))) for s, a, p in zip(stamps, result.y_kwh, result.pred_kwh)])
    _write_csv(out / "confusion_matrix.csv", result.confusion.to_rows()[0], result.confusion.to_rows()[1:])
    rs = result.residuals
    _write_csv(out / "residual_histogram.csv", ["bin_left", "bin_right", "count"],
               [(repr(float(a)), repr(float(b)), int(c)) for a, b, c in zip(rs.hist_edges[:-1], rs.hist_edges[1:],
                                                                            rs.hist_counts)])
    _write_csv(out / "residual_kde.csv", ["residual_kwh", "density"],
               [(repr(float(x)), repr(float(d))) for x, d in zip(rs.kde_x, rs.kde_density)])
    _write_csv(out / "hourly_box.csv",
               ["hour", "n", "q1", "median", "q3", "whisker_low", "whisker_high", "n_outliers", "outliers"],
               [(h["hour"], h["n"], repr(h["q1"]), repr(h["median"]), repr(h["q3"]), repr(h["whisker_low"]),
                 repr(h["whisker_high"]), len(h["outliers"]), " ".join(repr(v) for v in h["outliers"]))
                for h in rs.hourly])
    _write_csv(out / "error_over_time.csv", ["timestamp", "error_kwh"],
               [(s, repr(float(e))) for s, e in zip(stamps, rs.residuals)])

    week = min(168, len(result.y_kwh))
    (out / "actual_vs_predicted.svg").write_text(
        svg.line_plot([("actual", result.y_kwh[:week]), ("predicted", result.pred_kwh[:week])],
                      f"{result.kind.upper()}: actual vs predicted (first test week)", "hour", "kWh"),
        encoding="utf-8")
    (out / "error_over_time.svg").write_text(
        svg.line_plot([("error", rs.residuals)], f"{result.kind.upper()}: forecast error over time", "hour", "kWh"),
        encoding="utf-8")
    (out / "residual_histogram.svg").write_text(
        svg.histogram(rs.hist_edges, rs.hist_counts, f"{result.kind.upper()}: residuals with KDE", "residual kWh",
                      overlay=(rs.kde_x, rs.kde_density)), encoding="utf-8")
    (out / "error_histogram.svg").write_text(
        svg.histogram(rs.hist_edges, rs.hist_counts, f"{result.kind.upper()}: prediction errors", "error kWh"),
        encoding="utf-8")


def write_report(report: BenchmarkReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    for r in report.results:
        if r.status != "ok":
            continue
        write_artifacts(r, out / "report" / r.kind)
        if r.checkpoint is not None:
            save_checkpoint(r.checkpoint, out / "report" / r.kind / "checkpoint.json")


def report_schema() -> dict:
    """The JSON schema that ``BenchmarkReport.to_json`` output validates against."""
    from importlib.resources import files

    return json.loads(files("chronocast").joinpath("report_schema.json").read_text(encoding="utf-8"))
