"""Command-line front end: generate, prepare, train, evaluate, forecast, report.

Configuration is a flat key/value mapping. Precedence, lowest first: built-in
defaults, ``CHRONOCAST_SEED`` (seed only), ``--config FILE`` (flat JSON), flags.
Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .arima import forecast_one_step
from .benchmark import (
    arima_test_predictions,
    evaluate_predictions,
    fit_arima,
    run_benchmark,
    write_artifacts,
    write_report,
)
from .checkpoint import (
    check_compatible,
    checkpoint_scaler,
    load_checkpoint,
    model_from_checkpoint,
    save_checkpoint,
    to_checkpoint,
)
from .data import (
    MAX_LAG,
    TimeSeriesFrame,
    apply_scale,
    engineer_features,
    format_timestamp,
    impute_linear,
    invert_scale,
    load_csv,
    parse_timestamp,
    write_csv,
)
from .errors import ChronocastError, ConfigError, DataError, DomainError, NumericError
from .pipeline import load_bundle, prepare, save_bundle
from .synth import SynthConfig, generate, summarize
from .training import DEFAULT_GRID, TrainConfig, grid_search, train

log = logging.getLogger("chronocast")

DATASET_FILE = "dataset.csv"
STATS_FILE = "dataset_stats.json"

_SYNTH_DEFAULTS = SynthConfig()
_TRAIN_DEFAULTS = TrainConfig()

# key -> (default, parser)
KEYS = {
    "out": ("out", str),
    "data": (None, str),
    "seed": (42, int),
    "n_hours": (_SYNTH_DEFAULTS.n_hours, int),
    "start": (_SYNTH_DEFAULTS.start, str),
    "base_load": (_SYNTH_DEFAULTS.base_load, float),
    "daily_amplitude": (_SYNTH_DEFAULTS.daily_amplitude, float),
    "weekly_amplitude": (_SYNTH_DEFAULTS.weekly_amplitude, float),
    "annual_amplitude": (_SYNTH_DEFAULTS.annual_amplitude, float),
    "temperature_coupling": (_SYNTH_DEFAULTS.temperature_coupling, float),
    "noise_std": (_SYNTH_DEFAULTS.noise_std, float),
    "fractions": ([0.70, 0.15, 0.15], json.loads),
    "model": ("lstm", str),
    "hidden": (None, int),
    "dropout": (None, float),
    "extra_dense": (0, int),
    "batch_size": (_TRAIN_DEFAULTS.batch_size, int),
    "max_epochs": (_TRAIN_DEFAULTS.max_epochs, int),
    "patience": (_TRAIN_DEFAULTS.patience, int),
    "lr": (_TRAIN_DEFAULTS.lr, float),
    "grid": (False, bool),
    "grid_space": (DEFAULT_GRID, json.loads),
    "epoch_cap": (None, int),
    "checkpoint": (None, str),
    "at": (None, str),
    "format": ("text", str),
}

COMMANDS = ("generate", "prepare", "train", "evaluate", "forecast", "report")
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("-v", "--verbose", action="store_true")
    for key, (default, kind) in KEYS.items():
        flag = "--" + key.replace("_", "-")
        if kind is bool:
            common.add_argument(flag, dest=key, action="store_true", default=argparse.SUPPRESS)
        else:
            common.add_argument(flag, dest=key, default=argparse.SUPPRESS, metavar=key.upper(),
                                help=f"default: {default!r}")
    parser = _Parser(prog="chronocast", description="Short-term energy consumption forecasting.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _coerce(key, value):
    default, kind = KEYS[key]
    if value is None:
        return None
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key} must be true or false")
    if kind is json.loads and not isinstance(value, str):
        return value
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def resolve_config(args: argparse.Namespace, environ=os.environ) -> dict:
    cfg = {k: d for k, (d, _) in KEYS.items()}
    if environ.get("CHRONOCAST_SEED"):
        cfg["seed"] = _coerce("seed", environ["CHRONOCAST_SEED"])
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a flat JSON object")
        unknown = sorted(set(file_cfg) - set(KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update({k: _coerce(k, v) for k, v in file_cfg.items()})
    for key in KEYS:
        if key in vars(args):
            cfg[key] = _coerce(key, getattr(args, key))
    return cfg


def _out(cfg) -> Path:
    return Path(cfg["out"])


def _data_path(cfg) -> Path:
    return Path(cfg["data"]) if cfg["data"] else _out(cfg) / DATASET_FILE


def _checkpoint_path(cfg) -> Path:
    return Path(cfg["checkpoint"]) if cfg["checkpoint"] else _out(cfg) / f"checkpoint_{cfg['model']}.json"


def _synth_config(cfg) -> SynthConfig:
    return SynthConfig(**{k: cfg[k] for k in SynthConfig.field_names()})


def _train_config(cfg, kind=None) -> TrainConfig:
    kind = kind or cfg["model"]
    hidden, dropout = cfg["hidden"], cfg["dropout"]
    if kind == "fnn":
        dropout = None if not dropout else dropout
    return TrainConfig(model=kind, hidden=hidden, dropout=dropout, extra_dense=cfg["extra_dense"],
                       batch_size=cfg["batch_size"], max_epochs=cfg["max_epochs"], patience=cfg["patience"],
                       lr=cfg["lr"], seed=cfg["seed"])


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except DataError as exc:
        raise type(exc)(f"{name}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"{name}: {exc}") from exc


def cmd_generate(cfg) -> int:
    synth = _synth_config(cfg)
    frame = generate(synth)
    out = _out(cfg)
    path = Path(cfg["data"]) if cfg["data"] else out / DATASET_FILE
    _stage("generate", write_csv, frame, path)
    stats = {"config": synth.to_dict(), "rows": len(frame), "statistics": summarize(frame)}
    _stage("generate", (out / STATS_FILE).parent.mkdir, parents=True, exist_ok=True)
    (out / STATS_FILE).write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(frame)} rows to {path}")
    for col, s in stats["statistics"].items():
        print(f"  {col:<12} mean {s['mean']:8.2f}  std {s['std']:7.2f}  range {s['min']:.2f}-{s['max']:.2f}")
    return EXIT_OK


def cmd_prepare(cfg) -> int:
    frame = _stage("load", load_csv, _data_path(cfg))
    data = _stage("prepare", prepare, frame, tuple(cfg["fractions"]))
    _stage("write", save_bundle, data, _out(cfg))
    tr, va, te = data.split.sizes()
    print(f"{len(data.scaled)} feature rows; split {tr}/{va}/{te}; bundle written to {_out(cfg)}")
    return EXIT_OK


def cmd_train(cfg) -> int:
    data = _stage("load bundle", load_bundle, _out(cfg))
    kind = cfg["model"]
    out = _out(cfg)
    if kind == "arima":
        model, table = fit_arima(data)
        doc = to_checkpoint(model, data.scaler, data.columns, cfg["seed"], {"aic_table": table})
        save_checkpoint(doc, _checkpoint_path(cfg))
        o = model.order
        print(f"ARIMA({o.p},{o.d},{o.q}) intercept {model.intercept:.6g} ar {list(model.ar)} ma {list(model.ma)}")
        return EXIT_OK
    train_set, val_set = data.windows("train"), data.windows("validation")
    config = _train_config(cfg)
    if cfg["grid"]:
        config, table = grid_search(cfg["grid_space"], train_set, val_set, config)
        keys = sorted(cfg["grid_space"])
        with (out / f"grid_{kind}.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(keys + ["val_loss", "best_epoch", "status"])
            for row in table:
                w.writerow([row[k] for k in keys] + [row["val_loss"], row["best_epoch"], row["status"]])
        print(f"grid search: {len(table)} runs; best " + ", ".join(f"{k}={getattr(config, k)}" for k in keys))
    model, history = train(config, config.build(len(data.columns), data.window), train_set, val_set)
    doc = to_checkpoint(model, data.scaler, data.columns, config.seed, {"train_config": config.to_dict()})
    save_checkpoint(doc, _checkpoint_path(cfg))
    with (out / f"history_{kind}.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_loss"])
        w.writerows((e, repr(a), repr(b)) for e, a, b in history.to_rows())
    print(f"{kind}: best epoch {history.best_epoch} (val MSE {history.best_val_loss:.6g}), "
          f"stopped by {history.stop_reason}; checkpoint {_checkpoint_path(cfg)}")
    return EXIT_OK


def cmd_evaluate(cfg) -> int:
    doc = _stage("load checkpoint", load_checkpoint, _checkpoint_path(cfg))
    data = _stage("load bundle", load_bundle, _out(cfg))
    check_compatible(doc, data.scaler, data.columns)
    model = model_from_checkpoint(doc)
    kind = doc["model_kind"]
    if kind == "arima":
        pred = arima_test_predictions(model, data)
    else:
        pred = model.predict(data.windows("test").inputs)
    result = evaluate_predictions(kind, data, pred)
    target = _out(cfg) / f"eval_{kind}"
    write_artifacts(result, target)
    o = result.metrics.original
    shown = {k: "n/a" if v is None else f"{v:.4g}" for k, v in o.items()}
    print(f"{kind}: MAE {shown['mae']} kWh, RMSE {shown['rmse']} kWh, MAPE {shown['mape_percent']}%, "
          f"r {shown['pearson_r']}, R2 {shown['r_squared']}; artifacts in {target}")
    return EXIT_OK


def forecast_next(doc, frame: TimeSeriesFrame, at) -> tuple:
    """Predict the hour after ``at``; returns (timestamp, kWh, scaled)."""
    at = parse_timestamp(at) if isinstance(at, str) else np.datetime64(at, "s")
    need = MAX_LAG + 24
    hits = np.nonzero(frame.timestamps == at)[0]
    if not hits.size:
        raise DomainError(f"{format_timestamp(at)} is not in the data")
    end = int(hits[0]) + 1
    if end < need:
        raise DomainError(f"forecast at {format_timestamp(at)} needs {need} hours of history "
                          f"(lag 168 + window 24), only {end} available")
    scaler = checkpoint_scaler(doc)
    model = model_from_checkpoint(doc)
    history = impute_linear(frame.head(end))
    if doc["model_kind"] == "arima":
        kwh = forecast_one_step(model, history.consumption)
        j = scaler.index("consumption")
        scaled = (kwh - scaler.mins[j]) / (scaler.maxs[j] - scaler.mins[j])
    else:
        tail = TimeSeriesFrame(history.timestamps[end - need:],
                               *(history.column(c)[end - need:] for c in ("consumption", "temperature",
                                                                          "humidity", "wind_speed")))
        feats = apply_scale(engineer_features(tail), scaler)
        scaled = float(model.predict(feats.values[None])[0])
        kwh = float(invert_scale(scaled, scaler, "consumption"))
    return at + np.timedelta64(1, "h"), float(kwh), float(scaled)


def cmd_forecast(cfg) -> int:
    if not cfg["at"]:
        raise ConfigError("forecast needs --at TIMESTAMP")
    doc = _stage("load checkpoint", load_checkpoint, _checkpoint_path(cfg))
    frame = _stage("load", load_csv, _data_path(cfg))
    try:
        at = parse_timestamp(cfg["at"])
    except ValueError as exc:
        raise ConfigError(f"bad --at timestamp {cfg['at']!r}: {exc}") from None
    when, kwh, scaled = forecast_next(doc, frame, at)
    if cfg["format"] == "json":
        print(json.dumps({"timestamp": format_timestamp(when), "predicted_kwh": kwh, "predicted_scaled": scaled}))
    else:
        print(f"{format_timestamp(when)} predicted {kwh:.4f} kWh (scaled {scaled:.6f})")
    return EXIT_OK


def cmd_report(cfg) -> int:
    data = _stage("load bundle", load_bundle, _out(cfg))
    configs = {k: _train_config(cfg, k) for k in ("fnn", "gru", "lstm")}
    configs["fnn"] = replace(configs["fnn"], hidden=None, dropout=None)
    report = run_benchmark(data, configs, seed=cfg["seed"], epoch_cap=cfg["epoch_cap"])
    write_report(report, _out(cfg))
    sys.stdout.write(report.to_json() if cfg["format"] == "json" else report.to_text())
    return EXIT_OK if report.complete else EXIT_NUMERIC


HANDLERS = {
    "generate": cmd_generate,
    "prepare": cmd_prepare,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "forecast": cmd_forecast,
    "report": cmd_report,
}


def main(argv=None, environ=os.environ) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args, environ)
        if cfg["format"] not in ("text", "json"):
            raise ConfigError("format must be 'text' or 'json'")
        return HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DomainError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ChronocastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
