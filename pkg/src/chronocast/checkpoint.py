"""JSON checkpoint envelope shared by the neural forecasters and the ARIMA baseline."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .arima import ArimaModel
from .data import ScalerParams
from .errors import CompatibilityError, SchemaError
from .models import KINDS, Forecaster
from .pipeline import scaler_digest

FORMAT_VERSION = 1
REQUIRED = ("format_version", "model_kind", "hyperparameters", "params", "scaler", "feature_registry", "seed")


def to_checkpoint(model, scaler: ScalerParams, columns, seed: int, extra: dict | None = None) -> dict:
    if isinstance(model, ArimaModel):
        kind = "arima"
        hyper = {"order": {"p": model.order.p, "d": model.order.d, "q": model.order.q}}
        params = model.to_dict()
    else:
        kind = model.kind
        hyper = model.hyperparameters()
        params = {k: np.asarray(v).tolist() for k, v in model.params.items()}
    doc = {
        "format_version": FORMAT_VERSION,
        "model_kind": kind,
        "hyperparameters": hyper,
        "params": params,
        "scaler": {"digest": scaler_digest(scaler, columns), "params": scaler.to_dict()},
        "feature_registry": list(columns),
        "seed": int(seed),
    }
    if extra:
        doc["extra"] = extra
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":")) + "\n"


def save_checkpoint(doc: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc), encoding="utf-8")


def load_checkpoint(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not a JSON checkpoint ({exc})") from None
    missing = [k for k in REQUIRED if k not in doc]
    if missing:
        raise SchemaError(f"{path}: checkpoint missing {', '.join(missing)}")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported checkpoint format {doc['format_version']}")
    if doc["model_kind"] not in KINDS + ("arima",):
        raise SchemaError(f"{path}: unknown model kind {doc['model_kind']!r}")
    return doc


def model_from_checkpoint(doc: dict):
    if doc["model_kind"] == "arima":
        return ArimaModel.from_dict(doc["params"])
    hp = doc["hyperparameters"]
    params = {k: np.array(v, dtype=float) for k, v in doc["params"].items()}
    return Forecaster(doc["model_kind"], params, hp["n_features"], hp["hidden"], hp["dropout"], hp["window"],
                      hp.get("extra_dense", 0))


def checkpoint_scaler(doc: dict) -> ScalerParams:
    return ScalerParams.from_dict(doc["scaler"]["params"])


def check_compatible(doc: dict, scaler: ScalerParams, columns) -> None:
    if list(doc["feature_registry"]) != list(columns):
        raise CompatibilityError("checkpoint feature registry does not match the prepared bundle")
    if doc["scaler"]["digest"] != scaler_digest(scaler, columns):
        raise CompatibilityError("checkpoint scaler digest does not match the prepared bundle")
