"""End-to-end data preparation and the on-disk prepared bundle."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import (
    WINDOW,
    FeatureMatrix,
    ScalerParams,
    SplitIndices,
    TimeSeriesFrame,
    apply_scale,
    engineer_features,
    fit_minmax,
    format_timestamp,
    impute_linear,
    invert_scale,
    make_windows,
    read_feature_csv,
    temporal_split,
    write_feature_csv,
)
from .errors import CompatibilityError, SchemaError

FEATURES_FILE = "features.csv"
SCALER_FILE = "scaler.json"
SPLIT_FILE = "split.json"


def scaler_digest(scaler: ScalerParams, columns) -> str:
    payload = json.dumps({"scaler": scaler.to_dict(), "columns": list(columns)}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class PreparedDataset:
    scaled: FeatureMatrix
    scaler: ScalerParams
    split: SplitIndices
    fractions: tuple = (0.70, 0.15, 0.15)
    window: int = WINDOW

    @property
    def columns(self):
        return self.scaled.columns

    @property
    def digest(self):
        return scaler_digest(self.scaler, self.columns)

    def windows(self, name: str):
        return make_windows(self.scaled, getattr(self.split, name), self.window)

    def consumption_kwh(self) -> np.ndarray:
        return invert_scale(self.scaled.column("consumption"), self.scaler, "consumption")

    def target_rows(self, name: str) -> np.ndarray:
        """Row indices (into the feature matrix) of the window targets of one split."""
        r = getattr(self.split, name)
        return np.arange(r.start + self.window, r.stop)


def prepare(frame: TimeSeriesFrame, fractions=(0.70, 0.15, 0.15), window: int = WINDOW) -> PreparedDataset:
    features = engineer_features(impute_linear(frame))
    split = temporal_split(features, fractions)
    scaler = fit_minmax(features, split.train)
    return PreparedDataset(apply_scale(features, scaler), scaler, split, tuple(fractions), window)


def save_bundle(data: PreparedDataset, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_csv(data.scaled, out / FEATURES_FILE)
    (out / SCALER_FILE).write_text(data.scaler.to_json(), encoding="utf-8")
    manifest = {
        "rows": len(data.scaled),
        **data.split.to_dict(),
        "fractions": list(data.fractions),
        "window": data.window,
        "feature_columns": list(data.columns),
        "first_timestamp": format_timestamp(data.scaled.timestamps[0]),
        "last_timestamp": format_timestamp(data.scaled.timestamps[-1]),
        "scaler_digest": data.digest,
    }
    (out / SPLIT_FILE).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def load_bundle(bundle_dir) -> PreparedDataset:
    d = Path(bundle_dir)
    for name in (FEATURES_FILE, SCALER_FILE, SPLIT_FILE):
        if not (d / name).exists():
            raise SchemaError(f"prepared bundle file missing: {d / name}")
    scaled = read_feature_csv(d / FEATURES_FILE)
    scaler = ScalerParams.from_json((d / SCALER_FILE).read_text(encoding="utf-8"))
    manifest = json.loads((d / SPLIT_FILE).read_text(encoding="utf-8"))
    if tuple(manifest["feature_columns"]) != tuple(scaled.columns) or tuple(scaler.columns) != tuple(scaled.columns):
        raise CompatibilityError("feature registry differs between features.csv, scaler.json and split.json")
    data = PreparedDataset(scaled, scaler, SplitIndices.from_dict(manifest), tuple(manifest["fractions"]),
                           manifest["window"])
    if manifest.get("scaler_digest") not in (None, data.digest):
        raise CompatibilityError("scaler.json does not match the digest recorded in split.json")
    return data
