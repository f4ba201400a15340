"""Hourly CSV ingestion, imputation, feature engineering, scaling and windowing."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    ImputationError,
    InsufficientDataError,
    ParseError,
    RegistryError,
    SchemaError,
)

CSV_HEADER = ("timestamp", "consumption_kwh", "temperature_c", "humidity_pct", "wind_speed_ms")
VALUE_COLUMNS = ("consumption", "temperature", "humidity", "wind_speed")
FEATURE_COLUMNS = (
    "consumption",
    "temperature",
    "humidity",
    "wind_speed",
    "hour_of_day",
    "day_of_week",
    "month_of_year",
    "lag_1",
    "lag_24",
    "lag_168",
)
LAGS = (1, 24, 168)
MAX_LAG = max(LAGS)
WINDOW = 24

_HOUR = np.timedelta64(1, "h")


def format_timestamp(ts) -> str:
    return str(np.datetime_as_string(np.datetime64(ts, "s"), unit="s")) + "Z"


def parse_timestamp(text: str) -> np.datetime64:
    """Parse an ISO-8601 UTC timestamp (``Z`` or ``+00:00`` suffix) to ``datetime64[s]``."""
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError("timestamp lacks a UTC designator")
    dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return np.datetime64(dt, "s")


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Hourly records; NaN marks a missing value."""

    timestamps: np.ndarray
    consumption: np.ndarray
    temperature: np.ndarray
    humidity: np.ndarray
    wind_speed: np.ndarray

    def __post_init__(self):
        n = len(self.timestamps)
        for name in VALUE_COLUMNS:
            if len(getattr(self, name)) != n:
                raise SchemaError(f"column {name!r} has length {len(getattr(self, name))}, expected {n}")
        if n > 1 and np.any(np.diff(self.timestamps) != _HOUR):
            raise SchemaError("timestamps must be strictly increasing with 1-hour spacing")

    def __len__(self):
        return len(self.timestamps)

    def column(self, name: str) -> np.ndarray:
        if name not in VALUE_COLUMNS:
            raise RegistryError(f"unknown column {name!r}")
        return getattr(self, name)

    def replace(self, **columns) -> "TimeSeriesFrame":
        values = {name: self.column(name) for name in VALUE_COLUMNS}
        values.update(columns)
        return TimeSeriesFrame(self.timestamps, **values)

    def head(self, n: int) -> "TimeSeriesFrame":
        return TimeSeriesFrame(self.timestamps[:n], *(self.column(c)[:n] for c in VALUE_COLUMNS))

    def missing_count(self) -> int:
        return int(sum(np.isnan(self.column(c)).sum() for c in VALUE_COLUMNS))


def load_csv(path) -> TimeSeriesFrame:
    """Read an hourly CSV, sort it and complete the hourly grid with missing markers."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in CSV_HEADER if c not in header]
        if missing:
            raise SchemaError(f"{path}: header missing column(s): {', '.join(missing)}")
        if tuple(header) != CSV_HEADER:
            raise SchemaError(f"{path}: header must be exactly {','.join(CSV_HEADER)}")

        stamps, rows = [], []
        for record in reader:
            line = reader.line_num
            if not record or all(not f.strip() for f in record):
                continue
            if len(record) != len(CSV_HEADER):
                raise ParseError(f"expected {len(CSV_HEADER)} fields, got {len(record)}", line)
            try:
                ts = parse_timestamp(record[0])
            except ValueError as exc:
                raise ParseError(f"bad timestamp {record[0]!r}: {exc}", line) from None
            if ts != ts.astype("datetime64[h]"):
                raise ParseError(f"timestamp {record[0]!r} is not on the hour", line)
            values = []
            for text in record[1:]:
                text = text.strip()
                if not text:
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise ParseError(f"non-numeric value {text!r}", line) from None
            stamps.append(ts)
            rows.append(values)

    if not stamps:
        raise SchemaError(f"{path}: no data rows")
    stamps = np.array(stamps, dtype="datetime64[s]")
    data = np.array(rows, dtype=float)
    order = np.argsort(stamps, kind="stable")
    stamps, data = stamps[order], data[order]
    dup = np.nonzero(np.diff(stamps) == np.timedelta64(0, "s"))[0]
    if dup.size:
        raise SchemaError(f"{path}: duplicate timestamp {format_timestamp(stamps[dup[0]])}")

    grid = np.arange(stamps[0], stamps[-1] + _HOUR, _HOUR).astype("datetime64[s]")
    full = np.full((len(grid), len(VALUE_COLUMNS)), np.nan)
    pos = ((stamps - stamps[0]) // _HOUR).astype(int)
    full[pos] = data
    return TimeSeriesFrame(grid, *full.T.copy())


def write_csv(frame: TimeSeriesFrame, path, decimals: int = 4) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [frame.column(c) for c in VALUE_COLUMNS]
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for i, ts in enumerate(frame.timestamps):
            fields = [format_timestamp(ts)]
            for col in cols:
                v = col[i]
                fields.append("" if np.isnan(v) else f"{v:.{decimals}f}")
            fh.write(",".join(fields) + "\n")


def impute_linear(frame: TimeSeriesFrame) -> TimeSeriesFrame:
    """Fill interior gaps by linear interpolation in time between the nearest observed neighbours."""
    hours = ((frame.timestamps - frame.timestamps[0]) // _HOUR).astype(float)
    filled = {}
    for name in VALUE_COLUMNS:
        col = frame.column(name)
        gaps = np.isnan(col)
        if not gaps.any():
            filled[name] = col
            continue
        if gaps[0] or gaps[-1]:
            raise ImputationError(f"column {name!r} has a leading or trailing missing value")
        out = col.copy()
        out[gaps] = np.interp(hours[gaps], hours[~gaps], col[~gaps])
        filled[name] = out
    return frame.replace(**filled)


@dataclass(frozen=True)
class FeatureMatrix:
    timestamps: np.ndarray
    values: np.ndarray
    columns: tuple = FEATURE_COLUMNS

    def __post_init__(self):
        if self.values.shape != (len(self.timestamps), len(self.columns)):
            raise SchemaError(
                f"feature values shape {self.values.shape} does not match "
                f"{len(self.timestamps)} rows x {len(self.columns)} columns"
            )

    def __len__(self):
        return len(self.timestamps)

    def index(self, column: str) -> int:
        try:
            return self.columns.index(column)
        except ValueError:
            raise RegistryError(f"unknown column {column!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def rows(self, rows: range) -> "FeatureMatrix":
        sl = slice(rows.start, rows.stop)
        return FeatureMatrix(self.timestamps[sl], self.values[sl], self.columns)


def calendar_features(timestamps: np.ndarray):
    """Return (hour_of_day, day_of_week, month_of_year); Monday is day 0."""
    hours = timestamps.astype("datetime64[h]").astype(np.int64)
    days = timestamps.astype("datetime64[D]").astype(np.int64)
    hour_of_day = hours - days * 24
    # 1970-01-01 was a Thursday
    day_of_week = (days + 3) % 7
    month_of_year = timestamps.astype("datetime64[M]").astype(np.int64) % 12 + 1
    return hour_of_day, day_of_week, month_of_year


def engineer_features(frame: TimeSeriesFrame) -> FeatureMatrix:
    """Add calendar and consumption-lag columns, dropping the first 168 rows."""
    n = len(frame)
    if n <= MAX_LAG:
        raise InsufficientDataError(f"need at least {MAX_LAG + 1} hourly rows for lag features, got {n}")
    if frame.missing_count():
        raise ImputationError("frame still contains missing values; impute before feature engineering")
    hod, dow, moy = calendar_features(frame.timestamps)
    cons = frame.consumption
    cols = [frame.column(c) for c in VALUE_COLUMNS] + [hod, dow, moy]
    values = np.column_stack([c.astype(float) for c in cols])
    lagged = [cons[MAX_LAG - k : n - k] for k in LAGS]
    values = np.column_stack([values[MAX_LAG:]] + lagged)
    return FeatureMatrix(frame.timestamps[MAX_LAG:], values, FEATURE_COLUMNS)


@dataclass(frozen=True)
class SplitIndices:
    train: range
    validation: range
    test: range

    def sizes(self):
        return len(self.train), len(self.validation), len(self.test)

    def to_dict(self):
        return {name: [r.start, r.stop] for name, r in self.items()}

    def items(self):
        return (("train", self.train), ("validation", self.validation), ("test", self.test))

    @classmethod
    def from_dict(cls, d):
        return cls(*(range(*d[name]) for name in ("train", "validation", "test")))


def temporal_split(matrix, fractions=(0.70, 0.15, 0.15)) -> SplitIndices:
    """Contiguous split: floor(train*N), floor(val*N), remainder to test."""
    n = matrix if isinstance(matrix, int) else len(matrix)
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise DomainError(f"fractions must be three positive numbers, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DomainError(f"fractions must sum to 1, got {sum(fractions)}")
    # the epsilon keeps e.g. 0.7*1000 from flooring to 699
    n_train = int(math.floor(fractions[0] * n + 1e-9))
    n_val = int(math.floor(fractions[1] * n + 1e-9))
    split = SplitIndices(range(0, n_train), range(n_train, n_train + n_val), range(n_train + n_val, n))
    if min(split.sizes()) == 0:
        raise InsufficientDataError(f"{n} rows leave an empty split: sizes {split.sizes()}")
    return split


@dataclass(frozen=True)
class ScalerParams:
    columns: tuple
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.maxs == self.mins

    def index(self, column: str) -> int:
        try:
            return self.columns.index(column)
        except ValueError:
            raise RegistryError(f"column {column!r} not in scaler registry") from None

    def to_dict(self) -> dict:
        return {c: {"min": float(lo), "max": float(hi)} for c, lo, hi in zip(self.columns, self.mins, self.maxs)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        cols = tuple(d)
        return cls(cols, np.array([d[c]["min"] for c in cols], float), np.array([d[c]["max"] for c in cols], float))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScalerParams":
        return cls.from_dict(json.loads(text))


def fit_minmax(matrix: FeatureMatrix, train_rows: range) -> ScalerParams:
    if len(train_rows) == 0:
        raise InsufficientDataError("training range is empty")
    block = matrix.values[train_rows.start : train_rows.stop]
    return ScalerParams(tuple(matrix.columns), block.min(axis=0), block.max(axis=0))


def _check_registry(columns, params: ScalerParams):
    if tuple(columns) != tuple(params.columns):
        raise RegistryError(f"matrix columns {tuple(columns)} do not match scaler registry {params.columns}")


def apply_scale(matrix: FeatureMatrix, params: ScalerParams) -> FeatureMatrix:
    """Min-max scale every column; degenerate columns map to 0 and nothing is clipped."""
    _check_registry(matrix.columns, params)
    span = params.maxs - params.mins
    safe = np.where(span == 0, 1.0, span)
    scaled = np.where(span == 0, 0.0, (matrix.values - params.mins) / safe)
    return FeatureMatrix(matrix.timestamps, scaled, matrix.columns)


def scale_values(values, params: ScalerParams, column: str):
    j = params.index(column)
    lo, hi = params.mins[j], params.maxs[j]
    if hi == lo:
        return np.zeros_like(np.asarray(values, dtype=float))
    return (np.asarray(values, dtype=float) - lo) / (hi - lo)


def invert_scale(values, params: ScalerParams, column: str):
    j = params.index(column)
    lo, hi = params.mins[j], params.maxs[j]
    return np.asarray(values, dtype=float) * (hi - lo) + lo


@dataclass(frozen=True)
class WindowSet:
    inputs: np.ndarray  # (n, window, f)
    targets: np.ndarray  # (n,)
    target_timestamps: np.ndarray
    columns: tuple = field(default=FEATURE_COLUMNS)

    def __len__(self):
        return len(self.targets)


def make_windows(matrix: FeatureMatrix, split: range, window: int = WINDOW, horizon: int = 1,
                 target: str = "consumption") -> WindowSet:
    """Sliding windows inside one split; sample i sees rows i..i+window-1 and targets row i+window+horizon-1."""
    length = len(split)
    if length <= window + horizon - 1:
        raise InsufficientDataError(f"split of {length} rows is too short for window {window}")
    block = matrix.values[split.start : split.stop]
    stamps = matrix.timestamps[split.start : split.stop]
    n = length - window - horizon + 1
    # (n, f, window) view -> (n, window, f)
    views = np.lib.stride_tricks.sliding_window_view(block[: n + window - 1], window, axis=0)
    inputs = np.ascontiguousarray(views.transpose(0, 2, 1))
    offset = window + horizon - 1
    targets = block[offset : offset + n, matrix.index(target)].copy()
    return WindowSet(inputs, targets, stamps[offset : offset + n].copy(), tuple(matrix.columns))


def write_feature_csv(matrix: FeatureMatrix, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(("timestamp",) + tuple(matrix.columns)) + "\n")
        for ts, row in zip(matrix.timestamps, matrix.values):
            fh.write(format_timestamp(ts) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def read_feature_csv(path) -> FeatureMatrix:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "timestamp":
            raise SchemaError(f"{path}: first column must be 'timestamp'")
        stamps, rows = [], []
        for record in reader:
            try:
                stamps.append(parse_timestamp(record[0]))
                rows.append([float(v) for v in record[1:]])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}: {exc}", reader.line_num) from None
    return FeatureMatrix(np.array(stamps, dtype="datetime64[s]"), np.array(rows, dtype=float).reshape(len(rows), -1),
                         tuple(header[1:]))
