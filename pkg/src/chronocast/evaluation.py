"""Forecast error metrics, Low/Medium/High confusion matrix and residual analysis."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import gaussian_kde

from .data import calendar_features
from .errors import DomainError, ShapeError

BIN_LABELS = ("Low", "Medium", "High")
METRIC_FIELDS = ("mae", "rmse", "mape_percent", "pearson_r", "r_squared")


def _pair(y, y_hat, min_len=1):
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.shape != y_hat.shape:
        raise ShapeError(f"length mismatch {y.size} vs {y_hat.size}")
    if y.size < min_len:
        raise DomainError(f"need at least {min_len} samples, got {y.size}")
    return y, y_hat


def mae(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def mape(y, y_hat) -> float:
    """Mean absolute percentage error, in percent."""
    y, y_hat = _pair(y, y_hat)
    if np.any(np.abs(y) <= 1e-9):
        raise DomainError("MAPE is undefined for zero targets")
    return float(100.0 * np.mean(np.abs(y - y_hat) / np.abs(y)))


def pearson_r(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat, 2)
    dy, dp = y - y.mean(), y_hat - y_hat.mean()
    sy, sp = np.sum(dy * dy), np.sum(dp * dp)
    if sy == 0 or sp == 0:
        raise DomainError("Pearson r is undefined for a constant series")
    return float(np.clip(np.sum(dy * dp) / np.sqrt(sy * sp), -1.0, 1.0))


def r_squared(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat, 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise DomainError("R^2 is undefined for constant targets")
    return float(1.0 - np.sum((y - y_hat) ** 2) / ss_tot)


def _safe(fn, y, y_hat):
    try:
        return fn(y, y_hat)
    except DomainError:
        return None


def metric_dict(y, y_hat) -> dict:
    """All five metrics; a metric undefined on this data is reported as None."""
    return {
        "mae": mae(y, y_hat),
        "rmse": rmse(y, y_hat),
        "mape_percent": _safe(mape, y, y_hat),
        "pearson_r": _safe(pearson_r, y, y_hat),
        "r_squared": _safe(r_squared, y, y_hat),
    }


@dataclass
class MetricsReport:
    normalized: dict
    original: dict
    n: int

    @classmethod
    def compute(cls, y_scaled, pred_scaled, y_kwh, pred_kwh) -> "MetricsReport":
        return cls(metric_dict(y_scaled, pred_scaled), metric_dict(y_kwh, pred_kwh), int(np.size(y_kwh)))

    def to_dict(self):
        return asdict(self)


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (actual, predicted)
    edges: tuple
    labels: tuple = BIN_LABELS

    def to_rows(self):
        rows = [["actual\\predicted", *self.labels]]
        for label, row in zip(self.labels, self.counts):
            rows.append([label, *(int(v) for v in row)])
        return rows

    def to_dict(self):
        return {"labels": list(self.labels), "edges": [float(e) for e in self.edges],
                "counts": self.counts.astype(int).tolist()}


def tertile_edges(values):
    return tuple(float(v) for v in np.quantile(np.asarray(values, dtype=float), [1 / 3, 2 / 3]))


def discretize(values, edges):
    # Low = (-inf, e1), Medium = [e1, e2), High = [e2, inf)
    return np.searchsorted(np.asarray(edges, dtype=float), np.asarray(values, dtype=float), side="right")


def discretize_and_confuse(y, y_hat, edges) -> ConfusionMatrix:
    y, y_hat = _pair(y, y_hat)
    edges = tuple(float(e) for e in edges)
    if len(edges) != 2 or not edges[0] < edges[1]:
        raise DomainError(f"need two strictly increasing edges, got {edges}")
    counts = np.zeros((3, 3), dtype=np.int64)
    np.add.at(counts, (discretize(y, edges), discretize(y_hat, edges)), 1)
    return ConfusionMatrix(counts, edges)


@dataclass
class ResidualStats:
    residuals: np.ndarray
    mean: float
    std: float
    skewness: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    kde_x: np.ndarray
    kde_density: np.ndarray
    hourly: list  # one dict per hour of day present

    def summary(self) -> dict:
        return {"mean": self.mean, "std": self.std, "skewness": self.skewness, "n": int(self.residuals.size)}


def quartiles(values):
    """Quartiles by linear interpolation on the (n + 1)p rank (Weibull rule)."""
    return tuple(float(v) for v in np.percentile(np.asarray(values, dtype=float), [25, 50, 75], method="weibull"))


def box_stats(values) -> dict:
    values = np.asarray(values, dtype=float)
    q1, med, q3 = quartiles(values)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = values[(values >= lo_fence) & (values <= hi_fence)]
    outliers = values[(values < lo_fence) | (values > hi_fence)]
    return {
        "n": int(values.size),
        "q1": q1,
        "median": med,
        "q3": q3,
        "whisker_low": float(inside.min()) if inside.size else q1,
        "whisker_high": float(inside.max()) if inside.size else q3,
        "outliers": [float(v) for v in np.sort(outliers)],
    }


def skewness(values) -> float:
    values = np.asarray(values, dtype=float)
    sd = values.std()
    if sd == 0:
        return 0.0
    return float(np.mean((values - values.mean()) ** 3) / sd**3)


def residual_analysis(y, y_hat, timestamps, bins: int = 30, kde_points: int = 200) -> ResidualStats:
    """Residuals y - y_hat with histogram, Silverman KDE and per-hour box statistics."""
    y, y_hat = _pair(y, y_hat)
    timestamps = np.asarray(timestamps)
    if len(timestamps) != y.size:
        raise ShapeError("timestamps are not aligned with the residuals")
    res = y - y_hat
    lo, hi = float(res.min()), float(res.max())
    counts, edges = np.histogram(res, bins=bins, range=(lo, hi) if hi > lo else (lo - 0.5, hi + 0.5))
    if res.size > 1 and res.std() > 0:
        kde = gaussian_kde(res, bw_method="silverman")
        bw = float(np.sqrt(kde.covariance[0, 0]))
        xs = np.linspace(lo - 3 * bw, hi + 3 * bw, kde_points)
        dens = kde(xs)
    else:
        xs = np.linspace(lo - 0.5, hi + 0.5, kde_points)
        dens = np.zeros(kde_points)
    hours = calendar_features(timestamps.astype("datetime64[s]"))[0]
    hourly = []
    for h in range(24):
        sel = res[hours == h]
        if sel.size:
            hourly.append({"hour": h, **box_stats(sel)})
    return ResidualStats(res, float(res.mean()), float(res.std()), skewness(res), edges, counts, xs, dens, hourly)
