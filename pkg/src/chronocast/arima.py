"""ARIMA(p, d, q) baseline fit by conditional sum of squares.

Residuals before ``max(p, q)`` are fixed at zero. The MA recursion is run as
an IIR filter, so both the residuals and their Jacobian cost one ``lfilter``
call per parameter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ChronocastError, ConvergenceError, DomainError, SelectionError


@dataclass(frozen=True, order=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise DomainError(f"orders must be non-negative: {self}")
        if self.p + self.q < 1:
            raise DomainError(f"p + q must be >= 1: {self}")
        if self.d not in (0, 1, 2):
            raise DomainError(f"d must be 0, 1 or 2: {self}")

    @property
    def n_params(self):
        return self.p + self.q + 1


@dataclass
class ArimaModel:
    order: ArimaOrder
    intercept: float
    ar: np.ndarray
    ma: np.ndarray
    sigma2: float
    ssr: float
    aic: float
    n_obs: int
    iterations: int = 0
    objective_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "order": {"p": self.order.p, "d": self.order.d, "q": self.order.q},
            "intercept": float(self.intercept),
            "ar": [float(v) for v in self.ar],
            "ma": [float(v) for v in self.ma],
            "sigma2": float(self.sigma2),
            "ssr": float(self.ssr),
            "aic": float(self.aic),
            "n_obs": int(self.n_obs),
            "iterations": int(self.iterations),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArimaModel":
        o = d["order"]
        return cls(ArimaOrder(o["p"], o["d"], o["q"]), d["intercept"], np.array(d["ar"], float),
                   np.array(d["ma"], float), d["sigma2"], d["ssr"], d["aic"], d["n_obs"], d.get("iterations", 0))


def difference(series, d: int):
    series = np.asarray(series, dtype=float)
    if len(series) <= d:
        raise DomainError(f"series of length {len(series)} too short for d={d}")
    return np.diff(series, n=d) if d else series.copy()


def undifference(forecast: float, history, d: int) -> float:
    """Invert d-fold differencing for the value following ``history``."""
    if d == 0:
        return float(forecast)
    history = np.asarray(history, dtype=float)
    if len(history) < d:
        raise DomainError(f"need {d} history values to undifference, got {len(history)}")
    # y_n = forecast - sum_{k=1..d} C(d,k) (-1)^k y_{n-k}
    total = float(forecast)
    for k in range(1, d + 1):
        total -= math.comb(d, k) * (-1) ** k * history[-k]
    return total


def _residuals(w, order, theta):
    """Conditional residuals e_t for t >= m (zeros before)."""
    p, q = order.p, order.q
    m = max(p, q)
    c, phi, ma = theta[0], theta[1:1 + p], theta[1 + p:]
    u = np.zeros(len(w))
    u[m:] = w[m:] - c
    for i in range(1, p + 1):
        u[m:] -= phi[i - 1] * w[m - i:len(w) - i]
    if q == 0:
        return u
    e = np.zeros(len(w))
    e[m:] = lfilter([1.0], np.r_[1.0, ma], u[m:])
    return e


def _jacobian(w, order, theta, e):
    p, q = order.p, order.q
    m = max(p, q)
    n = len(w)
    cols = [np.full(n - m, -1.0)]
    for i in range(1, p + 1):
        cols.append(-w[m - i:n - i])
    for j in range(1, q + 1):
        shifted = np.zeros(n - m)
        shifted[j:] = e[m:n - j]
        cols.append(-shifted)
    J = np.column_stack(cols)
    if q:
        J = lfilter([1.0], np.r_[1.0, theta[1 + p:]], J, axis=0)
    return J


def _ssr(e, m):
    with np.errstate(all="ignore"):
        val = float(e[m:] @ e[m:])
    return val if np.isfinite(val) else math.inf


def _package(order, theta, ssr, n_eff, iterations=0, trace=None):
    sigma2 = ssr / n_eff
    aic = n_eff * math.log(max(sigma2, 1e-300)) + 2 * order.n_params
    return ArimaModel(order, float(theta[0]), np.array(theta[1:1 + order.p]), np.array(theta[1 + order.p:]),
                      sigma2, ssr, aic, n_eff, iterations, list(trace or []))


def fit_css(series, order: ArimaOrder, method: str = "auto", max_iter: int = 200, tol: float = 1e-12) -> ArimaModel:
    """Minimise the conditional sum of squares.

    ``method`` is ``"ols"`` (closed form, pure AR only), ``"lm"`` (damped
    Gauss-Newton from a zero start) or ``"auto"`` (ols when q == 0).
    """
    w = difference(series, order.d)
    m = max(order.p, order.q)
    n_eff = len(w) - m
    if len(w) < 10 * order.n_params:
        raise DomainError(f"need at least {10 * order.n_params} differenced points for {order}, got {len(w)}")
    if method == "auto":
        method = "ols" if order.q == 0 else "lm"

    if method == "ols":
        if order.q:
            raise DomainError("closed-form fit only applies to pure AR orders")
        X = np.column_stack([np.ones(n_eff)] + [w[m - i:len(w) - i] for i in range(1, order.p + 1)])
        theta, *_ = np.linalg.lstsq(X, w[m:], rcond=None)
        ssr = _ssr(_residuals(w, order, theta), m)
        return _package(order, theta, ssr, n_eff, 0, [ssr])
    if method != "lm":
        raise DomainError(f"unknown fit method {method!r}")

    theta = np.zeros(order.n_params)
    e = _residuals(w, order, theta)
    ssr = _ssr(e, m)
    trace = [ssr]
    lam = 1e-3
    for it in range(1, max_iter + 1):
        J = _jacobian(w, order, theta, e)
        r = e[m:]
        A = J.T @ J
        g = J.T @ r
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        improved = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            cand = theta + step
            with np.errstate(all="ignore"):
                e_new = _residuals(w, order, cand)
            ssr_new = _ssr(e_new, m)
            if ssr_new <= ssr:
                improved = True
                break
            lam *= 10
        if not improved:
            return _package(order, theta, ssr, n_eff, it, trace)
        decrease = ssr - ssr_new
        theta, e, ssr = cand, e_new, ssr_new
        trace.append(ssr)
        lam = max(lam / 10, 1e-12)
        small_step = np.max(np.abs(step)) <= 1e-10 * (1 + np.max(np.abs(theta)))
        if ssr == 0.0 or small_step or decrease <= tol * ssr:
            return _package(order, theta, ssr, n_eff, it, trace)
    raise ConvergenceError(f"CSS fit of {order} did not converge in {max_iter} iterations",
                           best=_package(order, theta, ssr, n_eff, max_iter, trace))


def one_step_predictions(model: ArimaModel, series):
    """In-sample one-step-ahead forecasts for every index of ``series`` (actuals fed forward).

    Entry s is only meaningful once ``s >= d + max(p, q)``; earlier entries are NaN.
    """
    series = np.asarray(series, dtype=float)
    order = model.order
    w = difference(series, order.d)
    theta = np.r_[model.intercept, model.ar, model.ma]
    e = _residuals(w, order, theta)
    out = np.full(len(series), np.nan)
    start = order.d + max(order.p, order.q)
    # y_hat_s = y_s - e_{s-d}: the residual is exactly actual minus forecast
    out[start:] = series[start:] - e[start - order.d:]
    return out


def forecast_one_step(model: ArimaModel, history) -> float:
    """Forecast the value following ``history`` on the original scale."""
    history = np.asarray(history, dtype=float)
    order = model.order
    if len(history) < order.p + order.d or len(history) <= order.d:
        raise DomainError(f"need at least {max(order.p + order.d, order.d + 1)} history values")
    w = difference(history, order.d)
    theta = np.r_[model.intercept, model.ar, model.ma]
    e = _residuals(w, order, theta) if len(w) > max(order.p, order.q) else np.zeros(len(w))
    n = len(w)
    w_hat = model.intercept
    for i in range(1, order.p + 1):
        w_hat += model.ar[i - 1] * w[n - i]
    for j in range(1, order.q + 1):
        if n - j >= 0:
            w_hat += model.ma[j - 1] * e[n - j]
    return undifference(w_hat, history, order.d)


DEFAULT_GRID = tuple(ArimaOrder(p, d, q) for p, d, q in itertools.product((0, 1, 2), (0, 1), (0, 1, 2)) if p + q)


def select_order(series, grid=DEFAULT_GRID):
    """Pick the AIC-minimal order; ties go to smaller p + q, then smaller d.

    Returns ``(order, model, table)`` where ``table`` maps each order to its AIC
    (None when the fit failed).
    """
    grid = list(grid)
    if not grid:
        raise SelectionError("empty order grid")
    table = {}
    best = None
    for order in grid:
        try:
            model = fit_css(series, order)
        except (ChronocastError, np.linalg.LinAlgError, FloatingPointError):
            table[order] = None
            continue
        if not np.isfinite(model.aic):
            table[order] = None
            continue
        table[order] = model.aic
        key = (model.aic, order.p + order.q, order.d)
        if best is None or key < best[0]:
            best = (key, model)
    if best is None:
        raise SelectionError("every ARIMA fit in the grid failed")
    return best[1].order, best[1], table
