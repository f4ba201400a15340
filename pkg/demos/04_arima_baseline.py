"""
ARIMA baseline by conditional least squares
===========================================

Recover a known AR(1) coefficient, then select an order for the synthetic
consumption series by AIC.
"""

import numpy as np
from scipy.signal import lfilter

from chronocast.arima import ArimaOrder, fit_css, forecast_one_step, one_step_predictions, select_order
from chronocast.synth import generate

eps = np.random.default_rng(5).normal(size=5000)
y = lfilter([1.0], [1.0, -0.5], eps)
ar1 = fit_css(y, ArimaOrder(1, 0, 0))
print(f"AR(1) with phi = 0.5: estimate {ar1.ar[0]:.4f}, sigma^2 {ar1.sigma2:.3f}")

arma = fit_css(lfilter([1.0, 0.4], [1.0, -0.7], eps), ArimaOrder(1, 0, 1))
print(f"ARMA(1,1) with (0.7, 0.4): estimate ({arma.ar[0]:.3f}, {arma.ma[0]:.3f}) "
      f"after {arma.iterations} Levenberg-Marquardt steps")

series = generate().consumption
train, test = series[:18000], series[18000:18500]
order, model, table = select_order(train)
print(f"\nselected ARIMA{(order.p, order.d, order.q)} by AIC")
for o, aic in sorted(table.items(), key=lambda kv: np.inf if kv[1] is None else kv[1])[:5]:
    print(f"  ({o.p},{o.d},{o.q})  AIC {aic:.1f}")

preds = one_step_predictions(model, series[:18500])[18000:]
print(f"one-step RMSE on the next 500 hours: {np.sqrt(np.mean((preds - test) ** 2)):.2f} kWh")
print(f"forecast for hour 18500: {forecast_one_step(model, series[:18500]):.1f} kWh "
      f"(actual {series[18500]:.1f})")
