"""Shared fixtures for the test modules (not collected by pytest)."""

import numpy as np

from chronocast.data import TimeSeriesFrame
from chronocast.models import init_params


def tiny_config(kind, seed, f=2, window=5):
    """Random small network plus one window and target for gradient checking.

    Biases are drawn away from zero so ReLU pre-activations do not sit on the kink,
    which finite differences cannot resolve.
    """
    rng = np.random.default_rng(seed)
    hidden = int(rng.integers(1, 5))
    extra = 2 if (kind != "fnn" and rng.random() < 0.25) else 0
    params = init_params(kind, f, hidden, int(rng.integers(1 << 31)), window=window, extra_dense=extra)
    for k in params:
        if k.startswith("b_"):
            params[k] = rng.uniform(-0.5, 0.5, params[k].shape)
    x = rng.uniform(0, 1, size=(window, f))
    y = float(rng.uniform(0, 1))
    return params, x, y


def hourly_frame(consumption, start="2017-01-01T00", seed=0):
    consumption = np.asarray(consumption, dtype=float)
    n = len(consumption)
    rng = np.random.default_rng(seed)
    stamps = (np.datetime64(start, "h") + np.arange(n)).astype("datetime64[s]")
    return TimeSeriesFrame(stamps, consumption, rng.uniform(5, 38, n), rng.uniform(30, 90, n),
                           rng.uniform(0, 12, n))
