"""LSTM, GRU and feed-forward forecasters with hand-written backpropagation.

All forward passes accept either one window ``(T, f)`` or a batch ``(n, T, f)``.
The batch loss is the mean squared error over the batch, so a single window
gets ``(y_hat - y) ** 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, ShapeError
from .nn import relu, sample_dropout, sigmoid

KINDS = ("lstm", "gru", "fnn")
LSTM_GATES = ("i", "f", "g", "o_gate")
GRU_GATES = ("z", "r", "n")


def _xavier(rng, out_dim, in_dim):
    s = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-s, s, size=(out_dim, in_dim))


def init_params(kind: str, f: int, hidden: int = 50, seed: int = 0, *, window: int = 24,
                extra_dense: int = 0) -> dict:
    """Xavier-uniform weights per block; LSTM forget-gate bias 1, every other bias 0.

    For ``fnn`` ``hidden`` is the width of both ReLU layers.
    """
    if min(f, hidden, window) < 1 or extra_dense < 0:
        raise DomainError("sizes must be >= 1")
    rng = np.random.default_rng(seed)
    p = {}
    if kind == "lstm":
        for gate in LSTM_GATES:
            p[f"W_{gate}"] = _xavier(rng, hidden, f)
        for gate in LSTM_GATES:
            p[f"U_{gate}"] = _xavier(rng, hidden, hidden)
        for gate in LSTM_GATES:
            p[f"b_{gate}"] = np.ones(hidden) if gate == "f" else np.zeros(hidden)
    elif kind == "gru":
        for gate in GRU_GATES:
            p[f"W_{gate}"] = _xavier(rng, hidden, f)
        for gate in GRU_GATES:
            p[f"U_{gate}"] = _xavier(rng, hidden, hidden)
        for gate in GRU_GATES:
            p[f"b_{gate}"] = np.zeros(hidden)
    elif kind == "fnn":
        p["W_1"] = _xavier(rng, hidden, window * f)
        p["b_1"] = np.zeros(hidden)
        p["W_2"] = _xavier(rng, hidden, hidden)
        p["b_2"] = np.zeros(hidden)
    else:
        raise DomainError(f"unknown model kind {kind!r}")
    head_in = hidden
    if extra_dense and kind != "fnn":
        p["W_extra"] = _xavier(rng, extra_dense, hidden)
        p["b_extra"] = np.zeros(extra_dense)
        head_in = extra_dense
    p["W_o"] = _xavier(rng, 1, head_in)
    p["b_o"] = np.zeros(1)
    return p


def _as_batch(window, f, length):
    x = np.asarray(window, dtype=float)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[2] != f:
        raise ShapeError(f"expected windows of shape (T, {f}), got {np.shape(window)}")
    if length is not None and x.shape[1] != length:
        raise ShapeError(f"expected window length {length}, got {x.shape[1]}")
    return x, single


def _check_finite(arr, what, step=None):
    if not np.isfinite(arr.sum()):
        where = f" at step {step}" if step is not None else ""
        raise NumericError(f"non-finite {what}{where}")


def _hidden_size(params, kind):
    return params["U_i" if kind == "lstm" else "U_z"].shape[0]


# ---------------------------------------------------------------- LSTM

@dataclass
class HiddenState:
    h: np.ndarray
    c: np.ndarray | None = None


def lstm_cell_forward(x_t, state: HiddenState, params: dict) -> HiddenState:
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape[-1] != params["W_i"].shape[1]:
        raise ShapeError(f"input dim {x_t.shape[-1]} != {params['W_i'].shape[1]}")
    pre = {g: x_t @ params[f"W_{g}"].T + state.h @ params[f"U_{g}"].T + params[f"b_{g}"] for g in LSTM_GATES}
    i, f, o = sigmoid(pre["i"]), sigmoid(pre["f"]), sigmoid(pre["o_gate"])
    g = np.tanh(pre["g"])
    c = f * state.c + i * g
    return HiddenState(o * np.tanh(c), c)


def _stack(params, prefix, gates):
    return np.concatenate([params[f"{prefix}_{g}"] for g in gates], axis=0)


def _recurrent_forward(kind, x, params):
    """Unroll the recurrence over a batch; returns the final hidden state and a cache."""
    gates = LSTM_GATES if kind == "lstm" else GRU_GATES
    W = _stack(params, "W", gates)
    U = _stack(params, "U", gates)
    b = _stack(params, "b", gates)
    n, T, _ = x.shape
    H = U.shape[1]
    xw = x @ W.T + b  # (n, T, k*H)
    hs = np.zeros((T + 1, n, H))
    acts = np.empty((T, n, len(gates) * H))
    cache = {"x": x, "U": U, "hs": hs, "acts": acts}
    if kind == "lstm":
        cs = np.zeros((T + 1, n, H))
        tcs = np.empty((T, n, H))
        cache.update(cs=cs, tcs=tcs)
        for t in range(T):
            a = xw[:, t] + hs[t] @ U.T
            ifo = sigmoid(np.concatenate([a[:, :2 * H], a[:, 3 * H:]], axis=1))
            i, f, o = ifo[:, :H], ifo[:, H:2 * H], ifo[:, 2 * H:]
            g = np.tanh(a[:, 2 * H:3 * H])
            cs[t + 1] = f * cs[t] + i * g
            tcs[t] = np.tanh(cs[t + 1])
            hs[t + 1] = o * tcs[t]
            acts[t, :, :H], acts[t, :, H:2 * H], acts[t, :, 2 * H:3 * H], acts[t, :, 3 * H:] = i, f, g, o
            _check_finite(cs[t + 1], "LSTM cell state", t)
    else:
        Uzr, Un = U[:2 * H], U[2 * H:]
        rhs = np.empty((T, n, H))
        cache["rhs"] = rhs
        for t in range(T):
            h = hs[t]
            zr = sigmoid(xw[:, t, :2 * H] + h @ Uzr.T)
            z, r = zr[:, :H], zr[:, H:]
            rhs[t] = r * h
            cand = np.tanh(xw[:, t, 2 * H:] + rhs[t] @ Un.T)
            hs[t + 1] = (1.0 - z) * cand + z * h
            acts[t, :, :2 * H] = zr
            acts[t, :, 2 * H:] = cand
            _check_finite(hs[t + 1], "GRU hidden state", t)
    return hs[T], cache


def _recurrent_backward(kind, cache, dh, grads):
    x, U, hs, acts = cache["x"], cache["U"], cache["hs"], cache["acts"]
    T = x.shape[1]
    H = U.shape[1]
    da_all = np.empty_like(acts)
    if kind == "lstm":
        cs, tcs = cache["cs"], cache["tcs"]
        dc = np.zeros_like(dh)
        for t in reversed(range(T)):
            i, f, g, o = acts[t, :, :H], acts[t, :, H:2 * H], acts[t, :, 2 * H:3 * H], acts[t, :, 3 * H:]
            tc = tcs[t]
            dc = dc + dh * o * (1.0 - tc * tc)
            da = da_all[t]
            da[:, :H] = dc * g * i * (1.0 - i)
            da[:, H:2 * H] = dc * cs[t] * f * (1.0 - f)
            da[:, 2 * H:3 * H] = dc * i * (1.0 - g * g)
            da[:, 3 * H:] = dh * tc * o * (1.0 - o)
            dh = da @ U
            dc = dc * f
        gates = LSTM_GATES
    else:
        rhs = cache["rhs"]
        Uz, Ur, Un = U[:H], U[H:2 * H], U[2 * H:]
        dU_n = np.zeros((H, H))
        for t in reversed(range(T)):
            h = hs[t]
            z, r, cand = acts[t, :, :H], acts[t, :, H:2 * H], acts[t, :, 2 * H:]
            da = da_all[t]
            da_n = dh * (1.0 - z) * (1.0 - cand * cand)
            da[:, 2 * H:] = da_n
            dU_n += da_n.T @ rhs[t]
            drh = da_n @ Un
            da[:, :H] = dh * (h - cand) * z * (1.0 - z)
            da[:, H:2 * H] = drh * h * r * (1.0 - r)
            dh = dh * z + drh * r + da[:, :H] @ Uz + da[:, H:2 * H] @ Ur
        gates = GRU_GATES
    k = da_all.shape[2]
    da_flat = da_all.reshape(-1, k)
    dW = da_flat.T @ x.transpose(1, 0, 2).reshape(-1, x.shape[2])
    db = da_flat.sum(axis=0)
    dU = da_flat.T @ hs[:-1].reshape(-1, H)
    if kind == "gru":
        # the candidate's recurrent term sees r*h, not h
        dU[2 * H:] = dU_n
    for j, gate in enumerate(gates):
        sl = slice(j * H, (j + 1) * H)
        grads[f"W_{gate}"] = dW[sl]
        grads[f"U_{gate}"] = dU[sl]
        grads[f"b_{gate}"] = db[sl]
    return grads


def gru_cell_forward(x_t, state: HiddenState, params: dict) -> HiddenState:
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape[-1] != params["W_z"].shape[1]:
        raise ShapeError(f"input dim {x_t.shape[-1]} != {params['W_z'].shape[1]}")
    h = state.h
    z = sigmoid(x_t @ params["W_z"].T + h @ params["U_z"].T + params["b_z"])
    r = sigmoid(x_t @ params["W_r"].T + h @ params["U_r"].T + params["b_r"])
    cand = np.tanh(x_t @ params["W_n"].T + (r * h) @ params["U_n"].T + params["b_n"])
    return HiddenState((1.0 - z) * cand + z * h)


# ---------------------------------------------------------------- heads


def _head_forward(params, hT, mask):
    hd = hT * mask
    cache = {"hd": hd, "mask": mask}
    last = hd
    if "W_extra" in params:
        pre = hd @ params["W_extra"].T + params["b_extra"]
        cache["pre_extra"] = pre
        last = relu(pre)
    cache["last"] = last
    return (last @ params["W_o"].T + params["b_o"])[:, 0], cache


def _head_backward(params, cache, dy, grads):
    dout = dy[:, None]
    grads["W_o"] = dout.T @ cache["last"]
    grads["b_o"] = dout.sum(axis=0)
    dlast = dout @ params["W_o"]
    if "W_extra" in params:
        dpre = dlast * (cache["pre_extra"] > 0)
        grads["W_extra"] = dpre.T @ cache["hd"]
        grads["b_extra"] = dpre.sum(axis=0)
        dlast = dpre @ params["W_extra"]
    return dlast * cache["mask"]


def _dropout_mask(shape, dropout, mode, rng):
    if mode == "train" and dropout > 0:
        return sample_dropout(shape, dropout, rng)
    if mode not in ("train", "eval"):
        raise DomainError(f"mode must be 'train' or 'eval', got {mode!r}")
    return np.ones(shape)


def sequence_forward(kind, window, params, mode="eval", rng=None, dropout=0.0, length=24):
    """Forward pass for any model kind; returns (y_hat, cache)."""
    if kind == "fnn":
        W1 = params["W_1"]
        f = W1.shape[1] // length if length else None
        x, single = _as_batch(window, f if f else np.shape(window)[-1], length)
        n = x.shape[0]
        flat = x.reshape(n, -1)
        if flat.shape[1] != W1.shape[1]:
            raise ShapeError(f"flattened window has {flat.shape[1]} inputs, layer expects {W1.shape[1]}")
        a1 = flat @ W1.T + params["b_1"]
        h1 = relu(a1)
        a2 = h1 @ params["W_2"].T + params["b_2"]
        h2 = relu(a2)
        y = (h2 @ params["W_o"].T + params["b_o"])[:, 0]
        cache = {"kind": kind, "flat": flat, "a1": a1, "h1": h1, "a2": a2, "h2": h2, "single": single,
                 "shape": x.shape}
    else:
        if kind not in ("lstm", "gru"):
            raise DomainError(f"unknown model kind {kind!r}")
        f = params["W_i" if kind == "lstm" else "W_z"].shape[1]
        x, single = _as_batch(window, f, length)
        hT, cache = _recurrent_forward(kind, x, params)
        mask = _dropout_mask(hT.shape, dropout, mode, rng)
        y, head = _head_forward(params, hT, mask)
        cache.update(kind=kind, head=head, single=single)
    _check_finite(y, "prediction")
    return (float(y[0]) if single else y), cache


def sequence_backward(params, cache, dy) -> dict:
    """Gradients of a scalar loss given dL/dy_hat (scalar or batch vector)."""
    dy = np.atleast_1d(np.asarray(dy, dtype=float))
    grads = {}
    if cache["kind"] == "fnn":
        grads["W_o"] = dy[None, :] @ cache["h2"]
        grads["b_o"] = np.array([dy.sum()])
        dh2 = dy[:, None] @ params["W_o"]
        da2 = dh2 * (cache["a2"] > 0)
        grads["W_2"] = da2.T @ cache["h1"]
        grads["b_2"] = da2.sum(axis=0)
        da1 = (da2 @ params["W_2"]) * (cache["a1"] > 0)
        grads["W_1"] = da1.T @ cache["flat"]
        grads["b_1"] = da1.sum(axis=0)
    else:
        dh = _head_backward(params, cache["head"], dy, grads)
        _recurrent_backward(cache["kind"], cache, dh, grads)
    return {k: grads[k] for k in params}


def loss_and_grads(kind, windows, targets, params, mode="eval", rng=None, dropout=0.0, length=24):
    """Mean squared error over the batch and its exact gradient for every parameter block."""
    y_hat, cache = sequence_forward(kind, windows, params, mode, rng, dropout, length)
    y_hat = np.atleast_1d(y_hat)
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if targets.shape != y_hat.shape:
        raise ShapeError(f"{targets.shape[0]} targets for {y_hat.shape[0]} windows")
    diff = y_hat - targets
    loss = float(np.mean(diff * diff))
    return loss, sequence_backward(params, cache, 2.0 * diff / diff.size)


def lstm_sequence_forward(window, params, mode="eval", rng=None, dropout=0.0, length=24):
    return sequence_forward("lstm", window, params, mode, rng, dropout, length)


def lstm_bptt(window, y, params, mode="eval", rng=None, dropout=0.0, length=24):
    return loss_and_grads("lstm", window, y, params, mode, rng, dropout, length)


def gru_sequence_forward(window, params, mode="eval", rng=None, dropout=0.0, length=24):
    return sequence_forward("gru", window, params, mode, rng, dropout, length)


def gru_bptt(window, y, params, mode="eval", rng=None, dropout=0.0, length=24):
    return loss_and_grads("gru", window, y, params, mode, rng, dropout, length)


def fnn_forward(window, params, mode="eval", rng=None, length=24):
    return sequence_forward("fnn", window, params, mode, rng, 0.0, length)


def fnn_backward(window, y, params, length=24):
    return loss_and_grads("fnn", window, y, params, "eval", None, 0.0, length)


# ---------------------------------------------------------------- wrapper


@dataclass
class Forecaster:
    """A model kind, its hyperparameters and its parameter blocks."""

    kind: str
    params: dict
    n_features: int
    hidden: int = 50
    dropout: float = 0.2
    window: int = 24
    extra_dense: int = 0

    @classmethod
    def create(cls, kind, n_features, hidden=None, dropout=None, seed=0, window=24, extra_dense=0):
        if kind not in KINDS:
            raise DomainError(f"unknown model kind {kind!r}")
        if hidden is None:
            hidden = 64 if kind == "fnn" else 50
        if dropout is None:
            dropout = 0.0 if kind == "fnn" else 0.2
        if kind == "fnn" and dropout:
            raise DomainError("the feed-forward baseline has no dropout")
        params = init_params(kind, n_features, hidden, seed, window=window, extra_dense=extra_dense)
        return cls(kind, params, n_features, hidden, dropout, window, extra_dense)

    def hyperparameters(self) -> dict:
        return {
            "n_features": self.n_features,
            "hidden": self.hidden,
            "dropout": self.dropout,
            "window": self.window,
            "extra_dense": self.extra_dense,
        }

    def with_params(self, params) -> "Forecaster":
        return Forecaster(self.kind, params, self.n_features, self.hidden, self.dropout, self.window,
                          self.extra_dense)

    def loss_and_grads(self, windows, targets, train=False, rng=None, params=None):
        return loss_and_grads(self.kind, windows, targets, self.params if params is None else params,
                              "train" if train else "eval", rng, self.dropout, self.window)

    def predict(self, windows, batch_size=2048, params=None) -> np.ndarray:
        params = self.params if params is None else params
        windows = np.asarray(windows, dtype=float)
        out = [np.atleast_1d(sequence_forward(self.kind, windows[s:s + batch_size], params, "eval",
                                              None, 0.0, self.window)[0])
               for s in range(0, len(windows), batch_size)]
        return np.concatenate(out) if out else np.zeros(0)
