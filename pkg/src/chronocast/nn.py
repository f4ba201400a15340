"""Dense numerical building blocks: activations, dense layers, dropout, MSE, Adam
and a central-difference gradient checker.

Parameters throughout the package are plain ``dict[str, np.ndarray]`` in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError, ShapeError


def sigmoid(x):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def tanh(x):
    return np.tanh(np.asarray(x, dtype=float))


def relu(x):
    return np.maximum(np.asarray(x, dtype=float), 0.0)


@dataclass
class DenseParams:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(f"inconsistent dense shapes {self.weights.shape} and {self.bias.shape}")


def dense_forward(x, p: DenseParams):
    """W x + b for a single vector or a batch of row vectors."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p.weights.shape[1]:
        raise ShapeError(f"input dim {x.shape[-1]} != layer input dim {p.weights.shape[1]}")
    return x @ p.weights.T + p.bias


def mse_loss(pred, target) -> float:
    pred, target = np.asarray(pred, dtype=float), np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ShapeError(f"shape mismatch {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise DomainError("mse of empty vectors")
    return float(np.mean((pred - target) ** 2))


def mse_grad(pred, target):
    pred, target = np.asarray(pred, dtype=float), np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ShapeError(f"shape mismatch {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise DomainError("mse of empty vectors")
    return 2.0 * (pred - target) / pred.size


def sample_dropout(shape, p: float = 0.2, rng=None):
    """Inverted-dropout mask: 0 with probability p, otherwise 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"dropout rate must be in [0, 1), got {p}")
    if p == 0.0:
        return np.ones(shape)
    if rng is None:
        raise DomainError("train-mode dropout needs an rng")
    keep = rng.random(shape) >= p
    return keep / (1.0 - p)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState):
    """One bias-corrected Adam update. Returns new (params, state); inputs are not mutated."""
    for k in params:
        if k not in grads or np.shape(grads[k]) != np.shape(params[k]):
            raise ShapeError(f"gradient for {k!r} missing or misshapen")
    t = state.t + 1
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    new_params, m, v = {}, {}, {}
    for k, theta in params.items():
        g = grads[k]
        m_k = state.m.get(k, np.zeros_like(theta))
        v_k = state.v.get(k, np.zeros_like(theta))
        m[k] = state.beta1 * m_k + (1.0 - state.beta1) * g
        v[k] = state.beta2 * v_k + (1.0 - state.beta2) * (g * g)
        new_params[k] = theta - state.lr * (m[k] / bc1) / (np.sqrt(v[k] / bc2) + state.eps)
    return new_params, AdamState(state.lr, state.beta1, state.beta2, state.eps, t, m, v)


def _flat_items(params):
    if isinstance(params, dict):
        return params
    return {"": params}


def grad_check(f, analytic_grads, params, h: float = 1e-5) -> float:
    """Max over coordinates of |a - n| / max(1e-8, |a| + |n|) with central differences n.

    ``params`` is an array or a dict of arrays; ``f`` receives the same structure.
    """
    is_dict = isinstance(params, dict)
    work = {k: np.array(v, dtype=float) for k, v in _flat_items(params).items()}
    analytic = _flat_items(analytic_grads)

    def call():
        val = f(work if is_dict else work[""])
        if not np.isfinite(val):
            raise NumericError(f"objective is not finite: {val}")
        return float(val)

    call()
    worst = 0.0
    for key, arr in work.items():
        a_block = np.asarray(analytic[key], dtype=float).reshape(arr.shape)
        flat = arr.reshape(-1)
        a_flat = a_block.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = call()
            flat[i] = orig - h
            fm = call()
            flat[i] = orig
            numeric = (fp - fm) / (2 * h)
            a = a_flat[i]
            err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, err)
    return worst
