"""Mini-batch Adam training with early stopping, and grid search over hyperparameters."""

from __future__ import annotations

import itertools
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError, DivergenceError, DomainError, NumericError, SearchError
from .models import Forecaster
from .nn import AdamState, adam_step

log = logging.getLogger(__name__)

DEFAULT_GRID = {
    "hidden": [32, 50, 64],
    "dropout": [0.0, 0.2],
    "batch_size": [32, 64],
    "lr": [1e-3, 3e-4],
}


@dataclass(frozen=True)
class TrainConfig:
    model: str = "lstm"
    hidden: int | None = None
    dropout: float | None = None
    extra_dense: int = 0
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 10
    lr: float = 1e-3
    seed: int = 42
    min_delta: float = 1e-9
    # a loss above this on [0, 1]-scaled targets counts as divergence
    max_loss: float = 1e6

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.lr < 0:
            raise ConfigError(f"learning rate must be non-negative, got {self.lr}")

    def build(self, n_features: int, window: int = 24) -> Forecaster:
        return Forecaster.create(self.model, n_features, self.hidden, self.dropout, self.seed, window,
                                 self.extra_dense)

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    stop_reason: str = ""

    @property
    def best_val_loss(self):
        return self.val_loss[self.best_epoch - 1] if self.best_epoch else None

    def to_rows(self):
        return [(i + 1, tr, va) for i, (tr, va) in enumerate(zip(self.train_loss, self.val_loss))]


class EarlyStopping:
    """Tracks the best validation loss; ``update`` returns True once patience runs out."""

    def __init__(self, patience: int, min_delta: float = 1e-9):
        self.patience = patience
        self.min_delta = min_delta
        self.best = np.inf
        self.best_epoch = 0
        self.waited = 0

    def update(self, epoch: int, loss: float) -> bool:
        if loss < self.best - self.min_delta:
            self.best, self.best_epoch, self.waited = loss, epoch, 0
            return False
        self.waited += 1
        return self.waited >= self.patience


def _check_loss(loss, config, epoch, batch=None):
    where = f"epoch {epoch}" + (f", batch {batch}" if batch is not None else "")
    if not np.isfinite(loss) or loss > config.max_loss:
        raise DivergenceError(f"loss diverged ({loss}) at {where}", epoch, batch)


def train(config: TrainConfig, model: Forecaster, train_set, val_set):
    """Fit ``model`` and return (model with best-validation params, history)."""
    if len(train_set) == 0 or len(val_set) == 0:
        raise ConfigError("training and validation window sets must be non-empty")
    rng = np.random.default_rng(config.seed)
    X, y = train_set.inputs, train_set.targets
    state = AdamState(lr=config.lr)
    params = model.params
    best_params = params
    stopper = EarlyStopping(config.patience, config.min_delta)
    history = TrainHistory()
    n = len(y)
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            try:
                loss, grads = model.loss_and_grads(X[idx], y[idx], train=True, rng=rng, params=params)
            except NumericError as exc:
                raise DivergenceError(f"{exc} at epoch {epoch}, batch {b}", epoch, b) from exc
            _check_loss(loss, config, epoch, b)
            total += loss * len(idx)
            params, state = adam_step(params, grads, state)
        try:
            val = float(np.mean((model.predict(val_set.inputs, params=params) - val_set.targets) ** 2))
        except NumericError as exc:
            raise DivergenceError(f"{exc} during validation at epoch {epoch}", epoch) from exc
        _check_loss(val, config, epoch)
        history.train_loss.append(total / n)
        history.val_loss.append(val)
        stop = stopper.update(epoch, val)
        if stopper.best_epoch == epoch:
            best_params = params
        log.debug("epoch %d train %.6g val %.6g", epoch, total / n, val)
        if stop:
            history.stop_reason = "early_stopping"
            break
    else:
        history.stop_reason = "max_epochs"
    history.best_epoch = stopper.best_epoch
    return model.with_params(best_params), history


def grid_points(space: dict):
    """Cartesian product of the space in sorted key order."""
    if not space or any(len(v) == 0 for v in space.values()):
        raise SearchError("grid search space is empty")
    keys = sorted(space)
    for values in itertools.product(*(space[k] for k in keys)):
        yield dict(zip(keys, values))


def grid_search(space: dict, train_set, val_set, base: TrainConfig = TrainConfig()):
    """Train every combination with ``base.seed``; returns (best config, table rows).

    Diverging runs are kept in the table with status ``"diverged"`` and points the
    model kind rejects (dropout on the FNN) with status ``"invalid"``; neither can win.
    Ties resolve to the earlier point in iteration order.
    """
    unknown = set(space) - {"hidden", "dropout", "batch_size", "lr"}
    if unknown:
        raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
    n_features = train_set.inputs.shape[2]
    window = train_set.inputs.shape[1]
    table = []
    best = None
    for point in grid_points(space):
        config = replace(base, **point)
        row = dict(point)
        try:
            model = config.build(n_features, window)
        except DomainError as exc:
            log.info("grid point %s skipped: %s", point, exc)
            row.update(val_loss=None, best_epoch=None, status="invalid")
            table.append(row)
            continue
        try:
            _, history = train(config, model, train_set, val_set)
        except DivergenceError as exc:
            log.info("grid point %s diverged: %s", point, exc)
            row.update(val_loss=None, best_epoch=None, status="diverged")
            table.append(row)
            continue
        row.update(val_loss=history.best_val_loss, best_epoch=history.best_epoch, status="ok")
        table.append(row)
        if best is None or history.best_val_loss < best[0]:
            best = (history.best_val_loss, config)
    if best is None:
        raise SearchError("no grid-search run finished")
    return best[1], table
