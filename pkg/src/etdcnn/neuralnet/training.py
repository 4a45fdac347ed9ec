from __future__ import annotations

import logging
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .layers import NumericError
from .model import LayerSpec, Model
from .optim import SGD, Adam

log = logging.getLogger(__name__)


class TrainingDivergedError(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self):
        if int(self.epochs) < 1:
            raise ValueError("epochs must be >= 1")
        if int(self.batch_size) < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")

    def to_dict(self) -> dict:
        return asdict(self)


def _make_optimizer(cfg: TrainConfig, params):
    if cfg.optimizer == "sgd":
        return SGD(params, lr=cfg.learning_rate)
    return Adam(params, lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)


def train(
    specs: Sequence[LayerSpec],
    x,
    y,
    cfg: TrainConfig = TrainConfig(),
    seed: int = 0,
) -> Model:
    """Fit a fresh model on ``x`` (N, T, 1) and 0/1 labels ``y``.

    ``seed`` drives weight initialization and ``cfg.shuffle_seed`` the
    per-epoch sample order, so the result is a pure function of the inputs.
    The returned model's ``history`` holds the running-mean loss and accuracy
    of each epoch.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise ValueError(f"need matching, non-empty inputs; got {x.shape[0]} samples, {y.shape[0]} labels")
    model = Model(specs, x.shape[1], seed=seed)
    params = model.parameter_arrays()
    opt = _make_optimizer(cfg, params)
    rng = np.random.default_rng(cfg.shuffle_seed)
    n = x.shape[0]

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = x[idx], y[idx]
            try:
                loss, grads, p = model.loss_and_grads(xb, yb)
            except NumericError as exc:
                raise TrainingDivergedError(
                    f"epoch {epoch}: {exc}; try a lower learning rate"
                ) from exc
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became {loss} at epoch {epoch}; try a lower learning rate"
                )
            correct += int(np.sum((p.reshape(-1) > 0.5) == (yb > 0.5)))
            loss_sum += loss * idx.size
            opt.step([g[k] for g in grads for k in ("w", "b") if k in g])
        record = {"epoch": epoch, "loss": loss_sum / n, "accuracy": correct / n}
        model.history.append(record)
        log.debug("epoch %d loss %.6f acc %.4f", epoch, record["loss"], record["accuracy"])
    return model
