"""Plain gradient descent and stochastic gradient descent on the hidden matrices."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ContractError, DivergenceError
from .grad import backprop, batch_loss
from .linalg import Rng
from .losses import HalfMSE, LossKind, total_loss
from .net import Params, as_activation, predict

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class TrainConfig:
    eta: float
    epochs: int
    mode: str = "gd"
    batch_size: int = 64
    seed: int = 0
    eval_every: int = 1
    loss_kind: LossKind = field(default_factory=HalfMSE)

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ContractError(f"learning rate must be finite and >= 0, got {self.eta}")
        if self.epochs < 1 or self.eval_every < 1 or self.batch_size < 1:
            raise ContractError("epochs, eval_every and batch_size must be positive")
        if self.mode not in ("gd", "sgd"):
            raise ContractError(f"mode must be 'gd' or 'sgd', got {self.mode!r}")


@dataclass
class TrainTrace:
    epochs: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    test_loss: list | None = None
    wall_seconds: float = 0.0

    def loss_at(self, epoch: int) -> float:
        try:
            return self.train_loss[self.epochs.index(epoch)]
        except ValueError:
            raise ContractError(f"trace has no entry for epoch {epoch}") from None


@dataclass(frozen=True)
class RateEstimate:
    gamma_hat: float
    t0: int
    t1: int


def heldout_mse(params: Params, act, data: Dataset) -> float:
    """Mean half squared error on a held-out set."""
    yhat = predict(params, act, data.X)
    return total_loss(yhat, data.Y, HalfMSE()) / data.n


def _check(loss: float, epoch: int):
    if not math.isfinite(loss) or loss > DIVERGENCE_LIMIT:
        raise DivergenceError(epoch, loss)


def _record(trace, epoch, loss, params, act, test):
    trace.epochs.append(epoch)
    trace.train_loss.append(loss)
    if test is not None:
        trace.test_loss.append(heldout_mse(params, act, test))


def _is_eval(t: int, cfg: TrainConfig) -> bool:
    return t == 0 or t == cfg.epochs or t % cfg.eval_every == 0


def train_gd(params: Params, act, data: Dataset, test: Dataset | None, cfg: TrainConfig):
    """``W <- W - eta * grad L(W)`` on the full training set for ``cfg.epochs`` steps."""
    if cfg.mode != "gd":
        raise ContractError("train_gd needs mode='gd'")
    act = as_activation(act)
    trace = TrainTrace(test_loss=[] if test is not None else None)
    start = time.perf_counter()
    for t in range(cfg.epochs):
        loss, grads = backprop(params, act, data.X, data.Y, cfg.loss_kind)
        _check(loss, t)
        if _is_eval(t, cfg):
            _record(trace, t, loss, params, act, test)
        params = params.with_weights([w - cfg.eta * g for w, g in zip(params.W, grads.dW)])
    loss = batch_loss(params, act, data.X, data.Y, cfg.loss_kind)
    _check(loss, cfg.epochs)
    _record(trace, cfg.epochs, loss, params, act, test)
    trace.wall_seconds = time.perf_counter() - start
    return params, trace


def train_sgd(params: Params, act, data: Dataset, test: Dataset | None, cfg: TrainConfig,
              rng: Rng | None = None):
    """Each step draws ``b`` distinct indices uniformly and descends on that batch.

    Batches come from ``rng`` (default ``Rng(cfg.seed)``); the trace stores the
    full-dataset loss at evaluation epochs.
    """
    if cfg.mode != "sgd":
        raise ContractError("train_sgd needs mode='sgd'")
    if cfg.batch_size > data.n:
        raise ContractError(f"batch size {cfg.batch_size} exceeds dataset size {data.n}")
    act = as_activation(act)
    rng = rng if rng is not None else Rng(cfg.seed)
    trace = TrainTrace(test_loss=[] if test is not None else None)
    start = time.perf_counter()
    for t in range(cfg.epochs):
        if _is_eval(t, cfg):
            full = batch_loss(params, act, data.X, data.Y, cfg.loss_kind)
            _check(full, t)
            _record(trace, t, full, params, act, test)
        idx = np.sort(rng.sample(data.n, cfg.batch_size))
        loss, grads = backprop(params, act, data.X[idx], data.Y[idx], cfg.loss_kind)
        _check(loss, t)
        params = params.with_weights([w - cfg.eta * g for w, g in zip(params.W, grads.dW)])
    full = batch_loss(params, act, data.X, data.Y, cfg.loss_kind)
    _check(full, cfg.epochs)
    _record(trace, cfg.epochs, full, params, act, test)
    trace.wall_seconds = time.perf_counter() - start
    return params, trace


def train(params: Params, act, data: Dataset, test: Dataset | None, cfg: TrainConfig):
    if cfg.mode == "gd":
        return train_gd(params, act, data, test, cfg)
    return train_sgd(params, act, data, test, cfg)


def estimate_rate(trace: TrainTrace, t0: int = 100, t1: int = 1000) -> RateEstimate:
    """Geometric mean per-epoch decay ``(L(t1) / L(t0)) ** (1 / (t1 - t0))``."""
    if not t0 < t1:
        raise ContractError(f"need t0 < t1, got {t0}, {t1}")
    l0, l1 = trace.loss_at(t0), trace.loss_at(t1)
    if not (l0 > 0 and l1 > 0):
        raise ContractError(f"losses must be positive for rate estimation ({l0}, {l1})")
    return RateEstimate((l1 / l0) ** (1.0 / (t1 - t0)), t0, t1)
