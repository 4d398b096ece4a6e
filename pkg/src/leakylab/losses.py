"""Per-sample losses and their gradients with respect to the network output.

Every kind works row-wise on ``(n, d)`` arrays; 1-D inputs are treated as a
single sample. ``grad`` returns the generalized residual that backprop pushes
through the network (``yhat - y`` for the half squared error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ContractError, LossOverflowError

EXP_LIMIT = 700.0


def _rows(yhat, y):
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if yhat.shape != y.shape:
        raise ContractError(f"prediction shape {yhat.shape} != label shape {y.shape}")
    single = yhat.ndim == 1
    if single:
        yhat, y = yhat[None, :], y[None, :]
    return yhat, y, single


@dataclass(frozen=True)
class HalfMSE:
    name = "half_mse"

    def values(self, yhat, y):
        yhat, y, _ = _rows(yhat, y)
        r = y - yhat
        return 0.5 * np.sum(r * r, axis=1)

    def grads(self, yhat, y):
        yhat, y, _ = _rows(yhat, y)
        return yhat - y


@dataclass(frozen=True)
class ExpLambda:
    """``0.5 * exp(lam * ||y - yhat||^2)``, a convex re-weighting of the squared error."""

    lam: float = 1.0
    name = "exp"

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ContractError(f"ExpLambda needs finite lam > 0, got {self.lam}")

    def _exponent(self, yhat, y):
        r = y - yhat
        z = self.lam * np.sum(r * r, axis=1)
        bad = np.flatnonzero(~(z <= EXP_LIMIT))
        if bad.size:
            raise LossOverflowError(int(bad[0]), float(z[bad[0]]))
        return z

    def values(self, yhat, y):
        yhat, y, _ = _rows(yhat, y)
        return 0.5 * np.exp(self._exponent(yhat, y))

    def grads(self, yhat, y):
        yhat, y, _ = _rows(yhat, y)
        w = self.lam * np.exp(self._exponent(yhat, y))
        return w[:, None] * (yhat - y)


@dataclass(frozen=True)
class SoftmaxCE:
    """Categorical cross entropy on logits against one-hot labels."""

    name = "softmax_ce"

    @staticmethod
    def _check_one_hot(y):
        ok = np.all((y == 0.0) | (y == 1.0), axis=1) & (np.sum(y, axis=1) == 1.0)
        if not np.all(ok):
            raise ContractError(f"SoftmaxCE needs one-hot labels (row {int(np.flatnonzero(~ok)[0])})")

    @staticmethod
    def _log_softmax(z):
        shifted = z - np.max(z, axis=1, keepdims=True)
        return shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))

    def values(self, yhat, y):
        yhat, y, _ = _rows(yhat, y)
        self._check_one_hot(y)
        logp = self._log_softmax(yhat)
        return -logp[np.arange(len(y)), np.argmax(y, axis=1)]

    def grads(self, yhat, y):
        yhat, y, _ = _rows(yhat, y)
        self._check_one_hot(y)
        return np.exp(self._log_softmax(yhat)) - y


LossKind = Union[HalfMSE, ExpLambda, SoftmaxCE]


def loss_value(yhat, y, kind: LossKind):
    """Loss of one sample (1-D input) or per-sample losses (2-D input)."""
    v = kind.values(yhat, y)
    return float(v[0]) if np.ndim(yhat) == 1 else v


def loss_grad_output(yhat, y, kind: LossKind) -> np.ndarray:
    g = kind.grads(yhat, y)
    return g[0] if np.ndim(yhat) == 1 else g


def total_loss(yhat, y, kind: LossKind) -> float:
    """Sum of per-sample losses over a batch."""
    return float(np.sum(kind.values(yhat, y)))


def parse_loss(name: str, lam: float = 1.0) -> LossKind:
    key = name.strip().lower()
    if key in ("half_mse", "mse", "halfmse"):
        return HalfMSE()
    if key in ("exp", "explambda", "exp_lambda"):
        return ExpLambda(float(lam))
    if key in ("softmax_ce", "ce", "cross_entropy", "softmaxce"):
        return SoftmaxCE()
    raise ContractError(f"unknown loss kind {name!r}")
