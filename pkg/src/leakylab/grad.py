"""Exact gradients of the summed loss with respect to the hidden matrices.

``backprop`` is the production path. ``finite_diff_grad`` is an independent
central-difference oracle that only ever evaluates the loss; it exists to
certify ``backprop`` and is far too slow for training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .linalg import frobenius_norm_sq
from .losses import HalfMSE, LossKind, total_loss
from .net import Params, as_activation, forward_batch, predict


@dataclass(frozen=True)
class Gradients:
    dW: tuple

    def __iter__(self):
        return iter(self.dW)

    def __len__(self):
        return len(self.dW)


@dataclass(frozen=True)
class FiniteDiffConfig:
    step: float = 1e-5

    def __post_init__(self):
        if not 0 < self.step < 1:
            raise ContractError(f"finite-difference step must be in (0, 1), got {self.step}")


def _batch(params: Params, X, Y):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim == 1:
        X, Y = X[None, :], Y[None, :]
    if len(X) == 0:
        raise ContractError("batch must be nonempty")
    if len(X) != len(Y) or Y.shape[1] != params.B.shape[0]:
        raise ContractError(f"batch shapes X {X.shape}, Y {Y.shape} do not match the network")
    return X, Y


def backprop(params: Params, act, X, Y, loss_kind: LossKind = HalfMSE()):
    """Summed batch loss and its gradient with respect to ``W_1..W_L``.

    For layer l the per-sample gradient is ``D_l Back_{l+1}^T e h_{l-1}^T``
    where ``e`` is the output residual of the loss; the batch sum is formed
    as one matrix product per layer.
    """
    act = as_activation(act)
    X, Y = _batch(params, X, Y)
    tr = forward_batch(params, act, X)
    loss = total_loss(tr.yhat, Y, loss_kind)
    E = loss_kind.grads(tr.yhat, Y)
    L = len(params.W)
    dW = [None] * L
    # delta holds d loss / d g_l row-wise
    delta = (E @ params.B) * act.derivative(tr.g[L - 1])
    for l in range(L - 1, -1, -1):
        dW[l] = delta.T @ tr.h[l]
        if l > 0:
            delta = (delta @ params.W[l]) * act.derivative(tr.g[l - 1])
    return loss, Gradients(tuple(dW))


def batch_loss(params: Params, act, X, Y, loss_kind: LossKind = HalfMSE()) -> float:
    X, Y = _batch(params, X, Y)
    return total_loss(predict(params, act, X), Y, loss_kind)


def finite_diff_grad(params: Params, act, X, Y, loss_kind: LossKind = HalfMSE(),
                     cfg: FiniteDiffConfig = FiniteDiffConfig()) -> Gradients:
    """Central differences ``(f(w+h) - f(w-h)) / 2h`` over every hidden weight."""
    act = as_activation(act)
    X, Y = _batch(params, X, Y)
    W = [np.array(w) for w in params.W]
    out = []
    for l, w in enumerate(W):
        g = np.empty_like(w)
        for idx in np.ndindex(w.shape):
            g[idx] = _central_entry(params, act, X, Y, loss_kind, W, l, idx, cfg.step)
        out.append(g)
    return Gradients(tuple(out))


def _central_entry(params, act, X, Y, loss_kind, W, l, idx, h):
    w = W[l]
    orig = w[idx]
    w[idx] = orig + h
    up = total_loss(predict(params.with_weights(W), act, X), Y, loss_kind)
    w[idx] = orig - h
    down = total_loss(predict(params.with_weights(W), act, X), Y, loss_kind)
    w[idx] = orig
    return (up - down) / (2.0 * h)


def relative_error(a, b, floor: float = 1e-6) -> np.ndarray:
    """Entrywise ``|a - b| / max(|a|, |b|, floor)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def gradient_check(params: Params, act, X, Y, loss_kind: LossKind = HalfMSE(),
                   step: float = 1e-5, tol: float = 1e-5, floor: float = 1e-6) -> float:
    """Max relative entrywise error between backprop and central differences.

    Entries above ``tol`` are retried with ``step / 10`` (a perturbation that
    crossed an activation kink) and ``step * 10`` (a tiny entry swamped by
    rounding in the loss difference); the best of the three estimates counts.
    """
    act = as_activation(act)
    _, analytic = backprop(params, act, X, Y, loss_kind)
    numeric = finite_diff_grad(params, act, X, Y, loss_kind, FiniteDiffConfig(step))
    X, Y = _batch(params, X, Y)
    W = [np.array(w) for w in params.W]
    worst = 0.0
    for l, (a, n) in enumerate(zip(analytic.dW, numeric.dW)):
        err = relative_error(a, n, floor)
        for idx in zip(*np.nonzero(err > tol)):
            for h in (step / 10.0, min(step * 10.0, 0.5)):
                retry = _central_entry(params, act, X, Y, loss_kind, W, l, idx, h)
                err[idx] = min(err[idx], float(relative_error(a[idx], retry, floor)))
        worst = max(worst, float(err.max()))
    return worst


def grad_norms(grads: Gradients):
    """Squared Frobenius norm per layer and their sum."""
    per_layer = [frobenius_norm_sq([g]) for g in grads.dW]
    return per_layer, frobenius_norm_sq(grads.dW)
