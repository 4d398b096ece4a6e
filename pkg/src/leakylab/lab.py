"""Desk-scale empirical checks of the network's behaviour at initialization.

Each check measures one statistic on fixed seeds:

* hidden-state norms stay near 1 through every layer,
* distinct inputs stay separated after every layer,
* the gradient-to-loss ratio scales with the activation's rate factor,
* the first-order Taylor residual of the loss is second order in the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, separation_delta
from .errors import ContractError
from .grad import Gradients, backprop, batch_loss, grad_norms
from .linalg import Rng, gaussian_matrix
from .losses import HalfMSE, LossKind
from .net import NetworkShape, Params, as_activation, forward_batch, init_params
from .theory import rate_factor

NORM_BAND = (0.8, 1.2)


# --- hidden-state norms -------------------------------------------------------


@dataclass(frozen=True)
class LayerNorms:
    mean: float
    min: float
    max: float
    fraction_within: float


@dataclass(frozen=True)
class NormStats:
    """Per-layer norm summaries for layers ``0..L`` over ``trials`` initializations.

    ``ratio_means[l-1]`` is the mean of ``||h_l||^2 / ||h_{l-1}||^2``;
    ``joint_fraction`` counts trials with every layer inside the band.
    """

    layers: tuple
    ratio_means: tuple
    joint_fraction: float
    trials: int
    norms: np.ndarray = field(repr=False)


def _trial_seeds(rng: Rng, trials: int) -> list[int]:
    return [int(s) for s in rng.u64s(trials)]


def hidden_norm_sweep(shape: NetworkShape, alphas, trials: int, rng: Rng,
                      band=NORM_BAND) -> dict:
    """:func:`hidden_norm_stats` for several alphas sharing each trial's weights."""
    if trials < 1:
        raise ContractError("need at least one trial")
    alphas = [float(a) for a in alphas]
    acts = [as_activation(a) for a in alphas]
    x = np.zeros(shape.p)
    x[0] = 1.0
    norms = np.empty((len(alphas), trials, shape.L + 1))
    for k, seed in enumerate(_trial_seeds(rng, trials)):
        params = init_params(shape, Rng(seed))
        h0 = params.A @ x
        for j, act in enumerate(acts):
            h = h0
            norms[j, k, 0] = np.linalg.norm(h)
            for l, w in enumerate(params.W, start=1):
                h = act(w @ h)
                norms[j, k, l] = np.linalg.norm(h)
    return {a: _summarize(norms[j], band) for j, a in enumerate(alphas)}


def _summarize(norms: np.ndarray, band) -> NormStats:
    lo, hi = band
    inside = (norms >= lo) & (norms <= hi)
    layers = tuple(
        LayerNorms(float(col.mean()), float(col.min()), float(col.max()), float(ins.mean()))
        for col, ins in zip(norms.T, inside.T)
    )
    sq = norms**2
    ratios = tuple(float(np.mean(sq[:, l] / sq[:, l - 1])) for l in range(1, norms.shape[1]))
    return NormStats(layers, ratios, float(np.all(inside, axis=1).mean()), len(norms), norms)


def hidden_norm_stats(shape: NetworkShape, alpha: float, trials: int, rng: Rng,
                      band=NORM_BAND) -> NormStats:
    """Norms of ``h_0..h_L`` for the unit input ``e_1`` over fresh initializations."""
    return hidden_norm_sweep(shape, [alpha], trials, rng, band)[float(alpha)]


# --- separation ---------------------------------------------------------------


@dataclass(frozen=True)
class SeparationStats:
    """Per layer ``0..L``: minimum pairwise distance and max squared cosine."""

    min_distance: tuple
    max_cos_sq: tuple


def _pairwise(H: np.ndarray):
    sq = np.sum(H * H, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2 = (H @ H.T) ** 2 / np.outer(sq, sq)
    cos2 = np.nan_to_num(cos2[np.triu_indices(len(H), 1)], nan=0.0)
    return separation_delta(H), float(min(cos2.max(), 1.0))


def layer_separation_stats(params: Params, act, data: Dataset) -> SeparationStats:
    if data.n < 2:
        raise ContractError("separation statistics need at least two inputs")
    tr = forward_batch(params, act, data.X)
    dists, cosines = zip(*(_pairwise(H) for H in tr.h))
    return SeparationStats(tuple(dists), tuple(cosines))


# --- gradient bounds ----------------------------------------------------------


@dataclass(frozen=True)
class GradRatioReport:
    """Gradient-to-loss ratios at initialization.

    ``r[k, j]`` is ``||grad L||_F^2 / L`` for trial ``k`` and ``alphas[j]``
    (NaN where the loss vanished, counted in ``skipped``). ``normalized``
    divides the trial mean by ``f(alpha) delta m / (n d)``. ``layer_upper``
    is the largest ``||grad_l L||^2 / L / (m n / d)`` seen per alpha.
    """

    alphas: tuple
    r: np.ndarray
    r_mean: tuple
    normalized: tuple
    layer_upper: tuple
    skipped: tuple

    @property
    def spread(self) -> float:
        vals = [v for v in self.normalized if math.isfinite(v)]
        return max(vals) / min(vals)


def grad_bound_ratios(shape: NetworkShape, alphas, data: Dataset, rng: Rng,
                      trials: int) -> GradRatioReport:
    alphas = tuple(float(a) for a in alphas)
    if any(not a < 1 for a in alphas):
        raise ContractError("gradient bounds need alpha < 1")
    if (shape.p, shape.d) != (data.p, data.d):
        raise ContractError("network shape does not match the data")
    r = np.full((trials, len(alphas)), np.nan)
    upper = np.zeros((trials, len(alphas)))
    scale_up = shape.m * data.n / data.d
    for k, seed in enumerate(_trial_seeds(rng, trials)):
        params = init_params(shape, Rng(seed))
        for j, a in enumerate(alphas):
            loss, grads = backprop(params, a, data.X, data.Y, HalfMSE())
            if loss == 0:
                continue
            per_layer, total = grad_norms(grads)
            r[k, j] = total / loss
            upper[k, j] = max(per_layer) / loss / scale_up
    skipped = tuple(int(v) for v in np.isnan(r).sum(axis=0))
    with np.errstate(invalid="ignore"):
        r_mean = tuple(float(np.nanmean(col)) if np.any(~np.isnan(col)) else math.nan for col in r.T)
    lower_scale = data.delta * shape.m / (data.n * data.d)
    normalized = tuple(rm / (rate_factor(a) * lower_scale) for rm, a in zip(r_mean, alphas))
    return GradRatioReport(alphas, r, r_mean, normalized, tuple(float(u) for u in upper.max(axis=0)), skipped)


# --- semi-smoothness ----------------------------------------------------------


@dataclass(frozen=True)
class TaylorReport:
    """Residuals ``R(t) = L(W + t V) - L(W) - t <grad L(W), V>``.

    ``slope`` is the least-squares slope of ``log|R|`` against ``log t`` over
    the entries with ``t > 0`` and ``R != 0``.
    """

    t: tuple
    residual: tuple
    slope: float
    intercept: float
    loss: float
    grad_norm: float
    direction_norm: float


def random_direction(params: Params, rng: Rng, std: float | None = None) -> Gradients:
    """Gaussian perturbation shaped like the hidden matrices (default std sqrt(2/m))."""
    m = params.A.shape[0]
    std = math.sqrt(2.0 / m) if std is None else std
    return Gradients(tuple(gaussian_matrix(rng, m, m, std) for _ in params.W))


def local_direction(params: Params, act, X, rng: Rng, t_max: float = 1e-2,
                    margin: float = 0.5) -> Gradients:
    """Random direction shrunk so that ``t_max`` steps flip no activation sign.

    With piecewise-linear activations the loss is smooth only inside one
    activation region; steps that flip signs add a kink term to the Taylor
    residual. The first-order distance to the nearest sign change fixes the
    shrink factor, with ``margin`` as a safety factor.
    """
    act = as_activation(act)
    V = random_direction(params, rng)
    tr = forward_batch(params, act, X)
    dh = np.zeros_like(tr.h[0])
    reach = math.inf
    for l, (w, v) in enumerate(zip(params.W, V.dW)):
        dg = dh @ w.T + tr.h[l] @ v.T
        with np.errstate(divide="ignore"):
            reach = min(reach, float(np.min(np.abs(tr.g[l]) / np.abs(dg))))
        dh = act.derivative(tr.g[l]) * dg
    scale = min(1.0, margin * reach / t_max)
    return Gradients(tuple(scale * v for v in V.dW))


def halving_steps(start: float = 1e-2, stop: float = 1e-5) -> list[float]:
    """``start, start/2, ...`` down to the last value not below ``stop``."""
    out = [start]
    while out[-1] / 2 >= stop:
        out.append(out[-1] / 2)
    return out


def _loss_remainder(kind: LossKind, yhat, dy, Y) -> float:
    """``sum l(yhat + dy) - l(yhat) - <l'(yhat), dy>``; exact for the half squared error."""
    if isinstance(kind, HalfMSE):
        return 0.5 * float(np.sum(dy * dy))
    return float(np.sum(kind.values(yhat + dy, Y) - kind.values(yhat, Y)) - np.sum(kind.grads(yhat, Y) * dy))


def _taylor_residual(params: Params, act, tr, Y, kind: LossKind, direction: Gradients, t: float) -> float:
    """``L(W + tV) - L(W) - t <grad L, V>`` without subtracting nearly equal losses.

    Carries the exact hidden-state change ``dh``, its first-order part and the
    remainder ``q = dh - first order`` layer by layer; activations that change
    sign contribute their kink term directly.
    """
    dh = np.zeros_like(tr.h[0])
    q = np.zeros_like(tr.h[0])
    for l, (w, v) in enumerate(zip(params.W, direction.dW)):
        g, h = tr.g[l], tr.h[l]
        tv = t * ((h + dh) @ v.T)
        dg = dh @ w.T + tv
        slope = act.derivative(g)
        flipped = (g >= 0) != (g + dg >= 0)
        kink = np.where(flipped, act(g + dg) - act(g) - slope * dg, 0.0)
        q = kink + slope * (q @ w.T + t * (dh @ v.T))
        dh = np.where(flipped, act(g + dg) - act(g), slope * dg)
    dy, qy = dh @ params.B.T, q @ params.B.T
    return _loss_remainder(kind, tr.yhat, dy, Y) + float(np.sum(kind.grads(tr.yhat, Y) * qy))


def taylor_residual_scan(params: Params, act, data: Dataset, direction: Gradients, t_list,
                         loss_kind: LossKind = HalfMSE()) -> TaylorReport:
    t_list = [float(t) for t in t_list]
    if any(t < 0 for t in t_list) or any(a <= b for a, b in zip(t_list, t_list[1:])):
        raise ContractError("t_list must be strictly decreasing and nonnegative")
    if len(direction.dW) != len(params.W):
        raise ContractError("direction must match the hidden matrices")
    act = as_activation(act)
    loss, grads = backprop(params, act, data.X, data.Y, loss_kind)
    tr = forward_batch(params, act, data.X)
    residual = [_taylor_residual(params, act, tr, data.Y, loss_kind, direction, t) if t > 0 else 0.0
                for t in t_list]
    pts = [(math.log(t), math.log(abs(r))) for t, r in zip(t_list, residual) if t > 0 and r != 0]
    if len(pts) >= 2:
        slope, intercept = np.polyfit(*zip(*pts), 1)
    else:
        slope, intercept = math.nan, math.nan
    _, gsq = grad_norms(grads)
    _, vsq = grad_norms(direction)
    return TaylorReport(tuple(t_list), tuple(residual), float(slope), float(intercept),
                        loss, math.sqrt(gsq), math.sqrt(vsq))
