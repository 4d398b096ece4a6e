"""Fully connected Leaky-ReLU network with frozen input/output maps.

The network is ``x -> A x -> sigma(W_1 .) -> ... -> sigma(W_L .) -> B .`` with
the rescaled activation ``sigma(x) = x / sqrt(1 + a^2)`` for ``x >= 0`` and
``a x / sqrt(1 + a^2)`` otherwise. Only the hidden matrices ``W_l`` are trained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError
from .linalg import Matrix, Rng, gaussian_matrix


@dataclass(frozen=True)
class NetworkShape:
    p: int
    m: int
    L: int
    d: int

    def __post_init__(self):
        for name in ("p", "m", "L", "d"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ContractError(f"NetworkShape.{name} must be a positive integer, got {v}")


@dataclass(frozen=True)
class Activation:
    """Rescaled Leaky ReLU with parameter ``alpha``.

    Any finite alpha is accepted here; alpha = 1 makes the network linear,
    which tests use as an exact reference.
    """

    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ContractError(f"alpha must be finite, got {self.alpha}")

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(1.0 + self.alpha * self.alpha)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        # x == 0 takes the nonnegative branch
        return np.where(x >= 0, x, self.alpha * x) * self.scale

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x >= 0, self.scale, self.alpha * self.scale)


def as_activation(act) -> Activation:
    return act if isinstance(act, Activation) else Activation(float(act))


def activation_apply(alpha: float, x):
    """Scalar (or elementwise) rescaled Leaky ReLU."""
    out = Activation(float(alpha))(x)
    return float(out) if out.ndim == 0 else out


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Params:
    """Weights ``(A, W_1..W_L, B)``; arrays are read-only after construction."""

    A: Matrix
    W: tuple
    B: Matrix

    def __post_init__(self):
        A = self.A if _is_frozen(self.A) else _frozen(self.A)
        B = self.B if _is_frozen(self.B) else _frozen(self.B)
        W = tuple(w if _is_frozen(w) else _frozen(w) for w in self.W)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "W", W)
        if A.ndim != 2 or B.ndim != 2 or not W:
            raise ContractError("Params needs 2-D A, B and at least one hidden matrix")
        m = A.shape[0]
        if B.shape[1] != m or any(w.shape != (m, m) for w in W):
            raise ContractError(
                f"inconsistent Params shapes: A {A.shape}, B {B.shape}, "
                f"W {[w.shape for w in W]}"
            )

    @property
    def shape(self) -> NetworkShape:
        return NetworkShape(p=self.A.shape[1], m=self.A.shape[0], L=len(self.W), d=self.B.shape[0])

    def with_weights(self, W: Sequence[Matrix]) -> "Params":
        """Same frozen A and B, new hidden matrices (same depth)."""
        W = tuple(W)
        if len(W) != len(self.W):
            raise ContractError(f"expected {len(self.W)} hidden matrices, got {len(W)}")
        return Params(self.A, W, self.B)

    def equals(self, other: "Params") -> bool:
        """Bitwise equality of every array."""
        return (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
            and len(self.W) == len(other.W)
            and all(np.array_equal(a, b) for a, b in zip(self.W, other.W))
        )


def _is_frozen(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == np.float64 and not a.flags.writeable


@dataclass(frozen=True)
class ForwardTrace:
    """Hidden states of one input: ``h[0..L]``, pre-activations ``g[1..L]`` (stored as g[0..L-1])."""

    h: list
    g: list
    yhat: np.ndarray


@dataclass(frozen=True)
class BatchTrace:
    """Row-stacked hidden states for a batch; ``h[l]`` and ``g[l-1]`` are ``n x m``."""

    h: list
    g: list
    yhat: np.ndarray


def init_params(shape: NetworkShape, rng: Rng) -> Params:
    """Rescaled He initialization: A ~ N(0, 1/m), W_l ~ N(0, 2/m), B ~ N(0, 1/d).

    Draw order is A, W_1, ..., W_L, B, each row-major.
    """
    p, m, L, d = shape.p, shape.m, shape.L, shape.d
    A = gaussian_matrix(rng, m, p, math.sqrt(1.0 / m))
    W = tuple(gaussian_matrix(rng, m, m, math.sqrt(2.0 / m)) for _ in range(L))
    B = gaussian_matrix(rng, d, m, math.sqrt(1.0 / d))
    return Params(A, W, B)


def forward_batch(params: Params, act, X) -> BatchTrace:
    act = as_activation(act)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != params.A.shape[1]:
        raise ContractError(f"input of shape {X.shape} does not match p={params.A.shape[1]}")
    h = [X @ params.A.T]
    g = []
    for w in params.W:
        pre = h[-1] @ w.T
        g.append(pre)
        h.append(act(pre))
    return BatchTrace(h=h, g=g, yhat=h[-1] @ params.B.T)


def forward(params: Params, act, x) -> ForwardTrace:
    """Single-input forward pass capturing every hidden state."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ContractError(f"forward expects a vector, got shape {x.shape}")
    tr = forward_batch(params, act, x[None, :])
    return ForwardTrace(h=[v[0] for v in tr.h], g=[v[0] for v in tr.g], yhat=tr.yhat[0])


def predict(params: Params, act, X) -> np.ndarray:
    """Network outputs for a batch, without keeping hidden states."""
    act = as_activation(act)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.A.shape[1]:
        raise ContractError(f"input of shape {X.shape} does not match p={params.A.shape[1]}")
    h = X @ params.A.T
    for w in params.W:
        h = act(h @ w.T)
    return h @ params.B.T
