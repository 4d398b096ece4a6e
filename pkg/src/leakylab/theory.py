"""Closed-form evaluators for the convergence and generalization bounds.

The bounds are asymptotic (O / Omega with unspecified constants). Every hidden
constant is exposed in :class:`BoundConstants` with default 1.0, so each value
returned here is an order-level bound whose constants the caller supplies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ConvergenceError

ORDER_LEVEL_NOTE = "order-level bound, constants user-supplied"


def rate_factor(alpha):
    """``(1 - a)^2 / (1 + a^2)``: the activation's effect on every rate bound."""
    a = np.asarray(alpha, dtype=np.float64)
    out = (1.0 - a) ** 2 / (1.0 + a * a)
    return float(out) if out.ndim == 0 else out


def rate_factor_derivative(alpha):
    """``-2 (1 - a^2) / (1 + a^2)^2``."""
    a = np.asarray(alpha, dtype=np.float64)
    out = -2.0 * (1.0 - a * a) / (1.0 + a * a) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BoundConstants:
    """Hidden constants, one per asymptotic term."""

    rate_gd: float = 1.0        # c1 in the GD rate
    rate_sgd: float = 1.0       # c2 in the SGD rate
    width_gd: float = 1.0       # Omega(.) in the GD width condition
    gen_train: float = 1.0      # SGD training term O(ln m)
    gen_c1_static: float = 1.0  # t-independent branch of the first min
    gen_c1_time: float = 1.0    # t-dependent branch of the first min
    gen_c2_time: float = 1.0    # t-dependent branch of the second min
    gen_c2_static: float = 1.0  # t-independent branch of the second min
    gen_data: float = 1.0       # data-complexity term

    def replace(self, **kw) -> "BoundConstants":
        unknown = set(kw) - set(self.__dataclass_fields__)
        if unknown:
            raise ContractError(f"unknown bound constants {sorted(unknown)}")
        vals = {k: getattr(self, k) for k in self.__dataclass_fields__}
        vals.update({k: float(v) for k, v in kw.items()})
        return BoundConstants(**vals)


@dataclass(frozen=True)
class BoundInputs:
    n: int
    L: int
    d: int
    m: float
    delta: float
    eta: float
    alpha: float
    b: int | None = None
    tau: float = 0.5
    t: float = 0
    epsilon: float | None = None
    constants: BoundConstants = field(default_factory=BoundConstants)

    def __post_init__(self):
        for name in ("n", "L", "d", "m", "tau"):
            if not getattr(self, name) > 0:
                raise ContractError(f"BoundInputs.{name} must be positive")
        if not 0 < self.delta < 1:
            raise ContractError(f"delta must be in (0, 1), got {self.delta}")
        if not self.alpha < 1:
            raise ContractError(f"the bounds need alpha < 1, got {self.alpha}")
        if self.eta < 0 or self.t < 0:
            raise ContractError("eta and t must be nonnegative")
        if self.b is not None and not 1 <= self.b <= self.n:
            raise ContractError(f"batch size must be in [1, n], got {self.b}")

    @property
    def batch(self) -> int:
        return self.n if self.b is None else self.b


@dataclass(frozen=True)
class RateBound:
    """Rate ``gamma`` clamped into (0, 1]; ``clamped`` flags a degenerate raw value."""

    gamma: float
    raw: float
    clamped: bool
    note: str = ORDER_LEVEL_NOTE

    def __float__(self):
        return self.gamma


def _clamp(raw: float) -> RateBound:
    if raw <= 0:
        return RateBound(np.finfo(float).tiny, raw, True)
    return RateBound(min(raw, 1.0), raw, raw > 1.0)


def gd_rate_bound(inp: BoundInputs) -> RateBound:
    """``1 - c1 f(alpha) eta delta m / (n d)``."""
    c = inp.constants.rate_gd
    raw = 1.0 - c * rate_factor(inp.alpha) * inp.eta * inp.delta * inp.m / (inp.n * inp.d)
    return _clamp(raw)


def sgd_rate_bound(inp: BoundInputs) -> RateBound:
    """``1 - c2 f(alpha) eta b delta m / (n^2 d)``; full batch when ``b`` is unset."""
    c = inp.constants.rate_sgd
    raw = 1.0 - c * rate_factor(inp.alpha) * inp.eta * inp.batch * inp.delta * inp.m / (
        inp.n**2 * inp.d)
    return _clamp(raw)


def epoch_bound(gamma: float, epsilon: float, initial_loss: float) -> float:
    """Epochs ``ln(eps / L0) / ln(gamma)`` until the linear rate reaches ``eps``."""
    if not (0 < gamma <= 1 and epsilon > 0 and initial_loss > 0):
        raise ContractError("epoch_bound needs gamma in (0, 1], positive epsilon and loss")
    if epsilon >= initial_loss:
        return 0.0
    if gamma == 1.0:
        return math.inf
    return math.log(epsilon / initial_loss) / math.log(gamma)


def calibrate_cgamma(gamma_hat_at_zero: float, C0: float = 1.0) -> float:
    """Rate constant ``C0 (1 - gamma_hat(0))`` fitted from the ReLU run."""
    if not 0 < gamma_hat_at_zero <= 1:
        raise ContractError(f"gamma_hat(0) must be in (0, 1], got {gamma_hat_at_zero}")
    return C0 * (1.0 - gamma_hat_at_zero)


def bound_curve(c_gamma: float, alphas):
    """Pairs ``(alpha, 1 - c_gamma f(alpha))``."""
    if c_gamma < 0:
        raise ContractError(f"c_gamma must be >= 0, got {c_gamma}")
    return [(float(a), 1.0 - c_gamma * rate_factor(float(a))) for a in alphas]


@dataclass(frozen=True)
class OptimalityCertificate:
    alpha: float
    grid_size: int
    grid_argmax: float
    max_factor: float
    increasing_below: bool
    decreasing_above: bool
    derivative_max_error: float

    @property
    def ok(self) -> bool:
        return (self.increasing_below and self.decreasing_above
                and self.max_factor <= rate_factor(self.alpha))


def optimal_alpha(lo: float = -10.0, hi: float = 0.99, points: int = 10_000,
                  fd_step: float = 1e-6) -> tuple[float, OptimalityCertificate]:
    """``-1`` together with a grid check that it maximizes the rate factor.

    The grid must show ``f`` strictly increasing on ``[lo, -1)`` and strictly
    decreasing on ``(-1, hi]``; the closed-form derivative is compared with
    central differences on the same grid.
    """
    grid = np.linspace(lo, hi, points)
    f = rate_factor(grid)
    below, above = grid < -1.0, grid > -1.0
    inc = bool(np.all(np.diff(f[below]) > 0)) if below.sum() > 1 else True
    dec = bool(np.all(np.diff(f[above]) < 0)) if above.sum() > 1 else True
    fd = (rate_factor(grid + fd_step) - rate_factor(grid - fd_step)) / (2 * fd_step)
    err = float(np.max(np.abs(fd - rate_factor_derivative(grid))))
    cert = OptimalityCertificate(
        alpha=-1.0,
        grid_size=points,
        grid_argmax=float(grid[int(np.argmax(f))]),
        max_factor=float(f.max()),
        increasing_below=inc,
        decreasing_above=dec,
        derivative_max_error=err,
    )
    return -1.0, cert


@dataclass(frozen=True)
class GenBoundTerms:
    training_term: float
    complexity_term_1: float
    complexity_term_2: float
    data_term: float
    total: float
    complexity_1_branches: tuple
    complexity_2_branches: tuple
    rate: RateBound
    note: str = ORDER_LEVEL_NOTE


def _gen_terms(train, c1, c2, data, rate) -> GenBoundTerms:
    t1, t2 = min(c1), min(c2)
    return GenBoundTerms(train, t1, t2, data, train + t1 + t2 + data, tuple(c1), tuple(c2), rate)


def _log_m(inp: BoundInputs) -> float:
    if inp.m <= 1:
        raise ContractError("generalization bounds need m > 1 (they divide by ln m)")
    return math.log(inp.m)


def gen_bound_gd(inp: BoundInputs, initial_loss: float) -> GenBoundTerms:
    """Generalization bound after ``inp.t`` GD epochs.

    Terms: ``gamma^t L0``; min of a t-independent and a ``t^{4/3}`` branch;
    min of a linear-in-t and a t-independent branch; ``d sqrt(ln m / n)``.
    """
    if initial_loss < 0:
        raise ContractError("initial loss must be nonnegative")
    c = inp.constants
    n, L, d, m, delta, tau, t = inp.n, inp.L, inp.d, inp.m, inp.delta, inp.tau, inp.t
    lm = _log_m(inp)
    rate = gd_rate_bound(inp)
    if inp.epsilon is not None and initial_loss > 0:
        T = epoch_bound(rate.gamma, inp.epsilon, initial_loss)
        if t > T:
            raise ContractError(f"epoch t={t} exceeds the training horizon T={T:.6g}")
    gap = (1 - inp.alpha) / math.sqrt(1 + inp.alpha**2)
    train = rate.gamma**t * initial_loss
    c1 = (
        c.gen_c1_static * d ** (1.5 + tau) * delta**tau * n ** (0.5 + tau) / (L ** (0.5 - tau) * lm),
        c.gen_c1_time * gap * d ** (1 / 3) * t ** (4 / 3) / (m ** (1 / 6) * n ** (2 / 3) * L ** (2 / 3)),
    )
    c2 = (
        c.gen_c2_time * math.sqrt(d * lm) * t / (n * L),
        c.gen_c2_static * n ** (0.5 + tau) * L ** (2 + tau) * d ** (0.5 + tau) / (delta ** (0.5 - tau) * lm),
    )
    data = c.gen_data * d * math.sqrt(lm / n)
    return _gen_terms(train, c1, c2, data, rate)


def gen_bound_sgd(inp: BoundInputs, initial_loss: float | None = None) -> GenBoundTerms:
    """Generalization bound after ``inp.t`` SGD steps with batch size ``inp.b``.

    The training term is ``gamma^t * c * ln m`` unless ``initial_loss`` is
    given, in which case ``gamma^t * initial_loss`` is used.
    """
    c = inp.constants
    n, L, d, m, delta, tau, t, b = inp.n, inp.L, inp.d, inp.m, inp.delta, inp.tau, inp.t, inp.batch
    lm = _log_m(inp)
    rate = sgd_rate_bound(inp)
    gap = (1 - inp.alpha) / math.sqrt(1 + inp.alpha**2)
    scale = c.gen_train * lm if initial_loss is None else initial_loss
    if scale < 0:
        raise ContractError("initial loss must be nonnegative")
    train = rate.gamma**t * scale
    c1 = (
        c.gen_c1_time * gap * d ** (1 / 3) * t ** (4 / 3)
        / (m ** (1 / 6) * n ** (10 / 3) * L**2 * lm ** (8 / 3)),
        c.gen_c1_static * d ** (1.5 + tau) * n ** (2 + tau)
        / (math.sqrt(b) * delta ** (0.5 - tau) * L ** (0.5 - tau) * lm),
    )
    c2 = (
        c.gen_c2_time * math.sqrt(d) * t / (n**3 * L**2 * lm**1.5),
        c.gen_c2_static * n ** (2 + tau) * L ** (2 + tau) * d ** (0.5 + tau)
        / (math.sqrt(b) * delta ** (1 - tau) * lm),
    )
    data = c.gen_data * d * math.sqrt(lm / n)
    return _gen_terms(train, c1, c2, data, rate)


# m / ln^4 m is minimized at m = e^4 with value e^4 / 256
_WIDTH_TURN = math.exp(4.0)
_WIDTH_FLOOR = _WIDTH_TURN / 256.0


def width_requirement(inp: BoundInputs) -> float:
    """Right-hand side ``c (1 + a^2) / (1 - a)^2 * n^5 L^15 d / delta^4``."""
    return (inp.constants.width_gd / rate_factor(inp.alpha)
            * float(inp.n) ** 5 * float(inp.L) ** 15 * inp.d / inp.delta**4)


def solve_width(K: float, rel_tol: float = 1e-12, max_iter: int = 1000) -> float:
    """Smallest ``m`` on the growing branch with ``m / ln^4 m >= K``.

    Fixed-point iteration ``m <- K ln^4 m`` started above the root decreases
    monotonically onto it, so every iterate satisfies the inequality. Returns
    1 when ``K`` is below the minimum of ``m / ln^4 m`` (the condition is
    vacuous).
    """
    if K < 0:
        raise ContractError("width requirement must be nonnegative")
    if K <= _WIDTH_FLOOR:
        return 1.0
    m = max(K, _WIDTH_TURN)
    while m / math.log(m) ** 4 < K:
        m *= 2.0
    for _ in range(max_iter):
        nxt = K * math.log(m) ** 4
        if abs(nxt - m) <= rel_tol * m:
            return max(nxt, m) if nxt / math.log(nxt) ** 4 < K else nxt
        m = nxt
    raise ConvergenceError(f"width fixed point did not converge in {max_iter} iterations")


def width_lower_bound_gd(inp: BoundInputs) -> float:
    return solve_width(width_requirement(inp))
