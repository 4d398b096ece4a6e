import math

import numpy as np
import pytest

from _support import ACCEPTANCE_SEED
from leakylab.data import Dataset, SyntheticConfig, gen_synthetic
from leakylab.errors import ContractError
from leakylab.grad import Gradients, backprop, batch_loss
from leakylab.lab import (grad_bound_ratios, halving_steps, hidden_norm_stats, hidden_norm_sweep,
                          layer_separation_stats, local_direction, random_direction,
                          taylor_residual_scan)
from leakylab.linalg import Rng
from leakylab.net import NetworkShape, forward_batch, init_params, predict


@pytest.fixture(scope="module")
def desk():
    data = gen_synthetic(SyntheticConfig(n=40, seed=ACCEPTANCE_SEED))
    params = init_params(NetworkShape(5, 128, 3, 1), Rng(ACCEPTANCE_SEED + 4))
    return params, data


# --- oracles ------------------------------------------------------------------


def test_halving_steps():
    ts = halving_steps()
    assert len(ts) == 10 and ts[0] == 1e-2 and ts[-1] == 1e-2 / 2**9
    assert halving_steps(1.0, 1.0) == [1.0]


def test_norm_stats_frozen():
    st = hidden_norm_stats(NetworkShape(1, 200, 2, 1), 0.0, 5, Rng(ACCEPTANCE_SEED))
    assert st.trials == 5 and len(st.layers) == 3 and len(st.ratio_means) == 2
    assert st.layers[0].mean == pytest.approx(float(st.norms[:, 0].mean()), rel=1e-15)
    # trial 0 by hand: seeds come from the stream, input is e_1, activation is rescaled ReLU
    params = init_params(NetworkShape(1, 200, 2, 1), Rng(int(Rng(ACCEPTANCE_SEED).u64s(1)[0])))
    h = params.A[:, 0]
    for w in params.W:
        h = np.maximum(w @ h, 0.0)
    assert st.norms[0, 2] == pytest.approx(np.linalg.norm(h), rel=1e-13)
    # frozen regression value
    assert st.layers[2].mean == pytest.approx(1.0415740268613654, rel=1e-12)


def test_separation_layer_zero_is_input_map():
    X = np.eye(3)[:2]
    data = Dataset(X, np.zeros((2, 1)))
    params = init_params(NetworkShape(3, 64, 2, 1), Rng(5))
    sep = layer_separation_stats(params, 0.05, data)
    assert sep.min_distance[0] == pytest.approx(np.linalg.norm(params.A @ (X[0] - X[1])), rel=1e-14)
    assert len(sep.min_distance) == 3


def test_duplicated_input_gives_zero_everywhere(desk):
    params, data = desk
    dup = data.subset(list(range(data.n)) + [3])
    sep = layer_separation_stats(params, -1.0, dup)
    assert all(d == 0 for d in sep.min_distance)
    assert all(c == pytest.approx(1.0) for c in sep.max_cos_sq)


def test_taylor_zero_step_is_exact(desk):
    params, data = desk
    rep = taylor_residual_scan(params, 0.05, data, random_direction(params, Rng(1)), [1e-3, 0.0])
    assert rep.residual[1] == 0.0


def test_linear_net_residual_is_quadratic():
    data = gen_synthetic(SyntheticConfig(n=30, seed=4))
    params = init_params(NetworkShape(5, 64, 1, 1), Rng(6))
    rep = taylor_residual_scan(params, 1.0, data, random_direction(params, Rng(7)), halving_steps())
    assert rep.slope == pytest.approx(2.0, abs=0.01)
    # one linear layer: the output moves by t B V h0 / sqrt(2), so R(t) = t^2/2 * sum dy^2
    h0 = data.X @ params.A.T
    dy = h0 @ random_direction(params, Rng(7)).dW[0].T @ params.B.T / math.sqrt(2)
    assert rep.residual[0] == pytest.approx(0.5 * 1e-4 * float(np.sum(dy * dy)), rel=1e-10)


# --- properties ---------------------------------------------------------------


def test_abs_and_identity_share_norm_statistics():
    shape = NetworkShape(1, 500, 3, 1)
    st = hidden_norm_sweep(shape, [1.0, -1.0], 30, Rng(3))
    for a, b in zip(st[1.0].layers, st[-1.0].layers):
        assert abs(a.mean - b.mean) <= 0.05
    # first layer: |x| and x have the same norm
    assert np.array_equal(st[1.0].norms[:, 1], st[-1.0].norms[:, 1])


@pytest.mark.slow
def test_norm_fraction_grows_with_width():
    fracs = []
    for m in (100, 400, 1600):
        st = hidden_norm_stats(NetworkShape(1, m, 3, 1), 0.0, 40, Rng(ACCEPTANCE_SEED), band=(0.9, 1.1))
        fracs.append(st.joint_fraction)
    assert fracs[0] <= fracs[1] <= fracs[2] and fracs[2] > fracs[0]


def test_grad_ratio_fitted_labels_skip():
    data = gen_synthetic(SyntheticConfig(n=10, seed=2))
    shape = NetworkShape(5, 32, 2, 1)
    rng = Rng(9)
    seed = int(Rng(9).u64s(1)[0])
    fitted = Dataset(data.X, predict(init_params(shape, Rng(seed)), 0.0, data.X))
    rep = grad_bound_ratios(shape, [0.0, 0.5], fitted, rng, 1)
    assert rep.skipped == (1, 0) and math.isnan(rep.r[0, 0]) and rep.r[0, 1] > 0
    assert math.isfinite(rep.spread)


def test_grad_upper_ratio_bounded(desk):
    params, data = desk
    rep = grad_bound_ratios(params.shape, [-2, -1, 0, 0.05], data, Rng(2), 3)
    assert all(u <= 10 for u in rep.layer_upper)
    assert rep.spread >= 1


def test_stable_residual_matches_direct_difference(desk):
    params, data = desk
    V = random_direction(params, Rng(8))
    for a in (-1.0, 0.05):
        loss, grads = backprop(params, a, data.X, data.Y)
        inner = sum(float(np.sum(g * v)) for g, v in zip(grads.dW, V.dW))
        for t in (0.5, 0.1):
            moved = params.with_weights([w + t * v for w, v in zip(params.W, V.dW)])
            direct = batch_loss(moved, a, data.X, data.Y) - loss - t * inner
            rep = taylor_residual_scan(params, a, data, V, [t])
            assert rep.residual[0] == pytest.approx(direct, rel=1e-8, abs=1e-12 * loss)


@pytest.mark.parametrize("alpha", [-2.0, -1.0, 0.0, 0.05, 0.5])
def test_local_direction_keeps_activation_pattern(desk, alpha):
    params, data = desk
    V = local_direction(params, alpha, data.X, Rng(11), t_max=1e-2)
    moved = params.with_weights([w + 1e-2 * v for w, v in zip(params.W, V.dW)])
    before = forward_batch(params, alpha, data.X)
    after = forward_batch(moved, alpha, data.X)
    for g0, g1 in zip(before.g, after.g):
        assert np.array_equal(g0 >= 0, g1 >= 0)
    rep = taylor_residual_scan(params, alpha, data, V, halving_steps())
    assert rep.slope == pytest.approx(2.0, abs=1e-3)
    assert abs(rep.residual[-1]) / rep.t[-1] <= 1e-3 * rep.direction_norm * rep.grad_norm


def test_contracts(desk):
    params, data = desk
    V = random_direction(params, Rng(1))
    with pytest.raises(ContractError):
        taylor_residual_scan(params, 0.0, data, V, [1e-3, 1e-2])
    with pytest.raises(ContractError):
        taylor_residual_scan(params, 0.0, data, Gradients(V.dW[:1]), [1e-3])
    with pytest.raises(ContractError):
        grad_bound_ratios(params.shape, [1.0], data, Rng(1), 1)
    with pytest.raises(ContractError):
        hidden_norm_stats(params.shape, 0.0, 0, Rng(1))
    with pytest.raises(ContractError):
        layer_separation_stats(params, 0.0, data.subset([0]))
