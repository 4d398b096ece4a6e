import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _support import LOSS_KINDS, small_problem
from leakylab.errors import ContractError
from leakylab.grad import (FiniteDiffConfig, Gradients, backprop, batch_loss, finite_diff_grad,
                           grad_norms, gradient_check, relative_error)
from leakylab.linalg import Rng, frobenius_norm_sq
from leakylab.losses import HalfMSE
from leakylab.net import NetworkShape, Params, forward_batch, init_params, predict


def test_perfect_fit_has_zero_gradient():
    params, X, _ = small_problem(HalfMSE(), 0.05)
    Y = predict(params, 0.05, X)
    loss, grads = backprop(params, 0.05, X, Y)
    assert loss == 0.0
    assert all(not g.any() for g in grads.dW)


def test_linear_single_layer_closed_form():
    params = init_params(NetworkShape(3, 5, 1, 2), Rng(8))
    X = Rng(9).normals(12).reshape(4, 3)
    Y = Rng(10).normals(8).reshape(4, 2)
    _, grads = backprop(params, 1.0, X, Y)
    expect = np.zeros((5, 5))
    for x, y in zip(X, Y):
        h0 = params.A @ x
        e = params.B @ (params.W[0] @ h0) / math.sqrt(2) - y
        expect += np.outer(params.B.T @ e, h0) / math.sqrt(2)
    assert np.allclose(grads.dW[0], expect, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("kind", LOSS_KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("alpha", [-1, 0, 0.3])
def test_backprop_matches_differences(kind, alpha):
    params, X, Y = small_problem(kind, alpha, seed=3)
    assert gradient_check(params, alpha, X, Y, kind) <= 1e-5


def test_constant_loss_has_zero_difference_gradient():
    params = init_params(NetworkShape(2, 4, 2, 1), Rng(1))
    flat = Params(params.A, params.W, np.zeros_like(params.B))
    X = np.array([[0.6, 0.8]])
    grads = finite_diff_grad(flat, 0.2, X, np.array([[1.0]]))
    assert all(not g.any() for g in grads.dW)


def test_differences_exact_on_quadratic():
    # p = m = d = 1, linear activation: the loss is a quadratic in the single weight
    params = Params(np.array([[0.7]]), (np.array([[1.3]]),), np.array([[-0.4]]))
    X, Y = np.array([[1.0]]), np.array([[0.25]])
    fd = finite_diff_grad(params, 1.0, X, Y, cfg=FiniteDiffConfig(1e-3)).dW[0][0, 0]
    c = -0.4 * 0.7 / math.sqrt(2)
    exact = c * (c * 1.3 - 0.25)
    assert fd == pytest.approx(exact, rel=1e-9)


def test_fd_config_validation():
    with pytest.raises(ContractError):
        FiniteDiffConfig(0.0)


def test_grad_norms_example():
    per, total = grad_norms(Gradients((np.array([[3.0, 4.0]]),)))
    assert per == [25.0] and total == 25.0
    per, total = grad_norms(Gradients((np.zeros((2, 2)), np.zeros((2, 2)))))
    assert per == [0.0, 0.0] and total == 0.0


def test_grad_norm_total_is_frobenius():
    params, X, Y = small_problem(HalfMSE(), -1)
    _, grads = backprop(params, -1, X, Y)
    assert grad_norms(grads)[1] == frobenius_norm_sq(grads.dW)


@given(st.integers(1, 7), st.integers(0, 500))
@settings(max_examples=25, deadline=None)
def test_gradient_additive_over_disjoint_batches(cut, seed):
    params, X, Y = small_problem(HalfMSE(), -0.5, seed=seed)
    _, whole = backprop(params, -0.5, X, Y)
    _, a = backprop(params, -0.5, X[:cut], Y[:cut])
    _, b = backprop(params, -0.5, X[cut:], Y[cut:])
    for w, ga, gb in zip(whole.dW, a.dW, b.dW):
        s = ga + gb
        assert np.max(np.abs(w - s)) <= 1e-12 * max(np.max(np.abs(w)), 1e-300)


def test_label_scaling_at_zero_output():
    params = init_params(NetworkShape(3, 6, 2, 1), Rng(4))
    x = np.array([[0.0, 0.6, 0.8]])
    # B orthogonal to the last hidden state makes the output zero
    hL = forward_batch(params, 0.0, x).h[-1][0]
    v = np.arange(1.0, 7.0)
    zero_out = Params(params.A, params.W, (v - (v @ hL) / (hL @ hL) * hL)[None, :])
    assert abs(predict(zero_out, 0.0, x)[0, 0]) < 1e-14
    y = np.array([[0.7]])
    _, g1 = backprop(zero_out, 0.0, x, y)
    _, g3 = backprop(zero_out, 0.0, x, 3 * y)
    for a, b in zip(g1.dW, g3.dW):
        assert np.allclose(b, 3 * a, rtol=1e-12, atol=1e-13)


def test_batch_loss_matches_backprop_loss():
    params, X, Y = small_problem(HalfMSE(), 0.05)
    assert batch_loss(params, 0.05, X, Y) == pytest.approx(backprop(params, 0.05, X, Y)[0], rel=1e-14)


def test_relative_error_floor():
    assert relative_error(0.0, 1e-9)[()] == pytest.approx(1e-3)
    assert relative_error(2.0, 1.0)[()] == 0.5


def test_batch_shape_checks():
    params, X, Y = small_problem(HalfMSE(), 0)
    with pytest.raises(ContractError):
        backprop(params, 0, X, Y[:, :1])
    with pytest.raises(ContractError):
        backprop(params, 0, X[:0], Y[:0])
