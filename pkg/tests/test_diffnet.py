import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advstego.diffnet import (
    Layer,
    Network,
    TrainConfig,
    accuracy,
    forward,
    grad_input,
    grad_params,
    init_network,
    loss,
    predict,
    predict_from_logits,
    softmax,
    train,
)
from advstego.errors import DimensionError, LabelError, ModelError
from tests.conftest import random_net
from tests.oracles import (
    fd_grad_input,
    fd_grad_params,
    loop_forward,
    loop_softmax_ce,
    max_rel_error,
)


def linear_net(weights, bias):
    return Network([Layer(np.array(weights, float), np.array(bias, float), "identity")])


# -- forward -----------------------------------------------------------------

def test_forward_identity_layer():
    net = linear_net(np.eye(2), [0, 0])
    np.testing.assert_array_equal(forward(net, [0.2, 0.8]), [0.2, 0.8])


def test_forward_hand_arithmetic():
    net = linear_net([[1, 1], [0, 0]], [0, 1])
    np.testing.assert_allclose(forward(net, [0.5, 0.5]), [1.0, 1.0])


def test_forward_matches_loop_oracle():
    net = init_network([4, 3, 2], seed=3)
    net.layers[0].bias[:] = [0.1, -0.2, 0.3]
    x = np.random.default_rng(0).uniform(0, 1, 4)
    np.testing.assert_allclose(forward(net, x), loop_forward(net, x), rtol=0, atol=1e-12)


def test_forward_rejects_bad_shape():
    net = init_network([4, 2], seed=0)
    with pytest.raises(DimensionError):
        forward(net, np.zeros(5))


def test_forward_does_not_mutate():
    net = init_network([6, 5, 3], seed=1)
    before = net.copy()
    forward(net, np.ones(6) * 0.5)
    assert net.equals(before)


# -- predict / softmax -------------------------------------------------------

def test_predict_uniform_logits():
    pred = predict_from_logits(np.zeros(5))
    assert pred.label == 0
    assert pred.confidence == pytest.approx(0.2)
    np.testing.assert_allclose(pred.probabilities, np.full(5, 0.2))


def test_predict_two_logits():
    pred = predict_from_logits(np.array([2.0, 0.0]))
    e2 = math.exp(2)
    np.testing.assert_allclose(pred.probabilities, [e2 / (e2 + 1), 1 / (e2 + 1)], rtol=1e-14)
    assert pred.probabilities[0] == pytest.approx(0.8808, abs=1e-4)
    assert pred.label == 0


def test_predict_dominant_logit():
    pred = predict_from_logits(np.array([0.0, 0.0, 10.0]))
    assert pred.label == 2
    assert pred.confidence > 0.9999


def test_predict_tie_breaks_to_lowest_index():
    pred = predict_from_logits(np.array([0.5, 3.0, 3.0, -1.0]))
    assert pred.label == 1


def test_predict_via_network():
    net = linear_net([[1, 0], [0, 1]], [0, 0])
    pred = predict(net, [0.9, 0.1])
    assert pred.label == 0
    assert pred.confidence == pred.probabilities.max()


def test_softmax_extreme_logits_are_finite():
    p = softmax(np.array([1000.0, -1000.0, 999.0]))
    assert np.all(np.isfinite(p))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


finite_logits = st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=12)
# Gaps beyond ~36 saturate float64 to exactly 0 or 1.
moderate_logits = st.lists(st.floats(-15, 15, allow_nan=False), min_size=2, max_size=12)


@given(moderate_logits)
def test_softmax_normalised(logits):
    p = softmax(np.array(logits))
    assert abs(p.sum() - 1.0) <= 1e-9
    assert np.all(p > 0) and np.all(p < 1)


@given(finite_logits, st.floats(-100, 100, allow_nan=False))
def test_softmax_shift_invariant(logits, c):
    z = np.array(logits)
    assert np.max(np.abs(softmax(z) - softmax(z + c))) < 1e-12


@given(finite_logits)
def test_prediction_invariants(logits):
    pred = predict_from_logits(np.array(logits))
    assert pred.confidence == pred.probabilities[pred.label] == pred.probabilities.max()
    assert pred.label == int(np.flatnonzero(pred.probabilities == pred.probabilities.max())[0])


# -- loss --------------------------------------------------------------------

def test_loss_uniform_is_log_c():
    net = linear_net(np.zeros((3, 2)), [0, 0, 0])
    assert loss(net, [0.3, 0.7], 1) == pytest.approx(math.log(3), rel=1e-14)


def test_loss_perfect_prediction_near_zero():
    net = linear_net([[0, 0], [0, 0]], [50, 0])
    assert 0 <= loss(net, [0.5, 0.5], 0) < 1e-20


def test_loss_closed_form():
    # logits [1, 2]: -log softmax[0] = ln(1 + e), -log softmax[1] = ln(1 + 1/e)
    net = linear_net(np.eye(2), [0, 0])
    assert loss(net, [1.0, 2.0], 0) == pytest.approx(math.log(1 + math.e), rel=1e-14)
    assert loss(net, [1.0, 2.0], 1) == pytest.approx(math.log(1 + math.exp(-1)), rel=1e-14)
    assert loss(net, [1.0, 2.0], 1) == pytest.approx(0.3133, abs=1e-4)


def test_loss_matches_loop_oracle():
    net = random_net(11)
    x = np.random.default_rng(1).uniform(0, 1, net.input_dim)
    logits = loop_forward(net, x)
    assert loss(net, x, 1) == pytest.approx(loop_softmax_ce(list(logits), 1), rel=1e-12)


@pytest.mark.parametrize("y", [-1, 3, 1.0, True])
def test_loss_label_errors(y):
    net = init_network([2, 3], seed=0)
    with pytest.raises(LabelError):
        loss(net, [0.1, 0.2], y)


# -- gradients ---------------------------------------------------------------

def test_grad_input_zero_weights():
    net = linear_net(np.zeros((3, 4)), [0.1, 0.2, 0.3])
    np.testing.assert_array_equal(grad_input(net, np.full(4, 0.5), 2), np.zeros(4))


def test_grad_input_linear_closed_form():
    rng = np.random.default_rng(5)
    W = rng.normal(size=(3, 5))
    b = rng.normal(size=3)
    net = linear_net(W, b)
    x = rng.uniform(0, 1, 5)
    y = 1
    z = W @ x + b
    p = np.exp(z - z.max()) / np.exp(z - z.max()).sum()
    onehot = np.eye(3)[y]
    np.testing.assert_allclose(grad_input(net, x, y), W.T @ (p - onehot), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_grad_input_finite_difference(seed):
    net = random_net(seed)
    x = np.random.default_rng(seed + 100).uniform(0, 1, net.input_dim)
    y = seed % net.num_classes
    assert max_rel_error(grad_input(net, x, y), fd_grad_input(net, x, y)) <= 1e-5


@pytest.mark.parametrize("seed", range(5))
def test_grad_params_finite_difference(seed):
    net = random_net(seed + 50, max_dim=12)
    x = np.random.default_rng(seed).uniform(0, 1, net.input_dim)
    y = 0
    analytic = grad_params(net, x, y)
    numeric = fd_grad_params(net, x, y)
    for (dw, db), (nw, nb) in zip(analytic, numeric):
        assert dw.shape == nw.shape and db.shape == nb.shape
        assert max_rel_error(dw, nw) <= 1e-5
        assert max_rel_error(db, nb) <= 1e-5


def test_grad_params_zero_input():
    net = random_net(7)
    grads = grad_params(net, np.zeros(net.input_dim), 1)
    np.testing.assert_array_equal(grads[0][0], 0.0)
    assert np.any(grads[-1][1] != 0)


def test_gradient_step_decreases_loss():
    net = random_net(9)
    x = np.random.default_rng(9).uniform(0, 1, net.input_dim)
    before = loss(net, x, 0)
    for layer, (dw, db) in zip(net.layers, grad_params(net, x, 0)):
        layer.weights -= 1e-3 * dw
        layer.bias -= 1e-3 * db
    assert loss(net, x, 0) < before


# -- network construction ----------------------------------------------------

def test_network_rejects_broken_chain():
    with pytest.raises(DimensionError):
        Network([Layer(np.zeros((3, 2)), np.zeros(3), "relu"),
                 Layer(np.zeros((2, 4)), np.zeros(2), "identity")])


def test_network_requires_linear_head_and_two_classes():
    with pytest.raises(ModelError):
        Network([Layer(np.zeros((3, 2)), np.zeros(3), "relu")])
    with pytest.raises(ModelError):
        Network([Layer(np.zeros((1, 2)), np.zeros(1), "identity")])


def test_init_glorot_bounds_and_determinism():
    a = init_network([784, 128, 64, 4], seed=1)
    b = init_network([784, 128, 64, 4], seed=1)
    assert a.equals(b)
    for layer in a.layers:
        limit = math.sqrt(6 / (layer.input_dim + layer.output_dim))
        assert np.abs(layer.weights).max() <= limit
    assert [l.activation for l in a.layers] == ["relu", "relu", "identity"]


# -- training ----------------------------------------------------------------

def blobs(n=200, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    centers = np.array([[0.25] * 8, [0.75] * 8])
    X = np.clip(centers[y] + rng.normal(0, 0.08, size=(n, 8)), 0, 1)
    return X, y


def test_train_separable_blobs():
    X, y = blobs()
    result = train(init_network([8, 16, 2], seed=0), X, y, TrainConfig(epochs=50, seed=0))
    assert accuracy(result.network, X, y) >= 0.99
    assert result.loss_history[-1] < result.loss_history[0]


def test_train_zero_learning_rate_is_identity():
    X, y = blobs(64)
    net = init_network([8, 16, 2], seed=3)
    result = train(net, X, y, TrainConfig(epochs=3, learning_rate=0.0))
    assert result.network.equals(net)


def test_train_deterministic_and_non_mutating():
    X, y = blobs(64)
    net = init_network([8, 6, 2], seed=3)
    snapshot = net.copy()
    a = train(net, X, y, TrainConfig(epochs=4, seed=5))
    b = train(net, X, y, TrainConfig(epochs=4, seed=5))
    assert a.network.equals(b.network)
    assert a.loss_history == b.loss_history
    assert net.equals(snapshot)


def test_train_errors():
    net = init_network([8, 2], seed=0)
    with pytest.raises(DimensionError):
        train(net, np.zeros((0, 8)), np.zeros(0, int))
    with pytest.raises(DimensionError):
        train(net, np.zeros((4, 7)), np.zeros(4, int))
    with pytest.raises(LabelError):
        train(net, np.zeros((4, 8)), np.array([0, 1, 2, 0]))


def test_trained_shapes_model(trained, shapes):
    from advstego.data import stack_unit

    assert trained.loss_history[-1] < trained.loss_history[0]
    assert accuracy(trained.network, stack_unit(shapes.test_images), shapes.test_labels) >= 0.90


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_forward_deterministic(seed):
    net = random_net(seed, max_dim=10)
    x = np.random.default_rng(seed).uniform(0, 1, net.input_dim)
    assert forward(net, x).tobytes() == forward(net.copy(), x.copy()).tobytes()
