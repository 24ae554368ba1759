"""Dense ReLU classifier with hand-written reverse-mode gradients.

Tensors are float64 numpy arrays. A network is an ordered list of dense
layers; the last layer is linear and produces logits that are turned into
probabilities by a max-shifted softmax. Gradients are available with respect
to both the parameters (for training) and the input vector (for FGSM).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, LabelError, ModelError

ACTIVATIONS = ("identity", "relu")


@dataclass
class Layer:
    weights: np.ndarray  # (output_dim, input_dim)
    bias: np.ndarray  # (output_dim,)
    activation: str = "relu"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.activation not in ACTIVATIONS:
            raise ModelError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionError(
                f"weights {self.weights.shape} and bias {self.bias.shape} do not agree"
            )

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class Network:
    layers: list[Layer]

    def __post_init__(self):
        if not self.layers:
            raise ModelError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.output_dim != nxt.input_dim:
                raise DimensionError(
                    f"layer chain broken: {prev.output_dim} -> {nxt.input_dim}"
                )
        if self.layers[-1].activation != "identity":
            raise ModelError("final layer must be linear (identity activation)")
        if self.num_classes < 2:
            raise ModelError("classifier needs at least two classes")

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def num_classes(self) -> int:
        return self.layers[-1].output_dim

    @property
    def dims(self) -> list[int]:
        return [self.input_dim] + [layer.output_dim for layer in self.layers]

    def copy(self) -> Network:
        return copy.deepcopy(self)

    def equals(self, other: Network) -> bool:
        """Bit-exact parameter equality."""
        if len(self.layers) != len(other.layers):
            return False
        for a, b in zip(self.layers, other.layers):
            if a.activation != b.activation or a.weights.shape != b.weights.shape:
                return False
            if a.weights.tobytes() != b.weights.tobytes() or a.bias.tobytes() != b.bias.tobytes():
                return False
        return True


@dataclass(frozen=True)
class Prediction:
    label: int
    probabilities: np.ndarray
    confidence: float


def init_network(dims: Sequence[int], seed: int = 42) -> Network:
    """Glorot-uniform weights, zero biases, ReLU on every hidden layer."""
    dims = list(dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise DimensionError(f"invalid layer dims {dims}")
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        act = "identity" if i == len(dims) - 2 else "relu"
        layers.append(Layer(w, np.zeros(fan_out), act))
    return Network(layers)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_input(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise DimensionError(f"input shape {x.shape} does not match input_dim {net.input_dim}")
    return x


def _check_label(net: Network, y) -> int:
    if isinstance(y, (bool, np.bool_)) or not isinstance(y, (int, np.integer)):
        raise LabelError(f"label must be an integer, got {y!r}")
    if not 0 <= y < net.num_classes:
        raise LabelError(f"label {y} outside [0, {net.num_classes})")
    return int(y)


def _forward_cache(net: Network, X: np.ndarray):
    """Batched forward pass; X is (n, input_dim). Returns logits and the
    per-layer (input, pre-activation) pairs needed for backprop."""
    cache = []
    a = X
    for layer in net.layers:
        z = a @ layer.weights.T + layer.bias
        cache.append((a, z))
        a = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return a, cache


def _backward(net: Network, cache, dlogits: np.ndarray):
    """Propagate dL/dlogits (n, C) back through the layers.

    Returns per-layer (dW, db) summed over the batch and dL/dX (n, input_dim).
    """
    grads = [None] * len(net.layers)
    delta = dlogits
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        a_in, z = cache[i]
        if layer.activation == "relu":
            delta = delta * (z > 0)
        grads[i] = (delta.T @ a_in, delta.sum(axis=0))
        delta = delta @ layer.weights
    return grads, delta


def _ce_and_dlogits(logits: np.ndarray, y: np.ndarray):
    z = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(len(y))
    losses = logsumexp - z[rows, y]
    p = softmax(logits)
    p[rows, y] -= 1.0
    return losses, p


def forward(net: Network, x) -> np.ndarray:
    x = _check_input(net, x)
    logits, _ = _forward_cache(net, x[None, :])
    return logits[0]


def forward_batch(net: Network, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise DimensionError(f"batch shape {X.shape} does not match input_dim {net.input_dim}")
    logits, _ = _forward_cache(net, X)
    return logits


def predict_from_logits(logits: np.ndarray) -> Prediction:
    p = softmax(logits)
    label = int(np.argmax(p))  # first maximum wins ties
    return Prediction(label, p, float(p[label]))


def predict(net: Network, x) -> Prediction:
    return predict_from_logits(forward(net, x))


def loss(net: Network, x, y: int) -> float:
    """Cross-entropy of the softmax output against class ``y``."""
    x = _check_input(net, x)
    y = _check_label(net, y)
    logits, _ = _forward_cache(net, x[None, :])
    losses, _ = _ce_and_dlogits(logits, np.array([y]))
    return float(losses[0])


def grad_input(net: Network, x, y: int) -> np.ndarray:
    x = _check_input(net, x)
    y = _check_label(net, y)
    logits, cache = _forward_cache(net, x[None, :])
    _, dlogits = _ce_and_dlogits(logits, np.array([y]))
    _, dx = _backward(net, cache, dlogits)
    return dx[0]


def grad_params(net: Network, x, y: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-layer ``(dW, db)`` of the single-sample loss."""
    x = _check_input(net, x)
    y = _check_label(net, y)
    logits, cache = _forward_cache(net, x[None, :])
    _, dlogits = _ce_and_dlogits(logits, np.array([y]))
    grads, _ = _backward(net, cache, dlogits)
    return grads


def batch_loss_and_grads(net: Network, X: np.ndarray, y: np.ndarray):
    """Mean loss over a batch and the gradient of that mean."""
    logits, cache = _forward_cache(net, X)
    losses, dlogits = _ce_and_dlogits(logits, y)
    grads, _ = _backward(net, cache, dlogits / len(y))
    return float(losses.mean()), grads


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.1
    batch_size: int = 32
    seed: int = 42


@dataclass
class TrainResult:
    network: Network
    loss_history: list[float] = field(default_factory=list)


def train(net: Network, X, y, config: TrainConfig | None = None) -> TrainResult:
    """Mini-batch gradient descent on a copy of ``net``.

    ``loss_history`` holds the mean batch loss of each epoch, measured before
    each step. Shuffling is driven by ``config.seed`` only.
    """
    config = config or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise DimensionError("training set is empty")
    if X.shape[1] != net.input_dim:
        raise DimensionError(f"images have {X.shape[1]} values, network expects {net.input_dim}")
    if len(y) != len(X):
        raise DimensionError(f"{len(X)} images but {len(y)} labels")
    if y.dtype.kind not in "iu" or y.min() < 0 or y.max() >= net.num_classes:
        raise LabelError(f"labels must be integers in [0, {net.num_classes})")
    if config.batch_size < 1 or config.epochs < 0:
        raise ValueError("batch_size must be >= 1 and epochs >= 0")

    net = net.copy()
    rng = np.random.default_rng(config.seed)
    history = []
    for _ in range(config.epochs):
        order = rng.permutation(len(X))
        batch_losses = []
        for start in range(0, len(X), config.batch_size):
            idx = order[start:start + config.batch_size]
            batch_loss, grads = batch_loss_and_grads(net, X[idx], y[idx])
            batch_losses.append(batch_loss)
            if config.learning_rate != 0:
                for layer, (dw, db) in zip(net.layers, grads):
                    layer.weights -= config.learning_rate * dw
                    layer.bias -= config.learning_rate * db
        history.append(float(np.mean(batch_losses)))
    return TrainResult(net, history)


def accuracy(net: Network, X, y) -> float:
    logits = forward_batch(net, X)
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(y)))
