"""Small feed-forward networks with hand-written backprop.

Matrices are plain float64 numpy arrays, samples in rows. Weight matrices are
stored (out, in) so a layer computes ``act(x @ W.T + b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ShapeError, TrainingError

ACTIVATIONS = ("identity", "relu")


@dataclass(frozen=True)
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str = "relu"
    frozen: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ShapeError(f"bias shape {b.shape} does not match {w.shape[0]} outputs")
        if self.activation not in ACTIVATIONS:
            raise ArgumentError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class DenseNetwork:
    layers: tuple[DenseLayer, ...]
    input_dim: int = field(default=-1)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ArgumentError("a network needs at least one layer")
        object.__setattr__(self, "layers", layers)
        if self.input_dim < 0:
            object.__setattr__(self, "input_dim", layers[0].in_dim)
        if layers[0].in_dim != self.input_dim:
            raise ShapeError(f"first layer takes {layers[0].in_dim} inputs, network declares {self.input_dim}")
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise ShapeError(
                    f"layer {i} takes {layers[i].in_dim} inputs but layer {i - 1} emits {layers[i - 1].out_dim}"
                )

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> list[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    def __len__(self):
        return len(self.layers)


@dataclass(frozen=True)
class LayerGrad:
    weights: np.ndarray
    bias: np.ndarray


def init_network(
    dims: Sequence[int],
    rng: np.random.Generator,
    activations: Sequence[str] | None = None,
) -> DenseNetwork:
    """Glorot-uniform weights, zero biases.

    ``dims`` lists the input width followed by each layer's width. Hidden
    layers default to ReLU and the last layer to identity.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2 or min(dims) < 1:
        raise ArgumentError(f"invalid layer dims {dims}")
    n_layers = len(dims) - 1
    if activations is None:
        activations = ["relu"] * (n_layers - 1) + ["identity"]
    if len(activations) != n_layers:
        raise ArgumentError(f"{len(activations)} activations for {n_layers} layers")
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return DenseNetwork(tuple(layers), dims[0])


def concat_networks(first: DenseNetwork, second: DenseNetwork) -> DenseNetwork:
    return DenseNetwork(first.layers + second.layers, first.input_dim)


def _activate(z, activation):
    if activation == "relu":
        return np.maximum(z, 0.0)
    return z


def forward(net: DenseNetwork, batch: np.ndarray) -> list[np.ndarray]:
    """Run ``batch`` through ``net``.

    Returns ``len(net) + 1`` arrays: the input itself followed by the
    post-activation output of every layer. The last entry is the network output.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ShapeError(f"batch shape {x.shape} does not match network input dim {net.input_dim}")
    acts = [x]
    for layer in net.layers:
        x = _activate(x @ layer.weights.T + layer.bias, layer.activation)
        acts.append(x)
    return acts


def backward(
    net: DenseNetwork,
    activations: Sequence[np.ndarray],
    output_gradient: np.ndarray | None,
    extra_gradients: dict[int, np.ndarray] | None = None,
) -> tuple[list[LayerGrad], np.ndarray]:
    """Backpropagate through ``net``.

    ``output_gradient`` is dLoss/d(output); ``extra_gradients`` maps a layer
    index to an additional dLoss/d(that layer's output), for losses attached
    to hidden layers. Gradients are summed over the batch: any 1/N belongs to
    the loss. Frozen layers report zero parameter gradients but still pass the
    gradient through to their input.
    """
    if len(activations) != len(net) + 1:
        raise ShapeError(f"expected {len(net) + 1} activations, got {len(activations)}")
    n = activations[0].shape[0]
    extra = dict(extra_gradients or {})
    for idx, g in extra.items():
        if not 0 <= idx < len(net):
            raise ShapeError(f"extra gradient for nonexistent layer {idx}")
        if g.shape != activations[idx + 1].shape:
            raise ShapeError(f"extra gradient for layer {idx} has shape {g.shape}, expected {activations[idx + 1].shape}")

    if output_gradient is None:
        grad = np.zeros((n, net.output_dim))
    else:
        grad = np.asarray(output_gradient, dtype=np.float64)
        if grad.shape != activations[-1].shape:
            raise ShapeError(f"output gradient shape {grad.shape} != output shape {activations[-1].shape}")

    grads: list[LayerGrad] = [None] * len(net)  # type: ignore[list-item]
    for i in range(len(net) - 1, -1, -1):
        layer = net.layers[i]
        if i in extra:
            grad = grad + extra[i]
        if layer.activation == "relu":
            # subgradient 0 at the kink
            grad = grad * (activations[i + 1] > 0.0)
        if layer.frozen:
            grads[i] = LayerGrad(np.zeros_like(layer.weights), np.zeros_like(layer.bias))
        else:
            grads[i] = LayerGrad(grad.T @ activations[i], grad.sum(axis=0))
        grad = grad @ layer.weights
    return grads, grad


def sgd_step(net: DenseNetwork, gradients: Sequence[LayerGrad], learning_rate: float) -> DenseNetwork:
    """Return a new network with ``theta - lr * g`` applied to trainable layers."""
    if len(gradients) != len(net):
        raise ShapeError(f"{len(gradients)} gradients for {len(net)} layers")
    new_layers = []
    for i, (layer, g) in enumerate(zip(net.layers, gradients)):
        if g.weights.shape != layer.weights.shape or g.bias.shape != layer.bias.shape:
            raise ShapeError(f"gradient shape mismatch at layer {i}")
        if layer.frozen:
            new_layers.append(layer)
            continue
        if not (np.all(np.isfinite(g.weights)) and np.all(np.isfinite(g.bias))):
            raise TrainingError(f"non-finite gradient at layer {i}")
        new_layers.append(
            replace(
                layer,
                weights=layer.weights - learning_rate * g.weights,
                bias=layer.bias - learning_rate * g.bias,
            )
        )
    return DenseNetwork(tuple(new_layers), net.input_dim)


def freeze_prefix(net: DenseNetwork, k: int) -> DenseNetwork:
    """Mark the first ``k`` layers frozen and the remainder trainable."""
    if not 0 <= k <= len(net):
        raise ArgumentError(f"freeze depth {k} outside [0, {len(net)}]")
    layers = tuple(replace(layer, frozen=i < k) for i, layer in enumerate(net.layers))
    return DenseNetwork(layers, net.input_dim)


def add_grads(a: Sequence[LayerGrad], b: Sequence[LayerGrad]) -> list[LayerGrad]:
    return [LayerGrad(x.weights + y.weights, x.bias + y.bias) for x, y in zip(a, b)]


def flatten_params(net: DenseNetwork) -> np.ndarray:
    parts = []
    for layer in net.layers:
        parts.append(layer.weights.ravel())
        parts.append(layer.bias)
    return np.concatenate(parts)


def unflatten_params(net: DenseNetwork, theta: np.ndarray) -> DenseNetwork:
    """Inverse of :func:`flatten_params`, keeping activations and flags."""
    theta = np.asarray(theta, dtype=np.float64)
    layers = []
    pos = 0
    for layer in net.layers:
        nw = layer.weights.size
        w = theta[pos:pos + nw].reshape(layer.weights.shape)
        pos += nw
        b = theta[pos:pos + layer.out_dim]
        pos += layer.out_dim
        layers.append(replace(layer, weights=w.copy(), bias=b.copy()))
    if pos != theta.size:
        raise ShapeError(f"parameter vector has {theta.size} entries, network needs {pos}")
    return DenseNetwork(tuple(layers), net.input_dim)


def flatten_grads(grads: Sequence[LayerGrad]) -> np.ndarray:
    parts = []
    for g in grads:
        parts.append(g.weights.ravel())
        parts.append(g.bias)
    return np.concatenate(parts)


def networks_equal(a: DenseNetwork, b: DenseNetwork) -> bool:
    """Bitwise parameter and metadata equality."""
    if len(a) != len(b) or a.input_dim != b.input_dim:
        return False
    for la, lb in zip(a.layers, b.layers):
        if la.activation != lb.activation or la.frozen != lb.frozen:
            return False
        if la.weights.shape != lb.weights.shape:
            return False
        if la.weights.tobytes() != lb.weights.tobytes() or la.bias.tobytes() != lb.bias.tobytes():
            return False
    return True
