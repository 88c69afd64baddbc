"""Shared-trunk multi-label network with one binary softmax head per attribute.

Label code: 0 is the positive class (attribute present), 1 the negative class,
so column 0 of every head's logits scores "present".
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import checkpoint as ckpt_io
from .config import TrainConfig
from .errors import ArgumentError, NumericError, ShapeError, TrainingError
from .nncore import (
    DenseNetwork,
    backward,
    forward,
    init_network,
    sgd_step,
)

POSITIVE, NEGATIVE = 0, 1
N_CLASSES = 2


@dataclass(frozen=True)
class AttributeHead:
    attribute_id: int
    net: DenseNetwork

    def __post_init__(self):
        if self.net.output_dim != N_CLASSES:
            raise ShapeError(f"head {self.attribute_id} emits {self.net.output_dim} logits, expected 2")


@dataclass(frozen=True)
class MultiLabelModel:
    trunk: DenseNetwork
    heads: tuple[AttributeHead, ...]
    loss_weights: np.ndarray
    attribute_names: tuple[str, ...]

    def __post_init__(self):
        heads = tuple(self.heads)
        weights = np.asarray(self.loss_weights, dtype=np.float64)
        names = tuple(self.attribute_names)
        if len(weights) != len(heads) or len(names) != len(heads):
            raise ShapeError("need exactly one loss weight and one name per head")
        for i, head in enumerate(heads):
            if head.attribute_id != i:
                raise ArgumentError(f"head {i} carries attribute id {head.attribute_id}")
            if head.net.input_dim != self.trunk.output_dim:
                raise ShapeError(f"head {i} input {head.net.input_dim} != trunk output {self.trunk.output_dim}")
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "loss_weights", weights)
        object.__setattr__(self, "attribute_names", names)

    @property
    def n_attributes(self) -> int:
        return len(self.heads)

    def with_weights(self, weights) -> "MultiLabelModel":
        return replace(self, loss_weights=np.asarray(weights, dtype=np.float64))


@dataclass(frozen=True)
class AttributeLossTerm:
    attribute: int
    weight: float
    loss: float


@dataclass(frozen=True)
class MultiLabelLoss:
    total: float
    breakdown: tuple[AttributeLossTerm, ...]


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    total_loss: float
    accuracies: tuple[float, ...]


@dataclass(frozen=True)
class Prediction:
    decisions: np.ndarray  # (N, I) label codes
    probabilities: np.ndarray  # (N, I, 2)


def build_model(
    input_dim: int,
    attribute_names: Sequence[str],
    rng: np.random.Generator,
    trunk_dims: Sequence[int] = (32, 32),
    head_dims: Sequence[int] = (32, 16),
    loss_weights=None,
) -> MultiLabelModel:
    names = tuple(attribute_names)
    trunk = init_network([input_dim, *trunk_dims], rng, ["relu"] * len(trunk_dims))
    heads = tuple(
        AttributeHead(i, init_network([trunk_dims[-1], *head_dims, N_CLASSES], rng)) for i in range(len(names))
    )
    if loss_weights is None:
        loss_weights = np.ones(len(names))
    return MultiLabelModel(trunk, heads, loss_weights, names)


def softmax_prob(logits) -> np.ndarray:
    """Row-wise softmax with max subtraction; accepts a vector or a 2-D batch."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NumericError("non-finite logit")
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(z):
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _check_labels(logits, labels):
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[0] == 0:
        raise ArgumentError("attribute loss needs a nonempty 2-D logit batch")
    if labels.shape != (logits.shape[0],):
        raise ShapeError(f"labels shape {labels.shape} does not match {logits.shape[0]} samples")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise ArgumentError("label code outside the head's classes")
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logit")
    return logits, labels.astype(np.intp)


def attribute_loss(logits, labels) -> float:
    """Mean negative log-probability of the true class over the batch."""
    logits, labels = _check_labels(logits, labels)
    logp = _log_softmax(logits)
    return float(-logp[np.arange(len(labels)), labels].mean())


def attribute_loss_grad(logits, labels) -> tuple[float, np.ndarray]:
    logits, labels = _check_labels(logits, labels)
    n = len(labels)
    logp = _log_softmax(logits)
    loss = float(-logp[np.arange(n), labels].mean())
    grad = np.exp(logp)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def _check_batch(model, batch, labels):
    batch = np.asarray(batch, dtype=np.float64)
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.shape[0] != batch.shape[0]:
        raise ShapeError(f"labels shape {labels.shape} does not match batch of {batch.shape[0]}")
    if labels.shape[1] != model.n_attributes:
        raise ArgumentError(f"label matrix has {labels.shape[1]} columns, model has {model.n_attributes} heads")
    return batch, labels


def multilabel_loss(model: MultiLabelModel, batch, labels) -> MultiLabelLoss:
    """Weighted sum of per-attribute softmax losses."""
    batch, labels = _check_batch(model, batch, labels)
    shared = forward(model.trunk, batch)[-1]
    terms = []
    for head in model.heads:
        logits = forward(head.net, shared)[-1]
        i = head.attribute_id
        terms.append(AttributeLossTerm(i, float(model.loss_weights[i]), attribute_loss(logits, labels[:, i])))
    total = float(sum(t.weight * t.loss for t in terms))
    return MultiLabelLoss(total, tuple(terms))


def multilabel_loss_and_grads(model: MultiLabelModel, batch, labels):
    """Loss plus gradients: ``(loss, trunk_grads, [head_grads, ...])``."""
    batch, labels = _check_batch(model, batch, labels)
    trunk_acts = forward(model.trunk, batch)
    shared = trunk_acts[-1]
    shared_grad = np.zeros_like(shared)
    head_grads = []
    terms = []
    for head in model.heads:
        i = head.attribute_id
        w = float(model.loss_weights[i])
        acts = forward(head.net, shared)
        loss_i, dlogits = attribute_loss_grad(acts[-1], labels[:, i])
        terms.append(AttributeLossTerm(i, w, loss_i))
        grads, dshared = backward(head.net, acts, w * dlogits)
        head_grads.append(grads)
        shared_grad += dshared
    trunk_grads, _ = backward(model.trunk, trunk_acts, shared_grad)
    total = float(sum(t.weight * t.loss for t in terms))
    return MultiLabelLoss(total, tuple(terms)), trunk_grads, head_grads


def apply_grads(model: MultiLabelModel, trunk_grads, head_grads, lr: float) -> MultiLabelModel:
    trunk = sgd_step(model.trunk, trunk_grads, lr)
    heads = tuple(replace(h, net=sgd_step(h.net, g, lr)) for h, g in zip(model.heads, head_grads))
    return replace(model, trunk=trunk, heads=heads)


def predict(model: MultiLabelModel, batch) -> Prediction:
    """Per-head argmax; equal probabilities resolve to the positive class."""
    shared = forward(model.trunk, batch)[-1]
    probs = np.stack([softmax_prob(forward(h.net, shared)[-1]) for h in model.heads], axis=1)
    # argmax returns the first maximum, and the positive class is column 0
    decisions = probs.argmax(axis=2)
    return Prediction(decisions, probs)


def accuracy(decisions, labels) -> np.ndarray:
    decisions = np.asarray(decisions)
    labels = np.asarray(labels)
    if decisions.shape != labels.shape:
        raise ShapeError(f"decisions {decisions.shape} vs labels {labels.shape}")
    return (decisions == labels).mean(axis=0)


def iterate_minibatches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train_mnet(
    model: MultiLabelModel,
    features,
    labels,
    config: TrainConfig,
    eval_set=None,
) -> tuple[MultiLabelModel, list[EpochMetrics]]:
    """Seeded minibatch SGD on the weighted multi-label loss.

    Per-epoch metrics hold the mean minibatch loss and per-attribute accuracy,
    measured on ``eval_set = (features, labels)`` when given, else on the
    training data.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.shape[0] == 0:
        raise ArgumentError("empty training set")
    _check_batch(model, features, labels)
    eval_x, eval_y = eval_set if eval_set is not None else (features, labels)
    rng = np.random.default_rng(config.seed)
    history = []
    for epoch in range(config.epochs):
        losses, sizes = [], []
        for idx in iterate_minibatches(features.shape[0], config.batch_size, rng):
            try:
                loss, tg, hg = multilabel_loss_and_grads(model, features[idx], labels[idx])
            except NumericError as exc:
                raise TrainingError(f"loss became non-finite in epoch {epoch}: {exc}") from None
            if not np.isfinite(loss.total):
                raise TrainingError(f"loss became non-finite in epoch {epoch}")
            try:
                model = apply_grads(model, tg, hg, config.learning_rate)
            except TrainingError as exc:
                raise TrainingError(f"epoch {epoch}: {exc}") from None
            losses.append(loss.total)
            sizes.append(len(idx))
        mean_loss = float(np.average(losses, weights=sizes))
        acc = accuracy(predict(model, eval_x).decisions, eval_y)
        history.append(EpochMetrics(epoch, mean_loss, tuple(float(a) for a in acc)))
    return model, history


def metrics_csv(history: Sequence[EpochMetrics], names: Sequence[str]) -> str:
    lines = ["epoch,total_loss," + ",".join(f"acc:{n}" for n in names)]
    for m in history:
        lines.append(f"{m.epoch},{m.total_loss:.10g}," + ",".join(f"{a:.6f}" for a in m.accuracies))
    return "\n".join(lines) + "\n"


def to_checkpoint(model: MultiLabelModel, seed: int = 0, config_hash: str = "") -> ckpt_io.Checkpoint:
    nets = {"trunk": model.trunk}
    for head in model.heads:
        nets[f"head{head.attribute_id}"] = head.net
    meta = {
        "kind": "mnet",
        "attributes": list(model.attribute_names),
        "loss_weights": [float(w) for w in model.loss_weights],
    }
    return ckpt_io.Checkpoint(nets, seed, config_hash, meta)


def from_checkpoint(ckpt: ckpt_io.Checkpoint) -> MultiLabelModel:
    if ckpt.meta.get("kind") != "mnet":
        raise ArgumentError("checkpoint does not hold a multi-label model")
    names = ckpt.meta["attributes"]
    heads = tuple(AttributeHead(i, ckpt.networks[f"head{i}"]) for i in range(len(names)))
    return MultiLabelModel(ckpt.networks["trunk"], heads, np.array(ckpt.meta["loss_weights"]), tuple(names))
