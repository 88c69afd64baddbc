"""Unsupervised transfer by fine-tuning with per-layer MK-MMD penalties.

The transfer network is the multi-label trunk followed by a single attribute
head, flattened into one :class:`DenseNetwork`. Its objective on a
(source batch, target batch) pair is

    total = sum_l mult_l * MMD^2_l(source acts, target acts) + alpha * softmax loss

with the softmax term evaluated on the labelled source batch only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import checkpoint as ckpt_io
from .config import TrainConfig
from .data import LabeledDomain, UnlabeledDomain
from .errors import ArgumentError, DegenerateDataError, NumericError, ShapeError, TrainingError
from .grouping import AttributeGrouping
from .mmd import DEFAULT_SCALES, KernelFamily, mkmmd_grad, mkmmd_sq
from .multilabel import MultiLabelModel, attribute_loss, attribute_loss_grad, softmax_prob
from .nncore import DenseNetwork, add_grads, backward, concat_networks, forward, freeze_prefix, sgd_step

SAME_GROUP_ALPHA = 1.0
CROSS_GROUP_ALPHA = 0.1


@dataclass(frozen=True)
class TransferModel:
    net: DenseNetwork
    trunk_depth: int
    attribute: str

    def __post_init__(self):
        if not 1 <= self.trunk_depth < len(self.net):
            raise ArgumentError(f"trunk depth {self.trunk_depth} invalid for {len(self.net)} layers")
        if self.net.output_dim != 2:
            raise ShapeError("transfer network must end in 2 logits")


@dataclass(frozen=True)
class TransferTask:
    source: LabeledDomain
    source_attribute: str
    target: UnlabeledDomain
    target_attribute: str | None = None
    alpha: float = 1.0
    mmd_layers: tuple[int, ...] | None = None
    # None: weight 1 on every MMD layer
    mmd_multipliers: tuple[float, ...] | None = None
    freeze_depth: int | None = None
    kernels: KernelFamily | None = None
    kernel_scales: tuple[float, ...] = DEFAULT_SCALES
    estimator: str = "biased"

    def __post_init__(self):
        if self.alpha < 0:
            raise ArgumentError("alpha must be nonnegative")
        self.source.column(self.source_attribute)
        if self.source.features.shape[1] != self.target.features.shape[1]:
            raise ShapeError("source and target feature widths differ")
        if self.mmd_multipliers is not None:
            object.__setattr__(self, "mmd_multipliers", tuple(float(m) for m in self.mmd_multipliers))
        if self.mmd_layers is not None:
            object.__setattr__(self, "mmd_layers", tuple(int(i) for i in self.mmd_layers))
            if self.mmd_multipliers is not None and len(self.mmd_layers) != len(self.mmd_multipliers):
                raise ArgumentError("one MMD multiplier per MMD layer required")

    @property
    def source_labels(self) -> np.ndarray:
        return self.source.labels[:, self.source.column(self.source_attribute)]

    def without_eval_labels(self) -> "TransferTask":
        return replace(self, target=self.target.training_view())


@dataclass(frozen=True)
class TransferLoss:
    total: float
    mmd_components: tuple[float, ...]
    source_softmax: float


@dataclass(frozen=True)
class TransferEpochMetrics:
    epoch: int
    total: float
    mmd_components: tuple[float, ...]
    source_softmax: float
    target_accuracy: float | None

    @property
    def mmd_sum(self) -> float:
        return float(sum(self.mmd_components))


@dataclass(frozen=True)
class DirectTransferResult:
    accuracy: float | None
    decisions: np.ndarray
    probabilities: np.ndarray


def source_network(model: MultiLabelModel, attribute: str) -> TransferModel:
    """Trunk plus the head of ``attribute`` as one network."""
    try:
        i = model.attribute_names.index(attribute)
    except ValueError:
        raise ArgumentError(f"model has no head for {attribute!r}") from None
    net = concat_networks(model.trunk, model.heads[i].net)
    return TransferModel(net, len(model.trunk), attribute)


def default_mmd_layers(model: TransferModel) -> tuple[int, ...]:
    # last trunk layer, then the two hidden head layers ahead of the logits
    n = len(model.net)
    layers = tuple(i for i in range(n - 4, n - 1) if i >= 0)
    return layers


def default_freeze_depth(model: TransferModel) -> int:
    return model.trunk_depth // 2


def resolve_layers(model: TransferModel, task: TransferTask) -> tuple[int, ...]:
    layers = task.mmd_layers if task.mmd_layers is not None else default_mmd_layers(model)
    for i in layers:
        if not 0 <= i < len(model.net) - 1:
            raise ArgumentError(f"MMD layer {i} is not a hidden layer of a {len(model.net)}-layer network")
    if task.mmd_multipliers is not None and len(layers) != len(task.mmd_multipliers):
        raise ArgumentError(f"{len(layers)} MMD layers but {len(task.mmd_multipliers)} multipliers")
    return layers


def resolve_multipliers(task: TransferTask, layers) -> tuple[float, ...]:
    return task.mmd_multipliers if task.mmd_multipliers is not None else (1.0,) * len(layers)


def resolve_freeze(model: TransferModel, task: TransferTask) -> int:
    k = task.freeze_depth if task.freeze_depth is not None else default_freeze_depth(model)
    if not 0 <= k <= len(model.net):
        raise ArgumentError(f"freeze depth {k} outside [0, {len(model.net)}]")
    return k


def _check_batches(model, xs, ys, xt):
    xs = np.asarray(xs, dtype=np.float64)
    xt = np.asarray(xt, dtype=np.float64)
    ys = np.asarray(ys)
    if xs.shape[0] == 0 or xt.shape[0] == 0:
        raise ArgumentError("transfer loss needs nonempty source and target batches")
    for x in (xs, xt):
        if x.ndim != 2 or x.shape[1] != model.net.input_dim:
            raise ShapeError(f"batch shape {x.shape} does not match network input {model.net.input_dim}")
    if ys.shape != (xs.shape[0],):
        raise ShapeError("one source label per source sample required")
    return xs, ys, xt


def transfer_loss(model: TransferModel, task: TransferTask, xs, ys, xt) -> TransferLoss:
    xs, ys, xt = _check_batches(model, xs, ys, xt)
    layers = resolve_layers(model, task)
    acts_s = forward(model.net, xs)
    acts_t = forward(model.net, xt)
    comps = []
    for layer, mult in zip(layers, resolve_multipliers(task, layers)):
        a_s, a_t = acts_s[layer + 1], acts_t[layer + 1]
        comps.append(mult * mkmmd_sq(a_s, a_t, task.kernels, task.estimator, task.kernel_scales).value)
    ls = attribute_loss(acts_s[-1], ys)
    return TransferLoss(float(sum(comps) + task.alpha * ls), tuple(comps), ls)


def transfer_loss_and_grads(model: TransferModel, task: TransferTask, xs, ys, xt):
    xs, ys, xt = _check_batches(model, xs, ys, xt)
    layers = resolve_layers(model, task)
    acts_s = forward(model.net, xs)
    acts_t = forward(model.net, xt)
    extra_s, extra_t, comps = {}, {}, []
    for layer, mult in zip(layers, resolve_multipliers(task, layers)):
        a_s, a_t = acts_s[layer + 1], acts_t[layer + 1]
        # kernels=None: bandwidths from this batch pair, held constant for the step
        value, g_s, g_t = mkmmd_grad(a_s, a_t, task.kernels, task.estimator, task.kernel_scales)
        comps.append(mult * value.value)
        extra_s[layer] = extra_s.get(layer, 0.0) + mult * g_s
        extra_t[layer] = extra_t.get(layer, 0.0) + mult * g_t
    ls, dlogits = attribute_loss_grad(acts_s[-1], ys)
    grads_s, _ = backward(model.net, acts_s, task.alpha * dlogits, extra_s)
    grads_t, _ = backward(model.net, acts_t, None, extra_t)
    loss = TransferLoss(float(sum(comps) + task.alpha * ls), tuple(comps), ls)
    return loss, add_grads(grads_s, grads_t)


def predict_target(model: TransferModel, features) -> tuple[np.ndarray, np.ndarray]:
    probs = softmax_prob(forward(model.net, features)[-1])
    return probs.argmax(axis=1), probs


def _target_accuracy(model: TransferModel, task: TransferTask) -> float | None:
    if task.target.eval_labels is None:
        return None
    name = task.target_attribute or task.source_attribute
    decisions, _ = predict_target(model, task.target.features)
    return float((decisions == task.target.eval_column(name)).mean())


def direct_transfer(model: TransferModel, task: TransferTask) -> DirectTransferResult:
    """Apply the source-trained network to target features without adaptation."""
    decisions, probs = predict_target(model, task.target.features)
    return DirectTransferResult(_target_accuracy(model, task), decisions, probs)


def _epoch(net_model, task, src_x, src_y, tgt_x, config, rng, epoch):
    m, n = src_x.shape[0], tgt_x.shape[0]
    b = config.batch_size
    src_order = rng.permutation(m)
    tgt_order = rng.permutation(n)
    min_rows = 2 if task.estimator == "unbiased" else 1
    rows, sizes = [], []
    model = net_model
    for step in range(math.ceil(m / b)):
        si = src_order[step * b:(step + 1) * b]
        if len(si) < min_rows:
            continue
        ti = np.take(tgt_order, np.arange(step * b, step * b + len(si)), mode="wrap")
        try:
            loss, grads = transfer_loss_and_grads(model, task, src_x[si], src_y[si], tgt_x[ti])
        except (NumericError, DegenerateDataError) as exc:
            raise TrainingError(f"epoch {epoch}: {exc}") from None
        if not np.isfinite(loss.total):
            raise TrainingError(f"transfer loss became non-finite in epoch {epoch}")
        try:
            model = replace(model, net=sgd_step(model.net, grads, config.learning_rate))
        except TrainingError as exc:
            raise TrainingError(f"epoch {epoch}: {exc}") from None
        rows.append([loss.total, *loss.mmd_components, loss.source_softmax])
        sizes.append(len(si))
    if not rows:
        raise ArgumentError(f"no minibatch of at least {min_rows} rows in epoch {epoch}")
    means = np.average(np.array(rows), axis=0, weights=sizes)
    return model, means


def train_tnet(model: TransferModel, task: TransferTask, config: TrainConfig):
    """Freeze a prefix, then run seeded minibatch SGD on the transfer objective.

    Each step pairs a source minibatch with an equal-size target minibatch.
    Training only ever touches ``task.target.training_view()``; the target's
    evaluation labels feed the per-epoch ``target_accuracy`` metric and nothing
    else. The returned network keeps the input's frozen flags.
    """
    k = resolve_freeze(model, task)
    resolve_layers(model, task)
    original_flags = [layer.frozen for layer in model.net.layers]
    train_task = task.without_eval_labels()
    work = replace(model, net=freeze_prefix(model.net, k))
    src_x, src_y = task.source.features, task.source_labels
    tgt_x = train_task.target.features
    if len(src_x) == 0 or len(tgt_x) == 0:
        raise ArgumentError("transfer needs nonempty source and target domains")
    rng = np.random.default_rng(config.seed)
    history = []
    for epoch in range(config.epochs):
        work, means = _epoch(work, train_task, src_x, src_y, tgt_x, config, rng, epoch)
        n_mmd = len(means) - 2
        history.append(
            TransferEpochMetrics(
                epoch,
                float(means[0]),
                tuple(float(v) for v in means[1:1 + n_mmd]),
                float(means[-1]),
                _target_accuracy(work, task),
            )
        )
    layers = tuple(replace(layer, frozen=flag) for layer, flag in zip(work.net.layers, original_flags))
    return replace(work, net=DenseNetwork(layers, work.net.input_dim)), history


def alpha_policy(grouping: AttributeGrouping, names: Sequence[str], source_attr: str, target_attr: str) -> float:
    """1.0 when both attributes share a group, 0.1 otherwise."""
    names = list(names)
    for a in (source_attr, target_attr):
        if a not in names:
            raise ArgumentError(f"attribute {a!r} is not in the grouping")
    same = grouping.same_group(names.index(source_attr), names.index(target_attr))
    return SAME_GROUP_ALPHA if same else CROSS_GROUP_ALPHA


def layer_embeddings(model: TransferModel, features, layers: Sequence[int]) -> dict[int, np.ndarray]:
    acts = forward(model.net, features)
    return {i: acts[i + 1] for i in layers}


def metrics_csv(history: Sequence[TransferEpochMetrics]) -> str:
    n_mmd = len(history[0].mmd_components) if history else 3
    header = ["epoch", "total"] + [f"mmd{i}" for i in range(n_mmd)] + ["source_softmax", "target_accuracy"]
    lines = [",".join(header)]
    for h in history:
        acc = "" if h.target_accuracy is None else f"{h.target_accuracy:.6f}"
        vals = [str(h.epoch), f"{h.total:.10g}"] + [f"{v:.10g}" for v in h.mmd_components]
        lines.append(",".join(vals + [f"{h.source_softmax:.10g}", acc]))
    return "\n".join(lines) + "\n"


def task_from_config(
    source: LabeledDomain,
    source_attribute: str,
    target: UnlabeledDomain,
    target_attribute: str | None,
    config: TrainConfig,
    alpha: float | None = None,
) -> TransferTask:
    return TransferTask(
        source=source,
        source_attribute=source_attribute,
        target=target,
        target_attribute=target_attribute,
        alpha=config.alpha if alpha is None else alpha,
        mmd_layers=config.mmd_layers,
        mmd_multipliers=config.mmd_multipliers,
        freeze_depth=config.freeze_depth,
        kernel_scales=config.kernel_scales,
        estimator=config.estimator,
    )


def to_checkpoint(model: TransferModel, seed: int = 0, config_hash: str = "") -> ckpt_io.Checkpoint:
    meta = {"kind": "tnet", "attribute": model.attribute, "trunk_depth": model.trunk_depth}
    return ckpt_io.Checkpoint({"net": model.net}, seed, config_hash, meta)


def from_checkpoint(ckpt: ckpt_io.Checkpoint) -> TransferModel:
    if ckpt.meta.get("kind") != "tnet":
        raise ArgumentError("checkpoint does not hold a transfer model")
    return TransferModel(ckpt.networks["net"], int(ckpt.meta["trunk_depth"]), ckpt.meta["attribute"])
