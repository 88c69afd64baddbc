"""Central finite-difference checks for every hand-written gradient.

Relative error is the norm-wise ``|a - n| / max(|a| + |n|, 1e-12)`` between
analytic and numeric gradient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .mmd import KernelFamily, mkmmd_grad, mkmmd_sq
from .multilabel import (
    AttributeHead,
    MultiLabelModel,
    attribute_loss,
    attribute_loss_grad,
    build_model,
    multilabel_loss,
    multilabel_loss_and_grads,
)
from .nncore import DenseNetwork, flatten_grads, flatten_params, init_network, unflatten_params
from .transfer import TransferModel, TransferTask, transfer_loss, transfer_loss_and_grads
from .data import LabeledDomain, UnlabeledDomain

EPS = 1e-5
TOLERANCE = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    seed: int
    rel_error: float

    @property
    def passed(self) -> bool:
        return self.rel_error < TOLERANCE


def numeric_gradient(f: Callable[[np.ndarray], float], theta: np.ndarray, eps: float = EPS) -> np.ndarray:
    theta = np.array(theta, dtype=np.float64)
    grad = np.empty_like(theta)
    flat = theta.reshape(-1)
    g = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        up = f(theta)
        flat[k] = orig - eps
        down = f(theta)
        flat[k] = orig
        g[k] = (up - down) / (2.0 * eps)
    return grad


def relative_error(analytic, numeric) -> float:
    a = np.ravel(analytic)
    n = np.ravel(numeric)
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12))


def _model_params(model: MultiLabelModel):
    parts = [flatten_params(model.trunk)] + [flatten_params(h.net) for h in model.heads]
    sizes = [p.size for p in parts]
    return np.concatenate(parts), sizes


def _model_from(model: MultiLabelModel, theta, sizes) -> MultiLabelModel:
    pieces = np.split(theta, np.cumsum(sizes)[:-1])
    trunk = unflatten_params(model.trunk, pieces[0])
    heads = tuple(AttributeHead(h.attribute_id, unflatten_params(h.net, p)) for h, p in zip(model.heads, pieces[1:]))
    return MultiLabelModel(trunk, heads, model.loss_weights, model.attribute_names)


def _jitter_biases(net, rng):
    # zero biases put pre-activations exactly on the ReLU kink whenever the
    # previous layer is fully inactive for a row, where differences are invalid
    layers = []
    for layer in net.layers:
        layers.append(replace(layer, bias=rng.uniform(0.05, 0.3, layer.out_dim)))
    return DenseNetwork(tuple(layers), net.input_dim)


def check_attribute_loss(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    logits = rng.normal(size=(n, 2)) * 2.0
    labels = rng.integers(0, 2, size=n)
    _, analytic = attribute_loss_grad(logits, labels)
    numeric = numeric_gradient(lambda z: attribute_loss(z, labels), logits)
    return CheckResult("softmax_loss", seed, relative_error(analytic, numeric))


def check_multilabel_loss(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 7))
    n_attr = int(rng.integers(1, 5))
    names = [f"a{i}" for i in range(n_attr)]
    model = build_model(d, names, rng, trunk_dims=(6, 5), head_dims=(4, 3), loss_weights=rng.uniform(0.1, 1.0, n_attr))
    model = replace(
        model,
        trunk=_jitter_biases(model.trunk, rng),
        heads=tuple(replace(h, net=_jitter_biases(h.net, rng)) for h in model.heads),
    )
    x = rng.normal(size=(int(rng.integers(2, 7)), d))
    y = rng.integers(0, 2, size=(x.shape[0], n_attr))
    _, tg, hg = multilabel_loss_and_grads(model, x, y)
    analytic = np.concatenate([flatten_grads(tg)] + [flatten_grads(g) for g in hg])
    theta, sizes = _model_params(model)
    numeric = numeric_gradient(lambda t: multilabel_loss(_model_from(model, t, sizes), x, y).total, theta)
    return CheckResult("multilabel_loss", seed, relative_error(analytic, numeric))


def _random_kernels(rng, d=None) -> KernelFamily:
    d = d or int(rng.integers(1, 4))
    beta = rng.dirichlet(np.ones(d))
    beta = beta / beta.sum()
    return KernelFamily(tuple(rng.uniform(0.5, 3.0, d)), tuple(beta))


def check_mkmmd(seed: int, kind: str = "biased") -> CheckResult:
    rng = np.random.default_rng(seed)
    m, n, dim = int(rng.integers(2, 7)), int(rng.integers(2, 7)), int(rng.integers(1, 5))
    xs = rng.normal(size=(m, dim))
    xt = rng.normal(size=(n, dim)) + 0.5
    kernels = _random_kernels(rng)
    _, gs, gt = mkmmd_grad(xs, xt, kernels, kind)
    ns = numeric_gradient(lambda s: mkmmd_sq(s, xt, kernels, kind).value, xs)
    nt = numeric_gradient(lambda t: mkmmd_sq(xs, t, kernels, kind).value, xt)
    return CheckResult(f"mkmmd_{kind}", seed, relative_error(np.concatenate([gs.ravel(), gt.ravel()]),
                                                             np.concatenate([ns.ravel(), nt.ravel()])))


def tiny_transfer_instance(seed: int):
    """A transfer net of width <= 8 with fixed kernels and batches of <= 6 rows."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    net = _jitter_biases(init_network([d, 8, 6, 5, 4, 2], rng), rng)
    model = TransferModel(net, trunk_depth=2, attribute="a")
    m, n = int(rng.integers(2, 7)), int(rng.integers(2, 7))
    xs = rng.normal(size=(m, d))
    ys = rng.integers(0, 2, size=m)
    xt = rng.normal(size=(n, d)) + 0.7
    task = TransferTask(
        source=LabeledDomain(xs, ys[:, None], ("a",)),
        source_attribute="a",
        target=UnlabeledDomain(xt),
        alpha=float(rng.uniform(0.0, 2.0)),
        kernels=_random_kernels(rng, 3),
        mmd_multipliers=tuple(rng.uniform(0.5, 1.5, 3)),
    )
    return model, task, xs, ys, xt


def check_transfer_loss(seed: int) -> CheckResult:
    model, task, xs, ys, xt = tiny_transfer_instance(seed)
    _, grads = transfer_loss_and_grads(model, task, xs, ys, xt)
    theta = flatten_params(model.net)

    def f(t):
        return transfer_loss(TransferModel(unflatten_params(model.net, t), model.trunk_depth, model.attribute),
                             task, xs, ys, xt).total

    return CheckResult("transfer_loss", seed, relative_error(flatten_grads(grads), numeric_gradient(f, theta)))


CHECKS = {
    "softmax_loss": check_attribute_loss,
    "multilabel_loss": check_multilabel_loss,
    "mkmmd_biased": lambda s: check_mkmmd(s, "biased"),
    "mkmmd_unbiased": lambda s: check_mkmmd(s, "unbiased"),
    "transfer_loss": check_transfer_loss,
}


def run_suite(n_seeds: int = 20, components=None) -> list[CheckResult]:
    names = components or list(CHECKS)
    return [CHECKS[name](seed) for name in names for seed in range(n_seeds)]
