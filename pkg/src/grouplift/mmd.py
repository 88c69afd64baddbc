"""Multi-kernel MMD with a ladder of Gaussian kernels.

Squared MMD under a convex combination of kernels is the same combination of
the per-kernel squared MMDs, so everything is computed per bandwidth from one
shared squared-distance matrix and then mixed by the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DegenerateDataError, NumericError, ShapeError

DEFAULT_SCALES = (0.25, 0.5, 1.0, 2.0, 4.0)
ESTIMATORS = ("biased", "unbiased")


@dataclass(frozen=True)
class KernelFamily:
    bandwidths: tuple[float, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        bw = tuple(float(s) for s in self.bandwidths)
        beta = tuple(float(b) for b in self.coefficients)
        if not bw or len(bw) != len(beta):
            raise ArgumentError("need one coefficient per bandwidth")
        if any(not np.isfinite(s) or s <= 0 for s in bw):
            raise ArgumentError(f"bandwidths must be positive, got {bw}")
        if any(b < 0 for b in beta) or abs(sum(beta) - 1.0) > 1e-12:
            raise ArgumentError(f"coefficients must be nonnegative and sum to 1, got {beta}")
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "coefficients", beta)

    @classmethod
    def uniform(cls, bandwidths: Sequence[float]) -> "KernelFamily":
        d = len(bandwidths)
        return cls(tuple(bandwidths), (1.0 / d,) * d)

    def __len__(self):
        return len(self.bandwidths)


@dataclass(frozen=True)
class MmdValue:
    value: float
    kind: str
    per_kernel: tuple[float, ...]


def gaussian_kernel(x, y, sigma: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"kernel arguments differ in shape: {x.shape} vs {y.shape}")
    if sigma <= 0:
        raise ArgumentError("sigma must be positive")
    diff = x - y
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma**2)))


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows, via |a|^2 + |b|^2 - 2ab."""
    sq = np.einsum("ij,ij->i", a, a)[:, None] + np.einsum("ij,ij->i", b, b)[None, :] - 2.0 * (a @ b.T)
    return np.maximum(sq, 0.0)


def _pooled_sq_dists(source, target):
    pooled = np.vstack([source, target])
    d = pairwise_sq_dists(pooled, pooled)
    np.fill_diagonal(d, 0.0)
    d = 0.5 * (d + d.T)
    m = source.shape[0]
    return d, d[:m, :m], d[:m, m:], d[m:, m:]


def _check(source, target, kind):
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.ndim != 2 or target.ndim != 2 or source.shape[1] != target.shape[1]:
        raise ShapeError(f"source {source.shape} and target {target.shape} must be 2-D with equal columns")
    if kind not in ESTIMATORS:
        raise ArgumentError(f"unknown estimator {kind!r}")
    need = 1 if kind == "biased" else 2
    if source.shape[0] < need or target.shape[0] < need:
        raise ArgumentError(f"{kind} estimator needs at least {need} samples per side")
    return source, target


def _weights(m, n, kind):
    if kind == "biased":
        return 1.0 / (m * m), 2.0 / (m * n), 1.0 / (n * n)
    return 1.0 / (m * (m - 1)), 2.0 / (m * n), 1.0 / (n * (n - 1))


def _kernel_blocks(sigma, d_ss, d_st, d_tt, kind):
    k_ss = np.exp(-d_ss / (2.0 * sigma**2))
    k_st = np.exp(-d_st / (2.0 * sigma**2))
    k_tt = np.exp(-d_tt / (2.0 * sigma**2))
    if kind == "unbiased":
        np.fill_diagonal(k_ss, 0.0)
        np.fill_diagonal(k_tt, 0.0)
    return k_ss, k_st, k_tt


def _resolve_kernels(kernels, scales, d_pooled):
    if kernels is not None:
        return kernels
    base = _median_from_sq(d_pooled)
    # the |a|^2 - 2ab + |b|^2 expansion leaves ~1e-8 relative residue on coincident points
    if base <= 1e-6 * np.sqrt(d_pooled.max()) or base == 0.0:
        base = 0.0
    return _ladder(base, scales)


def mkmmd_sq(source, target, kernels: KernelFamily | None = None, kind: str = "biased",
             scales: Sequence[float] = DEFAULT_SCALES) -> MmdValue:
    """Empirical squared MK-MMD between the rows of ``source`` and ``target``.

    With ``kernels=None`` the bandwidths come from the median heuristic on the
    pooled sample (times ``scales``), treated as constants.
    """
    source, target = _check(source, target, kind)
    m, n = source.shape[0], target.shape[0]
    d_pooled, d_ss, d_st, d_tt = _pooled_sq_dists(source, target)
    kernels = _resolve_kernels(kernels, scales, d_pooled)
    w_ss, w_st, w_tt = _weights(m, n, kind)
    per_kernel = []
    for sigma in kernels.bandwidths:
        k_ss, k_st, k_tt = _kernel_blocks(sigma, d_ss, d_st, d_tt, kind)
        per_kernel.append(float(w_ss * k_ss.sum() - w_st * k_st.sum() + w_tt * k_tt.sum()))
    value = float(sum(b * v for b, v in zip(kernels.coefficients, per_kernel)))
    return MmdValue(value, kind, tuple(per_kernel))


def _pull(weights, x, y):
    # sum_j W_ij (x_i - y_j)
    return weights.sum(axis=1)[:, None] * x - weights @ y


def mkmmd_grad(source, target, kernels: KernelFamily | None = None, kind: str = "biased",
               scales: Sequence[float] = DEFAULT_SCALES):
    """Gradient of :func:`mkmmd_sq` with respect to every source and target row.

    Uses dk(x, y)/dx = -k(x, y) (x - y) / sigma^2. Returns ``(value, grad_source,
    grad_target)`` so callers that need both pay for one kernel evaluation.
    Median-heuristic bandwidths (``kernels=None``) are held constant.
    """
    source, target = _check(source, target, kind)
    m, n = source.shape[0], target.shape[0]
    d_pooled, d_ss, d_st, d_tt = _pooled_sq_dists(source, target)
    kernels = _resolve_kernels(kernels, scales, d_pooled)
    w_ss, w_st, w_tt = _weights(m, n, kind)
    g_s = np.zeros_like(source)
    g_t = np.zeros_like(target)
    per_kernel = []
    for beta, sigma in zip(kernels.coefficients, kernels.bandwidths):
        k_ss, k_st, k_tt = _kernel_blocks(sigma, d_ss, d_st, d_tt, kind)
        per_kernel.append(float(w_ss * k_ss.sum() - w_st * k_st.sum() + w_tt * k_tt.sum()))
        c = beta / sigma**2
        # each symmetric block counts pairs twice, hence the factor 2
        g_s += c * (-2.0 * w_ss * _pull(k_ss, source, source) + w_st * _pull(k_st, source, target))
        g_t += c * (-2.0 * w_tt * _pull(k_tt, target, target) + w_st * _pull(k_st.T, target, source))
    value = float(sum(b * v for b, v in zip(kernels.coefficients, per_kernel)))
    return MmdValue(value, kind, tuple(per_kernel)), g_s, g_t


def _median_from_sq(d_sq):
    iu = np.triu_indices(d_sq.shape[0], k=1)
    return float(np.median(np.sqrt(d_sq[iu])))


def _ladder(base, scales):
    if not np.isfinite(base):
        raise NumericError("median pairwise distance is not finite")
    if base <= 0.0:
        raise DegenerateDataError("median pairwise distance is zero; points coincide")
    if not scales or any(s <= 0 for s in scales):
        raise ArgumentError(f"scales must be positive, got {list(scales)}")
    return KernelFamily.uniform([base * s for s in scales])


def median_pairwise_distance(pooled) -> float:
    """Median Euclidean distance over all distinct unordered pairs of rows."""
    pooled = np.asarray(pooled, dtype=np.float64)
    if pooled.ndim != 2 or pooled.shape[0] < 2:
        raise ArgumentError("median heuristic needs at least 2 samples")
    diff = pooled[:, None, :] - pooled[None, :, :]
    return _median_from_sq(np.einsum("ijk,ijk->ij", diff, diff))


def median_heuristic_bandwidths(pooled, scales: Sequence[float] = DEFAULT_SCALES) -> KernelFamily:
    """Bandwidth ladder ``median * s`` over the given scales, uniform coefficients."""
    return _ladder(median_pairwise_distance(pooled), scales)
