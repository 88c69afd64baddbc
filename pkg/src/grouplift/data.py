"""Synthetic grouped-attribute data with a controllable domain shift, and CSV I/O.

Generator layout, for G groups in D feature dimensions:

* features are standard normal;
* dimension 0 carries a latent shared by all groups (sets the cross-group
  correlation), dimensions 1..G carry one latent per group;
* the remaining dimensions are nuisance coordinates with no label signal;
* attribute ``a`` in group ``g`` is positive when
  ``sqrt(c) x_0 + sqrt(1 - c) x_g + s * noise_a > 0``.

Thresholding a bivariate normal at zero gives a phi coefficient of
``(2/pi) arcsin(r)``, so ``s`` and ``c`` are solved from the requested label
correlations in closed form.

Per-group ``group_signal`` factors scale a group's latent coordinate in the
emitted features (labels are computed before scaling), so a factor below 1
gives a group whose signal is scarce and slow to learn.

The target domain draws fresh samples, labels them with the unshifted rule,
rotates the last two coordinates by ``rotation_deg`` and adds ``shift`` to
every coordinate in the shift subset: ``"all"`` dimensions (default) or only
the ``"nuisance"`` ones. Under the full shift the source-trained decision rule
is offset on the target, while the nuisance coordinates still reveal which
domain a sample came from, so an adapted network can undo the offset.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, GenerationError, ParseError

ATTR_PREFIX = "attr:"
EVAL_PREFIX = "eval:"


@dataclass(frozen=True)
class SyntheticSpec:
    feature_dim: int = 16
    group_sizes: tuple[int, ...] = (2, 3, 1)
    rho_in: float = 0.8
    rho_out: float = 0.05
    n_source: int = 2000
    n_target: int = 1000
    shift: float = 1.5
    rotation_deg: float = 15.0
    seed: int = 0
    attribute_names: tuple[str, ...] | None = None
    shift_subset: str = "all"
    group_signal: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "group_sizes", tuple(int(g) for g in self.group_sizes))
        if self.group_signal is not None:
            object.__setattr__(self, "group_signal", tuple(float(v) for v in self.group_signal))
        if self.attribute_names is not None:
            object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def n_attributes(self) -> int:
        return sum(self.group_sizes)

    @property
    def names(self) -> tuple[str, ...]:
        if self.attribute_names is not None:
            return self.attribute_names
        return tuple(f"A{i}" for i in range(self.n_attributes))

    @property
    def planted_groups(self) -> list[list[int]]:
        out, start = [], 0
        for size in self.group_sizes:
            out.append(list(range(start, start + size)))
            start += size
        return out

    @property
    def nuisance_dims(self) -> list[int]:
        return list(range(self.n_groups + 1, self.feature_dim))

    @property
    def shift_dims(self) -> list[int]:
        if self.shift_subset == "all":
            return list(range(self.feature_dim))
        return self.nuisance_dims


@dataclass(frozen=True)
class LabeledDomain:
    features: np.ndarray
    labels: np.ndarray  # (N, I) codes, 0 = positive
    names: tuple[str, ...]

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int8)
        names = tuple(self.names)
        if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ArgumentError(f"features {x.shape} and labels {y.shape} disagree")
        if y.shape[1] != len(names) or len(set(names)) != len(names):
            raise ArgumentError("need one unique name per label column")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ArgumentError("label codes must be 0 or 1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "names", names)

    def __len__(self):
        return self.features.shape[0]

    def column(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ArgumentError(f"unknown attribute {name!r}") from None

    def subset(self, idx) -> "LabeledDomain":
        return LabeledDomain(self.features[idx], self.labels[idx], self.names)


@dataclass(frozen=True)
class UnlabeledDomain:
    """Target-domain features; ``eval_labels`` exist only for scoring."""

    features: np.ndarray
    eval_labels: np.ndarray | None = None
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ArgumentError(f"features must be 2-D, got {x.shape}")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "names", tuple(self.names))
        if self.eval_labels is not None:
            y = np.asarray(self.eval_labels, dtype=np.int8)
            if y.shape != (x.shape[0], len(self.names)):
                raise ArgumentError(f"eval labels {y.shape} do not match features/names")
            object.__setattr__(self, "eval_labels", y)

    def __len__(self):
        return self.features.shape[0]

    def training_view(self) -> "UnlabeledDomain":
        """The label-free view handed to every training routine."""
        return UnlabeledDomain(self.features)

    def eval_column(self, name: str) -> np.ndarray:
        if self.eval_labels is None:
            raise ArgumentError("target domain has no evaluation labels")
        try:
            return self.eval_labels[:, self.names.index(name)]
        except ValueError:
            raise ArgumentError(f"unknown attribute {name!r}") from None

    def subset(self, idx) -> "UnlabeledDomain":
        labels = None if self.eval_labels is None else self.eval_labels[idx]
        return UnlabeledDomain(self.features[idx], labels, self.names)


def _mixing(spec: SyntheticSpec):
    if not 0.0 <= spec.rho_out <= spec.rho_in <= 1.0:
        raise GenerationError(f"need 0 <= rho_out <= rho_in <= 1, got {spec.rho_out}, {spec.rho_in}")
    if spec.rho_in == 0.0:
        raise GenerationError("rho_in = 0 leaves no label signal")
    r_in = math.sin(math.pi * spec.rho_in / 2.0)
    r_out = math.sin(math.pi * spec.rho_out / 2.0)
    noise = math.sqrt(max(1.0 / r_in - 1.0, 0.0))
    common = r_out / r_in
    return noise, common


def validate_spec(spec: SyntheticSpec) -> None:
    if not spec.group_sizes or min(spec.group_sizes) < 1:
        raise GenerationError("every planted group needs at least one attribute")
    if spec.feature_dim < spec.n_groups + 1:
        raise GenerationError(f"feature_dim {spec.feature_dim} too small for {spec.n_groups} groups plus a shared latent")
    if spec.n_source < 1 or spec.n_target < 0:
        raise GenerationError("sample counts must be positive")
    if spec.shift < 0:
        raise GenerationError("shift must be nonnegative")
    if spec.shift_subset not in ("all", "nuisance"):
        raise GenerationError(f"shift_subset must be 'all' or 'nuisance', got {spec.shift_subset!r}")
    if spec.shift > 0 and not spec.shift_dims:
        raise GenerationError("a nonzero shift needs at least one shifted dimension")
    if spec.rotation_deg != 0 and spec.feature_dim < 2:
        raise GenerationError("a rotation needs at least two dimensions")
    if spec.group_signal is not None:
        if len(spec.group_signal) != spec.n_groups or min(spec.group_signal) <= 0:
            raise GenerationError("group_signal needs one positive factor per group")
    if len(spec.names) != spec.n_attributes or len(set(spec.names)) != len(spec.names):
        raise GenerationError("attribute names must be unique, one per attribute")
    _mixing(spec)


def _labels(spec, x, rng):
    noise, common = _mixing(spec)
    n = x.shape[0]
    labels = np.empty((n, spec.n_attributes), dtype=np.int8)
    eps = rng.standard_normal((n, spec.n_attributes))
    for g, members in enumerate(spec.planted_groups):
        latent = math.sqrt(common) * x[:, 0] + math.sqrt(1.0 - common) * x[:, g + 1]
        for a in members:
            labels[:, a] = np.where(latent + noise * eps[:, a] > 0.0, 0, 1)
    return labels


def _emit(spec, x):
    if spec.group_signal is None:
        return x
    out = x.copy()
    for g, factor in enumerate(spec.group_signal):
        out[:, g + 1] *= factor
    return out


def shift_transform(spec: SyntheticSpec, x: np.ndarray) -> np.ndarray:
    """Rotate the last two coordinates, then add the mean shift."""
    out = x.copy()
    if spec.rotation_deg != 0:
        i, j = spec.feature_dim - 2, spec.feature_dim - 1
        t = math.radians(spec.rotation_deg)
        c, s = math.cos(t), math.sin(t)
        out[:, i] = c * x[:, i] - s * x[:, j]
        out[:, j] = s * x[:, i] + c * x[:, j]
    dims = spec.shift_dims
    if dims and spec.shift != 0:
        out[:, dims] += spec.shift
    return out


def generate(spec: SyntheticSpec) -> tuple[LabeledDomain, UnlabeledDomain]:
    """Draw a labelled source domain and a shifted, evaluation-labelled target."""
    validate_spec(spec)
    rng = np.random.default_rng(spec.seed)
    xs = rng.standard_normal((spec.n_source, spec.feature_dim))
    ys = _labels(spec, xs, rng)
    xt = rng.standard_normal((spec.n_target, spec.feature_dim))
    yt = _labels(spec, xt, rng)
    source = LabeledDomain(_emit(spec, xs), ys, spec.names)
    target = UnlabeledDomain(shift_transform(spec, _emit(spec, xt)), yt, spec.names)
    return source, target


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _label_str(code: int) -> str:
    return "+1" if code == 0 else "-1"


def to_csv(domain) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = domain.features.shape[1]
    header = [f"f{j}" for j in range(d)]
    if isinstance(domain, LabeledDomain):
        labels, prefix = domain.labels, ATTR_PREFIX
    else:
        labels, prefix = domain.eval_labels, EVAL_PREFIX
    if labels is not None:
        header += [prefix + n for n in domain.names]
    writer.writerow(header)
    for r in range(domain.features.shape[0]):
        row = [_fmt(v) for v in domain.features[r]]
        if labels is not None:
            row += [_label_str(c) for c in labels[r]]
        writer.writerow(row)
    return buf.getvalue()


def save_csv(path, domain) -> None:
    Path(path).write_text(to_csv(domain))


def _parse_label(token, lineno):
    token = token.strip()
    if token in ("+1", "1"):
        return 0
    if token == "-1":
        return 1
    raise ParseError(f"label must be +1 or -1, got {token!r}", lineno)


def parse_csv(text: str):
    """Parse the dataset CSV format.

    ``attr:``-prefixed columns make a :class:`LabeledDomain`; ``eval:`` columns
    make an :class:`UnlabeledDomain` with evaluation labels; neither makes a
    plain :class:`UnlabeledDomain`.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty file", 1)
    header = [h.strip() for h in rows[0]]
    feat_cols, attr_cols, eval_cols = [], [], []
    for k, h in enumerate(header):
        if h.startswith(ATTR_PREFIX):
            attr_cols.append(k)
        elif h.startswith(EVAL_PREFIX):
            eval_cols.append(k)
        else:
            feat_cols.append(k)
    if attr_cols and eval_cols:
        raise ParseError("file mixes attr: and eval: columns", 1)
    label_cols = attr_cols or eval_cols
    prefix_len = len(ATTR_PREFIX) if attr_cols else len(EVAL_PREFIX)
    names = [header[k][prefix_len:] for k in label_cols]
    if any(not n for n in names):
        raise ParseError("empty attribute name", 1)
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise ParseError(f"duplicate attribute names {dup}", 1)
    if not feat_cols:
        raise ParseError("no feature columns", 1)
    feats, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
        try:
            feats.append([float(row[k]) for k in feat_cols])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not all(math.isfinite(v) for v in feats[-1]):
            raise ParseError("non-finite feature value", lineno)
        labels.append([_parse_label(row[k], lineno) for k in label_cols])
    x = np.array(feats, dtype=np.float64).reshape(len(feats), len(feat_cols))
    y = np.array(labels, dtype=np.int8).reshape(len(labels), len(label_cols))
    if attr_cols:
        return LabeledDomain(x, y, tuple(names))
    if eval_cols:
        return UnlabeledDomain(x, y, tuple(names))
    return UnlabeledDomain(x)


def load_csv(path):
    return parse_csv(Path(path).read_text())


def check_fractions(fractions: Sequence[float]) -> list[float]:
    fractions = [float(f) for f in fractions]
    if not fractions or any(not f > 0 for f in fractions):
        raise ArgumentError("split fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ArgumentError(f"split fractions sum to {sum(fractions):.12g}, expected 1")
    return fractions


def split(domain, fractions: Sequence[float], seed: int):
    """Seeded shuffle, then cut into consecutive parts of the given fractions.

    Part sizes are floors of ``fraction * N``; leftover rows go to the parts
    with the largest remainders (earlier parts win ties).
    """
    fractions = check_fractions(fractions)
    n = len(domain)
    raw = [f * n for f in fractions]
    sizes = [int(math.floor(r)) for r in raw]
    leftover = n - sum(sizes)
    by_remainder = sorted(range(len(raw)), key=lambda k: (-(raw[k] - sizes[k]), k))
    for k in by_remainder[:leftover]:
        sizes[k] += 1
    if min(sizes) == 0:
        raise ArgumentError(f"split of {n} rows by {fractions} leaves an empty part")
    order = np.random.default_rng(seed).permutation(n)
    parts, start = [], 0
    for size in sizes:
        parts.append(domain.subset(np.sort(order[start:start + size])))
        start += size
    return parts
