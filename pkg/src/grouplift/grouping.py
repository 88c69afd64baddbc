"""Attribute correlation, agglomerative grouping and group-balanced loss weights."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DegenerateDataError, ParseError


@dataclass(frozen=True)
class AttributeGrouping:
    """A partition of attributes ``0..I-1`` into ``n_groups`` nonempty groups.

    ``assignment[i]`` is the group of attribute ``i``. Groups are numbered in
    order of their smallest member so equal partitions compare equal.
    """

    assignment: tuple[int, ...]
    n_groups: int

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        if not assignment:
            raise ArgumentError("grouping needs at least one attribute")
        if self.n_groups < 1 or set(assignment) != set(range(self.n_groups)):
            raise ArgumentError(f"assignment {assignment} does not use exactly groups 0..{self.n_groups - 1}")
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]]) -> "AttributeGrouping":
        members = sorted(i for g in groups for i in g)
        if members != list(range(len(members))):
            raise ArgumentError(f"groups {groups} are not a partition of 0..{len(members) - 1}")
        if any(len(g) == 0 for g in groups):
            raise ArgumentError("empty group")
        ordered = sorted((sorted(g) for g in groups), key=lambda g: g[0])
        assignment = [0] * len(members)
        for gi, g in enumerate(ordered):
            for i in g:
                assignment[i] = gi
        return cls(tuple(assignment), len(ordered))

    @property
    def n_attributes(self) -> int:
        return len(self.assignment)

    @property
    def groups(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_groups)]
        for i, g in enumerate(self.assignment):
            out[g].append(i)
        return out

    @property
    def group_sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def canonical(self) -> "AttributeGrouping":
        return AttributeGrouping.from_groups(self.groups)

    def same_group(self, i: int, j: int) -> bool:
        return self.assignment[i] == self.assignment[j]

    def restrict(self, keep: Sequence[int]) -> "AttributeGrouping":
        """Grouping of the kept attributes, reindexed ``0..len(keep)-1``; emptied groups vanish."""
        groups: dict[int, list[int]] = {}
        for new, old in enumerate(keep):
            groups.setdefault(self.assignment[old], []).append(new)
        return AttributeGrouping.from_groups(list(groups.values()))


def to_signed(labels: np.ndarray) -> np.ndarray:
    """Internal 0 (positive) / 1 (negative) codes to +1 / -1."""
    return 1.0 - 2.0 * np.asarray(labels, dtype=np.float64)


def estimate_correlation(labels: np.ndarray) -> np.ndarray:
    """Pearson correlation between label columns, computed on +-1 codes.

    For binary data this is the phi coefficient.
    """
    y = to_signed(labels)
    if y.ndim != 2 or y.shape[0] < 2:
        raise ArgumentError("need a 2-D label matrix with at least 2 samples")
    centred = y - y.mean(axis=0)
    ss = np.einsum("ij,ij->j", centred, centred)
    for j in np.flatnonzero(ss == 0.0):
        raise DegenerateDataError(f"attribute column {j} is constant; correlation undefined")
    norm = np.sqrt(ss)
    corr = (centred.T @ centred) / np.outer(norm, norm)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


def cluster_attributes(corr: np.ndarray, n_groups: int) -> AttributeGrouping:
    """Average-linkage agglomerative clustering on ``1 - |corr|``.

    Merges stop at exactly ``n_groups`` clusters. Among equally distant pairs
    the one with the lexicographically smallest (min member, min member) wins.
    """
    corr = np.asarray(corr, dtype=np.float64)
    n = corr.shape[0]
    if corr.shape != (n, n):
        raise ArgumentError(f"correlation matrix must be square, got {corr.shape}")
    if not 1 <= n_groups <= n:
        raise ArgumentError(f"group count {n_groups} outside [1, {n}]")
    dist = 1.0 - np.abs(corr)
    clusters = [[i] for i in range(n)]
    while len(clusters) > n_groups:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                d = dist[np.ix_(clusters[a], clusters[b])].mean()
                key = (d, clusters[a][0], clusters[b][0])
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        merged = sorted(clusters[a] + clusters[b])
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
        clusters.sort(key=lambda c: c[0])
    return AttributeGrouping.from_groups(clusters)


def assign_group_weights(grouping: AttributeGrouping) -> np.ndarray:
    """Loss weight ``1 / (G * g_m)`` for every attribute in a group of size g_m."""
    g = grouping.n_groups
    per_group = [1.0 / (g * size) for size in grouping.group_sizes]
    return np.array([per_group[a] for a in grouping.assignment])


def equal_weights(n_attributes: int) -> np.ndarray:
    return np.ones(n_attributes)


def emphasized_weights(grouping: AttributeGrouping, group: int, high: float = 1.0, low: float = 0.1) -> np.ndarray:
    """``high`` for attributes in ``group`` (zero-based), ``low`` elsewhere."""
    if not 0 <= group < grouping.n_groups:
        raise ArgumentError(f"group {group} outside [0, {grouping.n_groups})")
    return np.array([high if a == group else low for a in grouping.assignment])


def write_grouping_file(path, names: Sequence[str], grouping: AttributeGrouping, weights=None) -> None:
    """One line per group of comma-separated names, then a ``[weights]`` section."""
    if len(names) != grouping.n_attributes:
        raise ArgumentError("one name per attribute required")
    lines = ["[groups]"]
    for g in grouping.groups:
        lines.append(",".join(names[i] for i in g))
    if weights is not None:
        lines.append("[weights]")
        for name, w in zip(names, weights):
            lines.append(f"{name},{format(float(w), '.17g')}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_grouping_file(path, names: Sequence[str] | None = None):
    """Parse a grouping file.

    Returns ``(names, grouping, weights)``; ``weights`` is None when the file
    has no weights section. When ``names`` is given, attribute indices follow
    that order and every name must appear exactly once.
    """
    section = None
    groups_by_name: list[list[str]] = []
    weight_map: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("[groups]", "[weights]"):
            section = line[1:-1]
            continue
        if section == "groups":
            members = [tok.strip() for tok in line.split(",")]
            if any(not m for m in members):
                raise ParseError("empty attribute name in group", lineno)
            groups_by_name.append(members)
        elif section == "weights":
            parts = [tok.strip() for tok in line.split(",")]
            if len(parts) != 2:
                raise ParseError("weight lines are 'name,value'", lineno)
            try:
                weight_map[parts[0]] = float(parts[1])
            except ValueError:
                raise ParseError(f"bad weight {parts[1]!r}", lineno) from None
        else:
            raise ParseError("content before a [groups] header", lineno)
    flat = [n for g in groups_by_name for n in g]
    if not flat:
        raise ParseError("no groups defined", None)
    if len(set(flat)) != len(flat):
        raise ParseError("attribute listed in more than one group", None)
    if names is None:
        names = flat
    names = list(names)
    if sorted(names) != sorted(flat):
        missing = set(names) ^ set(flat)
        raise ParseError(f"grouping and dataset attributes differ: {sorted(missing)}", None)
    index = {n: i for i, n in enumerate(names)}
    grouping = AttributeGrouping.from_groups([[index[n] for n in g] for g in groups_by_name])
    weights = None
    if weight_map:
        if set(weight_map) != set(names):
            raise ParseError("weights section must list every attribute", None)
        weights = np.array([weight_map[n] for n in names])
    return names, grouping, weights
