from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grouplift.data import (
    LabeledDomain,
    SyntheticSpec,
    UnlabeledDomain,
    generate,
    load_csv,
    parse_csv,
    save_csv,
    shift_transform,
    split,
    to_csv,
)
from grouplift.errors import ArgumentError, GenerationError, ParseError
from grouplift.grouping import estimate_correlation
from grouplift.mmd import median_heuristic_bandwidths, mkmmd_sq
from grouplift.multilabel import NEGATIVE, POSITIVE


def test_empirical_correlations_hit_targets():
    for seed in range(3):
        spec = SyntheticSpec(seed=seed, n_target=0)
        source, _ = generate(spec)
        corr = estimate_correlation(source.labels)
        for i in range(6):
            for j in range(i + 1, 6):
                same = any(i in g and j in g for g in spec.planted_groups)
                target = spec.rho_in if same else spec.rho_out
                assert abs(corr[i, j] - target) <= 0.1, (seed, i, j, corr[i, j])


def test_perfect_within_group_correlation_copies_columns():
    source, _ = generate(SyntheticSpec(rho_in=1.0, n_target=0))
    assert np.array_equal(source.labels[:, 0], source.labels[:, 1])
    assert np.array_equal(source.labels[:, 2], source.labels[:, 4])
    assert not np.array_equal(source.labels[:, 0], source.labels[:, 2])


def test_generation_is_pure():
    a = generate(SyntheticSpec(seed=9, n_source=300, n_target=200))
    b = generate(SyntheticSpec(seed=9, n_source=300, n_target=200))
    assert to_csv(a[0]) == to_csv(b[0]) and to_csv(a[1]) == to_csv(b[1])


def test_unshifted_target_is_indistinguishable():
    spec = SyntheticSpec(seed=3, n_source=500, n_target=500, shift=0.0, rotation_deg=0.0)
    source, target = generate(spec)
    pooled = np.vstack([source.features, target.features])
    kernels = median_heuristic_bandwidths(pooled)
    observed = mkmmd_sq(source.features, target.features, kernels).value
    rng = np.random.default_rng(0)
    null = []
    for _ in range(100):
        perm = rng.permutation(1000)
        null.append(mkmmd_sq(pooled[perm[:500]], pooled[perm[500:]], kernels).value)
    assert observed < np.percentile(null, 95)


def test_shift_and_rotation_applied():
    spec = SyntheticSpec(seed=1, n_source=10, n_target=4000)
    _, target = generate(spec)
    np.testing.assert_allclose(target.features.mean(axis=0), spec.shift, atol=0.1)
    x = np.array([[0.0] * 14 + [1.0, 0.0]])
    out = shift_transform(replace(spec, shift=0.0), x)
    t = np.radians(15)
    np.testing.assert_allclose(out[0, -2:], [np.cos(t), np.sin(t)], atol=1e-15)


def test_nuisance_shift_leaves_signal_dims():
    spec = SyntheticSpec(shift_subset="nuisance", rotation_deg=0.0)
    out = shift_transform(spec, np.zeros((1, 16)))
    assert out[0, : spec.n_groups + 1].tolist() == [0.0] * 4
    assert out[0, spec.n_groups + 1:].tolist() == [spec.shift] * (16 - spec.n_groups - 1)


def test_target_labels_follow_the_unshifted_rule():
    # the same rule on fresh draws: label correlations match the source's
    spec = SyntheticSpec(seed=2, n_target=2000)
    source, target = generate(spec)
    np.testing.assert_allclose(estimate_correlation(target.eval_labels),
                               estimate_correlation(source.labels), atol=0.1)


def test_group_signal_scales_only_that_latent():
    base = generate(SyntheticSpec(seed=4, n_target=0))[0]
    weak = generate(SyntheticSpec(seed=4, n_target=0, group_signal=(1.0, 1.0, 0.3)))[0]
    np.testing.assert_array_equal(weak.labels, base.labels)
    np.testing.assert_allclose(weak.features[:, 3], 0.3 * base.features[:, 3])
    np.testing.assert_array_equal(np.delete(weak.features, 3, axis=1), np.delete(base.features, 3, axis=1))


@pytest.mark.parametrize(
    "change",
    [
        {"rho_in": 0.1, "rho_out": 0.5},
        {"rho_in": 1.5},
        {"feature_dim": 3},
        {"shift": -1.0},
        {"group_sizes": (2, 0)},
        {"shift_subset": "half"},
        {"group_signal": (1.0, 1.0)},
        {"attribute_names": ("a", "a", "b", "c", "d", "e")},
    ],
)
def test_infeasible_specs(change):
    with pytest.raises(GenerationError):
        generate(replace(SyntheticSpec(), **change))


# ---------------------------------------------------------------- CSV


def test_minimal_labelled_csv():
    d = parse_csv("f0,f1,attr:Male\n0.5,-1.2,+1\n")
    assert isinstance(d, LabeledDomain)
    assert d.features.tolist() == [[0.5, -1.2]] and d.labels.tolist() == [[POSITIVE]] and d.names == ("Male",)
    assert parse_csv("f0,attr:Male\n1,-1\n").labels.tolist() == [[NEGATIVE]]


def test_csv_without_labels_is_unlabelled():
    d = parse_csv("f0,f1\n0.5,-1.2\n1,2\n")
    assert isinstance(d, UnlabeledDomain) and d.eval_labels is None and d.features.shape == (2, 2)


def test_eval_columns_become_evaluation_labels():
    d = parse_csv("f0,eval:Male\n0.5,-1\n")
    assert isinstance(d, UnlabeledDomain) and d.eval_labels.tolist() == [[NEGATIVE]]
    assert d.training_view().eval_labels is None


def test_roundtrip_is_exact(tmp_path):
    source, target = generate(SyntheticSpec(seed=5, n_source=50, n_target=30))
    for name, dom in (("s.csv", source), ("t.csv", target)):
        save_csv(tmp_path / name, dom)
        back = load_csv(tmp_path / name)
        assert type(back) is type(dom) and np.array_equal(back.features, dom.features)
    assert np.array_equal(load_csv(tmp_path / "s.csv").labels, source.labels)
    assert np.array_equal(load_csv(tmp_path / "t.csv").eval_labels, target.eval_labels)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_float_roundtrip_17_digits(values):
    d = UnlabeledDomain(np.array(values)[:, None])
    assert np.array_equal(parse_csv(to_csv(d)).features, d.features)


@pytest.mark.parametrize(
    "text, line",
    [
        ("f0,f1,attr:A\n1,2,+1\n1,2\n", 3),
        ("f0,attr:A\n1,0\n", 2),
        ("f0,attr:A,attr:A\n1,+1,-1\n", 1),
        ("f0,attr:A\nx,+1\n", 2),
        ("f0,attr:A,eval:B\n1,+1,-1\n", 1),
        ("attr:A\n+1\n", 1),
        ("f0\nnan\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_csv(text)
    assert info.value.line == line


# ---------------------------------------------------------------- split


def _domain(n):
    return LabeledDomain(np.arange(n, dtype=float)[:, None], np.zeros((n, 1)), ("a",))


def test_split_identity_and_halves():
    (whole,) = split(_domain(10), [1.0], 0)
    assert whole.features.ravel().tolist() == list(range(10))
    a, b = split(_domain(10), [0.5, 0.5], 0)
    assert len(a) == len(b) == 5
    assert not set(a.features.ravel()) & set(b.features.ravel())


def test_split_is_seeded():
    a = split(_domain(50), [0.6, 0.2, 0.2], 3)
    b = split(_domain(50), [0.6, 0.2, 0.2], 3)
    assert all(np.array_equal(x.features, y.features) for x, y in zip(a, b))


@given(st.integers(3, 200), st.lists(st.integers(1, 10), min_size=1, max_size=3), st.integers(0, 99))
def test_split_disjoint_and_exhaustive(n, raw, seed):
    fractions = [r / sum(raw) for r in raw]
    if any(f * n < 1 for f in fractions):
        return
    parts = split(_domain(n), fractions, seed)
    rows = sorted(v for p in parts for v in p.features.ravel())
    assert rows == list(range(n))


@pytest.mark.parametrize("fractions", [[0.5, 0.6], [1.2, -0.2], [], [0.0, 1.0]])
def test_split_rejects_bad_fractions(fractions):
    with pytest.raises(ArgumentError):
        split(_domain(10), fractions, 0)


def test_split_rejects_empty_part():
    with pytest.raises(ArgumentError):
        split(_domain(3), [0.9, 0.05, 0.05], 0)
