"""Acceptance criteria 1-10, each printing one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the lines also appear
in the normal ``-v`` output because they bypass capture.
"""

import itertools
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

import mmd_oracle
from grouplift.cli import main
from grouplift.data import SyntheticSpec, generate
from grouplift.experiments import (
    CROSS_GROUP_PAIR,
    MNET_CONFIG,
    SAME_GROUP_PAIR,
    SCARCE_GROUP_SPEC,
    TNET_CONFIG,
    WEIGHTING_CONFIG,
    train_source_model,
    transfer_run,
    weighting_run,
)
from grouplift.gradcheck import CHECKS, run_suite
from grouplift.grouping import AttributeGrouping, assign_group_weights
from grouplift.mmd import KernelFamily, median_heuristic_bandwidths, mkmmd_sq
from grouplift.nncore import networks_equal
from grouplift.transfer import alpha_policy, source_network, task_from_config, train_tnet

SEEDS = range(5)
TESTS = Path(__file__).parent


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(criterion, ok, detail):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\n[criterion {criterion}] {status}: {detail} ({time.perf_counter() - start:.1f}s)")
        assert ok, detail

    return emit


def test_criterion_01_loss_weight_example(report):
    w = assign_group_weights(AttributeGrouping.from_groups([[0, 1], [2, 3, 4], [5]]))
    expected = np.array([1 / 6, 1 / 6, 1 / 9, 1 / 9, 1 / 9, 1 / 3])
    sums = [w[:2].sum(), w[2:5].sum(), w[5:].sum()]
    err = max(np.max(np.abs(w - expected)), max(abs(s - 1 / 3) for s in sums), abs(w.sum() - 1.0))
    report(1, err <= 1e-12, f"weights {np.round(w, 6).tolist()}, max deviation {err:.1e}")


def test_criterion_02_mmd_oracle(report):
    rng = np.random.default_rng(2)
    worst = 0.0
    for k in range(50):
        m, n = int(rng.integers(2, 41)), int(rng.integers(2, 41))
        dim, d = int(rng.integers(1, 17)), int(rng.integers(1, 6))
        xs = rng.normal(size=(m, dim))
        xt = rng.normal(size=(n, dim)) + rng.uniform(0, 1)
        kernels = KernelFamily(tuple(rng.uniform(0.3, 4.0, d)), tuple(rng.dirichlet(np.ones(d))))
        kind = ("biased", "unbiased")[k % 2]
        fast = mkmmd_sq(xs, xt, kernels, kind).value
        slow = mmd_oracle.mkmmd(xs.tolist(), xt.tolist(), kernels.bandwidths, kernels.coefficients, kind)
        worst = max(worst, abs(fast - slow))
    report(2, worst < 1e-10, f"max |vectorized - double loop| over 50 instances = {worst:.2e}")


def test_criterion_03_gradient_suite(report):
    results = run_suite(20)
    per = {c: max(r.rel_error for r in results if r.name == c) for c in CHECKS}
    ok = all(r.passed for r in results) and all(sum(r.name == c for r in results) == 20 for c in CHECKS)
    report(3, ok, "worst relative error " + ", ".join(f"{c}={e:.1e}" for c, e in per.items()))


def test_criterion_04_mmd_statistics(report):
    rng = np.random.default_rng(4)
    x = rng.normal(size=(200, 2))
    y = rng.normal(size=(200, 2))
    pooled = np.vstack([x, y])
    kernels = median_heuristic_bandwidths(pooled)
    observed = mkmmd_sq(x, y, kernels).value
    null = []
    for _ in range(200):
        perm = rng.permutation(400)
        null.append(mkmmd_sq(pooled[perm[:200]], pooled[perm[200:]], kernels).value)
    threshold = float(np.percentile(null, 95))
    same = mkmmd_sq(x, x.copy(), kernels).value
    base = rng.normal(size=(200, 2))
    shifted = [mkmmd_sq(base, rng.normal(size=(200, 2)) + delta, kernels).value for delta in (0.5, 1.0, 2.0)]
    increasing = all(a < b for a, b in itertools.pairwise(shifted))
    ok = observed < threshold and abs(same) < 1e-12 and increasing
    report(4, ok, f"null draw {observed:.5f} < 95th pct {threshold:.5f}; "
                  f"shifts 0.5/1/2 -> {', '.join(f'{v:.4f}' for v in shifted)}")


def test_criterion_05_transfer_beats_direct(report):
    outcomes = [transfer_run(SyntheticSpec(seed=s), "A0", "A0") for s in SEEDS]
    gains = [o.gain for o in outcomes]
    wins = sum(g >= 0.05 for g in gains)
    report(5, wins >= 4, f"gains in points {[round(100 * g, 1) for g in gains]}, {wins}/5 seeds >= 5")


def test_criterion_06_correlation_effect(report):
    same = [transfer_run(SyntheticSpec(seed=s), *SAME_GROUP_PAIR, alpha=1.0).adapted_accuracy for s in SEEDS]
    cross = [transfer_run(SyntheticSpec(seed=s), *CROSS_GROUP_PAIR, alpha=1.0).adapted_accuracy for s in SEEDS]
    diff = 100 * (np.mean(same) - np.mean(cross))
    report(6, diff >= 3.0, f"same-group {np.mean(same):.3f} vs cross-group {np.mean(cross):.3f} ({diff:+.1f} pts)")


def test_criterion_07_grouped_vs_equal_weights(report):
    outcomes = [weighting_run(replace(SCARCE_GROUP_SPEC, seed=s), WEIGHTING_CONFIG) for s in SEEDS]
    grouped = np.mean([o.grouped_mean for o in outcomes])
    equal = np.mean([o.equal_mean for o in outcomes])
    report(7, grouped >= equal, f"grouped {grouped:.4f} vs equal {equal:.4f} mean per-attribute accuracy")


def test_criterion_08_alpha_policy(report, tmp_path, capsys):
    grouping = AttributeGrouping.from_groups([[0, 1], [2, 3, 4], [5]])
    names = [f"A{i}" for i in range(6)]
    exact = all(
        alpha_policy(grouping, names, a, b) == (1.0 if grouping.same_group(i, j) else 0.1)
        for (i, a), (j, b) in itertools.product(enumerate(names), repeat=2)
    )
    data = tmp_path / "data"
    main(["gen-data", "--out-dir", str(data), "--n-source", "300", "--n-target", "100", "--seed", "8"])
    main(["group", "--data", str(data / "source.csv"), "--n-groups", "3", "--out", str(tmp_path / "g.txt")])
    main(["train-mnet", "--data", str(data / "source.csv"), "--out", str(tmp_path / "m.ckpt"), "--epochs", "1"])
    capsys.readouterr()
    emitted = {}
    for src in ("A3", "A0"):
        main(["transfer", "--checkpoint", str(tmp_path / "m.ckpt"), "--source-data", str(data / "source.csv"),
              "--target-data", str(data / "target.csv"), "--source-attr", src, "--target-attr", "A2",
              "--alpha-policy", "grouped", "--grouping", str(tmp_path / "g.txt"), "--epochs", "0"])
        line = next(l for l in capsys.readouterr().out.splitlines() if l.startswith("alpha "))
        emitted[src] = float(line.split()[1])
    ok = exact and emitted == {"A3": 1.0, "A0": 0.1}
    report(8, ok, f"all 36 pairs exact: {exact}; CLI A3->A2 alpha={emitted['A3']}, A0->A2 alpha={emitted['A0']}")


def test_criterion_09_unsupervised_contract(report):
    spec = SyntheticSpec(seed=9, n_source=1000, n_target=500)
    source, target = generate(spec)
    model = train_source_model(source, replace(MNET_CONFIG, epochs=5, seed=9))
    tm = source_network(model, "A0")
    cfg = replace(TNET_CONFIG, epochs=5, seed=9)
    task = task_from_config(source, "A0", target, "A0", cfg)
    labelled, _ = train_tnet(tm, task, cfg)
    stripped, history = train_tnet(tm, task.without_eval_labels(), cfg)
    ok = networks_equal(labelled.net, stripped.net) and all(h.target_accuracy is None for h in history)
    report(9, ok, f"bitwise-identical adapted network with and without target labels: {ok}")


def test_criterion_10_invariant_suites(report):
    modules = ["test_nncore.py", "test_checkpoint.py", "test_grouping.py", "test_mmd.py",
               "test_multilabel.py", "test_data.py", "test_transfer.py"]
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *[str(TESTS / m) for m in modules]],
        capture_output=True, text=True, cwd=TESTS.parent,
    )
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    report(10, proc.returncode == 0, f"property and invariant suites: {summary}")
