import json

import numpy as np
import pytest

from grouplift.checkpoint import load
from grouplift.cli import main
from grouplift.data import load_csv
from grouplift.grouping import read_grouping_file

TRAIN = ["--epochs", "2", "--trunk-dims", "8", "--head-dims", "6", "--batch-size", "32"]


def _block(text, title):
    out, inside = {}, False
    for line in text.splitlines():
        if line.startswith("["):
            inside = line == f"[{title}]"
            continue
        key, _, value = line.partition(" ")
        if inside and value and "," not in key:
            out[key] = value
    return out


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["gen-data", "--out-dir", str(d), "--n-source", "600", "--n-target", "300",
                 "--seed", "3", "--split", "0.8,0.2"]) == 0
    return d


@pytest.fixture(scope="module")
def ckpt(data_dir):
    path = data_dir / "mnet.ckpt"
    assert main(["train-mnet", "--data", str(data_dir / "source_train.csv"), "--out", str(path), *TRAIN]) == 0
    return path


# ---------------------------------------------------------------- gen-data


def test_gen_data_writes_files(data_dir):
    src = load_csv(data_dir / "source.csv")
    train, test = load_csv(data_dir / "source_train.csv"), load_csv(data_dir / "source_test.csv")
    assert len(src) == 600 and len(train) + len(test) == 600
    assert load_csv(data_dir / "target.csv").features.shape == (300, 16)
    assert json.loads((data_dir / "spec.json").read_text())["data"]["seed"] == 3


def test_gen_data_is_byte_deterministic(tmp_path):
    args = ["gen-data", "--n-source", "50", "--n-target", "20", "--seed", "9"]
    assert main([*args, "--out-dir", str(tmp_path / "a")]) == 0
    assert main([*args, "--out-dir", str(tmp_path / "b")]) == 0
    for name in ("source.csv", "target.csv", "spec.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_gen_data_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"data": {"n_source": 40, "n_target": 10, "seed": 1}}))
    assert main(["gen-data", "--config", str(cfg), "--n-target", "15", "--out-dir", str(tmp_path / "o")]) == 0
    block = _block(capsys.readouterr().out, "gen-data")
    assert block["n_source"] == "40" and block["n_target"] == "15"


@pytest.mark.parametrize("split", ["0.8,0.3", "0.5,-0.5,1.0"])
def test_bad_split_is_a_config_error(tmp_path, capsys, split):
    assert main(["gen-data", "--out-dir", str(tmp_path), "--split", split]) == 1
    assert "split" in capsys.readouterr().err


def test_infeasible_correlation_is_a_config_error(tmp_path, capsys):
    assert main(["gen-data", "--out-dir", str(tmp_path), "--rho-in", "0.2", "--rho-out", "0.9"]) == 1
    assert "config error" in capsys.readouterr().err


# ---------------------------------------------------------------- group


def test_group_recovers_planted_groups(data_dir, tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["group", "--data", str(data_dir / "source.csv"), "--n-groups", "3", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "1,A0 A1\n2,A2 A3 A4\n3,A5\n" in text
    names, grouping, weights = read_grouping_file(out)
    assert [list(g) for g in grouping.groups] == [[0, 1], [2, 3, 4], [5]]
    assert np.allclose(weights, [1 / 6, 1 / 6, 1 / 9, 1 / 9, 1 / 9, 1 / 3], atol=1e-15)


def test_group_equal_and_emphasized(data_dir, capsys):
    base = ["group", "--data", str(data_dir / "source.csv"), "--n-groups", "3"]
    assert main([*base, "--weights", "equal"]) == 0
    rows = capsys.readouterr().out.split("attribute,group,weight\n")[1].splitlines()
    assert [float(r.split(",")[2]) for r in rows] == [1.0] * 6
    assert main([*base, "--weights", "emphasized", "--group", "2"]) == 0
    rows = capsys.readouterr().out.split("attribute,group,weight\n")[1].splitlines()
    assert [float(r.split(",")[2]) for r in rows] == [0.1, 0.1, 1.0, 1.0, 1.0, 0.1]


def test_group_emphasized_needs_valid_group(data_dir, capsys):
    base = ["group", "--data", str(data_dir / "source.csv"), "--n-groups", "3", "--weights", "emphasized"]
    assert main(base) == 1
    assert main([*base, "--group", "4"]) == 1
    assert "group" in capsys.readouterr().err


def test_group_from_hand_edited_file(data_dir, tmp_path, capsys):
    f = tmp_path / "g.txt"
    assert main(["group", "--data", str(data_dir / "source.csv"), "--n-groups", "3", "--out", str(f)]) == 0
    capsys.readouterr()
    assert main(["group", "--from", str(f), "--weights", "file"]) == 0
    assert "scheme file" in capsys.readouterr().out


# ---------------------------------------------------------------- train-mnet / eval


def test_train_mnet_writes_checkpoint_and_metrics(data_dir, tmp_path, capsys):
    out, metrics = tmp_path / "m.ckpt", tmp_path / "m.csv"
    argv = ["train-mnet", "--data", str(data_dir / "source_train.csv"), "--out", str(out),
            "--metrics", str(metrics), "--eval-data", str(data_dir / "source_test.csv"), *TRAIN]
    assert main(argv) == 0
    block = _block(capsys.readouterr().out, "train-mnet")
    assert block["epochs"] == "2" and "mean_accuracy" in block
    assert len(metrics.read_text().splitlines()) == 3
    assert load(out).meta["kind"] == "mnet"


def test_train_mnet_is_deterministic(data_dir, tmp_path):
    paths = [tmp_path / "a.ckpt", tmp_path / "b.ckpt"]
    for p in paths:
        assert main(["train-mnet", "--data", str(data_dir / "source_train.csv"), "--out", str(p), *TRAIN]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_train_mnet_exclude_with_grouping(data_dir, tmp_path, capsys):
    g = tmp_path / "g.txt"
    main(["group", "--data", str(data_dir / "source.csv"), "--n-groups", "3", "--out", str(g)])
    out = tmp_path / "m.ckpt"
    assert main(["train-mnet", "--data", str(data_dir / "source_train.csv"), "--out", str(out),
                 "--grouping", str(g), "--exclude", "A2", *TRAIN]) == 0
    assert "acc:A2" not in capsys.readouterr().out


def test_sweep_writes_one_checkpoint_per_seed(data_dir, tmp_path, capsys):
    out = tmp_path / "m.ckpt"
    assert main(["train-mnet", "--data", str(data_dir / "source_train.csv"), "--out", str(out),
                 "--sweep", "seeds=0..1", *TRAIN]) == 0
    text = capsys.readouterr().out
    assert text.count("[train-mnet]") == 2 and text.index("seed 0") < text.index("seed 1")
    assert (tmp_path / "m.seed0.ckpt").exists() and (tmp_path / "m.seed1.ckpt").exists()


def test_eval_compares_two_runs(data_dir, ckpt, tmp_path, capsys):
    other = tmp_path / "o.ckpt"
    main(["train-mnet", "--data", str(data_dir / "source_train.csv"), "--out", str(other), *TRAIN, "--seed", "5"])
    capsys.readouterr()
    assert main(["eval", "--data", str(data_dir / "source_test.csv"), f"a={ckpt}", f"b={other}"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("attribute,a,b\n") and "\nmean," in text
    assert _block(text, "eval")["attributes"] == "6"


# ---------------------------------------------------------------- transfer / mmd


def test_transfer_grouped_policy(data_dir, ckpt, tmp_path, capsys):
    g = tmp_path / "g.txt"
    main(["group", "--data", str(data_dir / "source.csv"), "--n-groups", "3", "--out", str(g)])
    capsys.readouterr()
    emb = tmp_path / "emb"
    argv = ["transfer", "--checkpoint", str(ckpt), "--source-data", str(data_dir / "source_train.csv"),
            "--target-data", str(data_dir / "target.csv"), "--source-attr", "A3", "--target-attr", "A2",
            "--alpha-policy", "grouped", "--grouping", str(g), "--epochs", "2",
            "--metrics", str(tmp_path / "t.csv"), "--out", str(tmp_path / "t.ckpt"), "--dump-embeddings", str(emb)]
    assert main(argv) == 0
    block = _block(capsys.readouterr().out, "transfer")
    assert block["alpha"] == "1" and block["alpha_source"] == "grouped"
    # one trunk layer and one head hidden layer
    assert block["mmd_layers"] == "0,1" and block["freeze_depth"] == "0"
    assert {"direct_accuracy", "adapted_accuracy", "gain", "mmd_first_epoch", "mmd_last_epoch"} <= set(block)
    assert load(tmp_path / "t.ckpt").meta["kind"] == "tnet"
    assert load_csv(emb / "target_layer1.csv").features.shape == (300, 6)

    argv[argv.index("A3")] = "A0"
    assert main(argv) == 0
    assert _block(capsys.readouterr().out, "transfer")["alpha"] == "0.1"


def test_transfer_alpha_and_policy_conflict(data_dir, ckpt, capsys):
    assert main(["transfer", "--checkpoint", str(ckpt), "--source-data", str(data_dir / "source.csv"),
                 "--target-data", str(data_dir / "target.csv"), "--source-attr", "A0",
                 "--alpha", "1", "--alpha-policy", "grouped", "--grouping", "x"]) == 1
    assert "alpha" in capsys.readouterr().err


def test_mmd_report(data_dir, capsys):
    assert main(["mmd", "--source", str(data_dir / "source.csv"), "--target", str(data_dir / "target.csv")]) == 0
    text = capsys.readouterr().out
    block = _block(text, "mmd")
    assert float(block["value"]) > 0 and block["dim"] == "16"
    assert len(text.split("bandwidth,coefficient,per_kernel\n")[1].splitlines()) == 5


def test_mmd_same_file_is_zero(data_dir, capsys):
    path = str(data_dir / "target.csv")
    assert main(["mmd", "--source", path, "--target", path, "--bandwidths", "1,2"]) == 0
    assert abs(float(_block(capsys.readouterr().out, "mmd")["value"])) < 1e-12


# ---------------------------------------------------------------- gradcheck / exit codes


def test_gradcheck_passes(tmp_path, capsys):
    report = tmp_path / "r.txt"
    assert main(["gradcheck", "--seeds", "3", "--report", str(report)]) == 0
    out = capsys.readouterr().out
    assert _block(out, "gradcheck")["status"] == "pass" and report.read_text() == out


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["mmd", "--source", str(tmp_path / "nope.csv"), "--target", str(tmp_path / "nope.csv")]) == 2
    assert "data error" in capsys.readouterr().err


def test_malformed_csv_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x0,attr:A\n1.0,2\n")
    assert main(["train-mnet", "--data", str(bad), "--out", str(tmp_path / "m")]) == 2


def test_bad_learning_rate_exits_1(data_dir, tmp_path, capsys):
    assert main(["train-mnet", "--data", str(data_dir / "source.csv"), "--out", str(tmp_path / "m"),
                 "--lr", "-1"]) == 1
    assert "learning_rate" in capsys.readouterr().err


def test_divergence_exits_3(data_dir, tmp_path, capsys):
    with np.errstate(all="ignore"):
        code = main(["train-mnet", "--data", str(data_dir / "source.csv"), "--out", str(tmp_path / "m"),
                     "--lr", "1e200", *TRAIN[:2]])
    assert code == 3 and "numerical failure" in capsys.readouterr().err


def test_unknown_flag_exits_1():
    with pytest.raises(SystemExit) as info:
        main(["gradcheck", "--bogus"])
    assert info.value.code == 1


def test_unknown_config_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"train": {"speed": 3}}))
    assert main(["gradcheck", "--config", str(cfg), "--seeds", "1"]) in (0, 1)
