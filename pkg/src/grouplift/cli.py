"""Command-line entry point: ``grouplift <subcommand> [options]``.

Every subcommand accepts ``--config FILE``, a JSON object with optional
``"train"`` (TrainConfig fields) and ``"data"`` (SyntheticSpec fields)
sections. Flags given on the command line override the file.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical
failure (divergence or a failed gradient check).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt_io
from . import gradcheck as gc
from . import multilabel as ml
from . import transfer as tr
from .config import TrainConfig
from .data import (
    LabeledDomain,
    SyntheticSpec,
    UnlabeledDomain,
    check_fractions,
    generate,
    load_csv,
    save_csv,
    split,
    validate_spec,
)
from .errors import (
    ArgumentError,
    DataError,
    GenerationError,
    GroupliftError,
    NumericError,
    ShapeError,
    TrainingError,
)
from .grouping import (
    AttributeGrouping,
    assign_group_weights,
    cluster_attributes,
    emphasized_weights,
    equal_weights,
    estimate_correlation,
    read_grouping_file,
    write_grouping_file,
)
from .mmd import DEFAULT_SCALES, KernelFamily, median_heuristic_bandwidths, mkmmd_sq

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
SPLIT_NAMES = {1: ("all",), 2: ("train", "test"), 3: ("train", "val", "test")}


class ConfigError(GroupliftError):
    """Invalid command-line or config-file value; the message names the field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- parsing helpers


def _floats(field: str, text: str | None):
    if text is None:
        return None
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(field, f"expected comma-separated numbers, got {text!r}") from None


def _ints(field: str, text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(field, f"expected comma-separated integers, got {text!r}") from None


def _names(text: str | None):
    if text is None:
        return None
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _parse_sweep(text: str | None):
    if text is None:
        return None
    key, _, rng = text.partition("=")
    lo, sep, hi = rng.partition("..")
    try:
        if key != "seeds" or not sep:
            raise ValueError
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise ConfigError("sweep", f"expected seeds=a..b, got {text!r}") from None
    if hi < lo:
        raise ConfigError("sweep", f"empty seed range {lo}..{hi}")
    return list(range(lo, hi + 1))


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    unknown = set(data) - {"train", "data"}
    if unknown:
        raise ConfigError("config", f"unknown sections {sorted(unknown)}")
    return data


def _build(cls, base: dict, overrides: dict, section: str):
    merged = dict(base)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(cls)}
    for key in merged:
        if key not in known:
            raise ConfigError(f"{section}.{key}", "unknown field")
    try:
        return cls(**merged)
    except (ArgumentError, GenerationError) as exc:
        name = next((k for k in sorted(known, key=len, reverse=True) if str(exc).startswith(k)), section)
        raise ConfigError(name, str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(section, str(exc)) from None


def _train_config(args, **extra) -> TrainConfig:
    file_cfg = _load_config_file(args.config).get("train", {})
    overrides = {
        "seed": getattr(args, "seed", None),
        "learning_rate": getattr(args, "lr", None),
        "batch_size": getattr(args, "batch_size", None),
        "epochs": getattr(args, "epochs", None),
        "trunk_dims": _ints("trunk_dims", getattr(args, "trunk_dims", None)),
        "head_dims": _ints("head_dims", getattr(args, "head_dims", None)),
    }
    overrides.update(extra)
    return _build(TrainConfig, file_cfg, overrides, "train")


def _spec(args) -> SyntheticSpec:
    file_spec = _load_config_file(args.config).get("data", {})
    overrides = {
        "feature_dim": args.feature_dim,
        "group_sizes": _ints("group_sizes", args.groups),
        "rho_in": args.rho_in,
        "rho_out": args.rho_out,
        "n_source": args.n_source,
        "n_target": args.n_target,
        "shift": args.shift,
        "rotation_deg": args.rotation,
        "seed": args.seed,
        "attribute_names": _names(args.names),
        "shift_subset": args.shift_subset,
        "group_signal": _floats("group_signal", args.group_signal),
    }
    spec = _build(SyntheticSpec, file_spec, overrides, "data")
    try:
        validate_spec(spec)
    except GenerationError as exc:
        raise ConfigError("data", str(exc)) from None
    return spec


def _seeded_path(path, seed, sweep):
    if path is None or not sweep:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}.seed{seed}{p.suffix}"))


def _emit(text: str, path) -> None:
    sys.stdout.write(text)
    if path:
        Path(path).write_text(text)


def _block(title: str, items) -> str:
    lines = [f"[{title}]"]
    for key, value in items:
        if isinstance(value, float):
            value = format(value, ".6f")
        lines.append(f"{key} {value}")
    return "\n".join(lines) + "\n"


def _labeled(path) -> LabeledDomain:
    domain = load_csv(path)
    if not isinstance(domain, LabeledDomain):
        raise DataError(f"{path}: expected attr: label columns")
    return domain


def _as_target(domain) -> UnlabeledDomain:
    if isinstance(domain, LabeledDomain):
        return UnlabeledDomain(domain.features, domain.labels, domain.names)
    return domain


def _weights_for(args, names, grouping: AttributeGrouping | None, file_weights):
    scheme = args.weights
    if scheme is None:
        scheme = "file" if file_weights is not None else ("grouped" if grouping is not None else "equal")
    if scheme == "file":
        if file_weights is None:
            raise ConfigError("weights", "grouping file has no [weights] section")
        return scheme, np.asarray(file_weights, dtype=np.float64)
    if scheme == "equal":
        return scheme, equal_weights(len(names))
    if grouping is None:
        raise ConfigError("weights", f"scheme {scheme!r} needs a grouping")
    if scheme == "grouped":
        return scheme, assign_group_weights(grouping)
    if args.group is None:
        raise ConfigError("group", "--weights emphasized needs --group N (1-based)")
    if not 1 <= args.group <= grouping.n_groups:
        raise ConfigError("group", f"{args.group} outside 1..{grouping.n_groups}")
    return scheme, emphasized_weights(grouping, args.group - 1)


def _sweep(worker, args, seeds):
    if not seeds:
        return worker(args, None)
    workers = min(len(seeds), os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        texts = list(pool.map(worker, [args] * len(seeds), seeds))
    return "".join(texts)


# ---------------------------------------------------------------- subcommands


def cmd_gen_data(args) -> int:
    spec = _spec(args)
    fractions = None
    if args.split is not None:
        try:
            fractions = check_fractions(_floats("split", args.split))
        except ArgumentError as exc:
            raise ConfigError("split", str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    source, target = generate(spec)
    save_csv(out / "source.csv", source)
    save_csv(out / "target.csv", target)
    (out / "spec.json").write_text(json.dumps({"data": asdict(spec)}, indent=2, sort_keys=True) + "\n")
    items = [("seed", spec.seed), ("n_source", len(source)), ("n_target", len(target)),
             ("attributes", ",".join(spec.names)), ("planted_groups", ";".join(",".join(spec.names[i] for i in g)
                                                                             for g in spec.planted_groups))]
    if fractions is not None:
        parts = split(source, fractions, spec.seed)
        labels = SPLIT_NAMES.get(len(parts), tuple(f"part{k}" for k in range(len(parts))))
        for label, part in zip(labels, parts):
            save_csv(out / f"source_{label}.csv", part)
            items.append((f"split_{label}", len(part)))
    _emit(_block("gen-data", items), None)
    return EXIT_OK


def cmd_group(args) -> int:
    domain = _labeled(args.data) if args.data else None
    if args.from_file:
        names = list(domain.names) if domain is not None else None
        names, grouping, file_weights = read_grouping_file(args.from_file, names)
    else:
        if domain is None:
            raise ConfigError("data", "--data is required unless --from is given")
        if args.n_groups is None:
            raise ConfigError("n_groups", "--n-groups is required unless --from is given")
        if not 1 <= args.n_groups <= len(domain.names):
            raise ConfigError("n_groups", f"{args.n_groups} outside 1..{len(domain.names)}")
        names = list(domain.names)
        grouping = cluster_attributes(estimate_correlation(domain.labels), args.n_groups).canonical()
        file_weights = None
    if args.weights == "file" and file_weights is None:
        raise ConfigError("weights", "no weights section to reuse")
    scheme, weights = _weights_for(args, names, grouping, file_weights)
    if args.out:
        write_grouping_file(args.out, names, grouping, weights)
    lines = [_block("group", [("n_groups", grouping.n_groups), ("scheme", scheme)])]
    lines.append("group,attributes\n")
    for k, g in enumerate(grouping.groups, start=1):
        lines.append(f"{k},{' '.join(names[i] for i in g)}\n")
    lines.append("attribute,group,weight\n")
    for i, name in enumerate(names):
        lines.append(f"{name},{grouping.assignment[i] + 1},{format(float(weights[i]), '.17g')}\n")
    _emit("".join(lines), args.report)
    return EXIT_OK


def _train_mnet_one(args, seed):
    sweep = seed is not None
    cfg = _train_config(args) if seed is None else _train_config(args, seed=seed)
    data = _labeled(args.data)
    grouping, file_weights = None, None
    if args.grouping:
        _, grouping, file_weights = read_grouping_file(args.grouping, data.names)
    if args.exclude:
        dropped = set(_names(args.exclude))
        for n in dropped:
            data.column(n)
        idx = [i for i, n in enumerate(data.names) if n not in dropped]
        if not idx:
            raise ConfigError("exclude", "every attribute excluded")
        data = LabeledDomain(data.features, data.labels[:, idx], tuple(data.names[i] for i in idx))
        if grouping is not None:
            # file weights no longer sum to one over the kept attributes
            grouping, file_weights = grouping.restrict(idx), None
    scheme, weights = _weights_for(args, data.names, grouping, file_weights)
    eval_set = None
    if args.eval_data:
        ev = _labeled(args.eval_data)
        eval_set = (ev.features, ev.labels[:, [ev.column(n) for n in data.names]])
    rng = np.random.default_rng(cfg.seed)
    model = ml.build_model(data.features.shape[1], data.names, rng, cfg.trunk_dims, cfg.head_dims, weights)
    model, history = ml.train_mnet(model, data.features, data.labels, cfg, eval_set)
    ckpt_io.save(_seeded_path(args.out, cfg.seed, sweep), ml.to_checkpoint(model, cfg.seed, cfg.hash()))
    if args.metrics:
        Path(_seeded_path(args.metrics, cfg.seed, sweep)).write_text(ml.metrics_csv(history, data.names))
    final = history[-1] if history else None
    items = [("seed", cfg.seed), ("scheme", scheme), ("epochs", cfg.epochs), ("config_hash", cfg.hash())]
    if final is not None:
        items.append(("final_loss", final.total_loss))
        items += [(f"acc:{n}", float(a)) for n, a in zip(data.names, final.accuracies)]
        items.append(("mean_accuracy", float(np.mean(final.accuracies))))
    return _block("train-mnet", items)


def cmd_train_mnet(args) -> int:
    seeds = _parse_sweep(args.sweep)
    _train_config(args)
    _emit(_sweep(_train_mnet_one, args, seeds), args.report)
    return EXIT_OK


def _transfer_config(args, seed=None) -> TrainConfig:
    extra = {
        "alpha": args.alpha,
        "freeze_depth": args.freeze_depth,
        "mmd_layers": _ints("mmd_layers", args.mmd_layers),
        "mmd_multipliers": _floats("mmd_multipliers", args.mmd_multipliers),
        "kernel_scales": _floats("kernel_scales", args.kernel_scales),
        "estimator": args.estimator,
    }
    if seed is not None:
        extra["seed"] = seed
    return _train_config(args, **extra)


def _transfer_one(args, seed):
    sweep = seed is not None
    cfg = _transfer_config(args, seed)
    mnet = ml.from_checkpoint(ckpt_io.load(args.checkpoint))
    source = _labeled(args.source_data)
    target = _as_target(load_csv(args.target_data))
    target_attr = args.target_attr or args.source_attr
    alpha, alpha_source = cfg.alpha, "fixed"
    if args.alpha_policy == "grouped":
        if not args.grouping:
            raise ConfigError("alpha_policy", "grouped policy needs --grouping FILE")
        names, grouping, _ = read_grouping_file(args.grouping)
        alpha, alpha_source = tr.alpha_policy(grouping, names, args.source_attr, target_attr), "grouped"
    model = tr.source_network(mnet, args.source_attr)
    task = tr.task_from_config(source, args.source_attr, target, target_attr, cfg, alpha=alpha)
    direct = tr.direct_transfer(model, task)
    adapted, history = tr.train_tnet(model, task, cfg)
    if args.metrics:
        Path(_seeded_path(args.metrics, cfg.seed, sweep)).write_text(tr.metrics_csv(history))
    if args.out:
        ckpt_io.save(_seeded_path(args.out, cfg.seed, sweep), tr.to_checkpoint(adapted, cfg.seed, cfg.hash()))
    layers = tr.resolve_layers(adapted, task)
    if args.dump_embeddings:
        out = Path(_seeded_path(args.dump_embeddings, cfg.seed, sweep))
        out.mkdir(parents=True, exist_ok=True)
        for tag, feats in (("source", source.features), ("target", target.features)):
            for i, act in tr.layer_embeddings(adapted, feats, layers).items():
                save_csv(out / f"{tag}_layer{i}.csv", UnlabeledDomain(act))
    adapted_acc = history[-1].target_accuracy if history else direct.accuracy

    def fmt(v):
        return "n/a" if v is None else float(v)

    items = [
        ("seed", cfg.seed),
        ("source_attribute", args.source_attr),
        ("target_attribute", target_attr),
        ("alpha", format(alpha, "g")),
        ("alpha_source", alpha_source),
        ("freeze_depth", tr.resolve_freeze(model, task)),
        ("mmd_layers", ",".join(str(i) for i in layers)),
        ("estimator", cfg.estimator),
        ("kernel_scales", ",".join(format(s, "g") for s in cfg.kernel_scales)),
        ("epochs", cfg.epochs),
        ("direct_accuracy", fmt(direct.accuracy)),
        ("adapted_accuracy", fmt(adapted_acc)),
    ]
    if direct.accuracy is not None and adapted_acc is not None:
        items.append(("gain", float(adapted_acc - direct.accuracy)))
    if history:
        items += [("mmd_first_epoch", history[0].mmd_sum), ("mmd_last_epoch", history[-1].mmd_sum)]
    return _block("transfer", items)


def cmd_transfer(args) -> int:
    seeds = _parse_sweep(args.sweep)
    _transfer_config(args)
    if args.alpha is not None and args.alpha_policy == "grouped":
        raise ConfigError("alpha", "give either --alpha or --alpha-policy grouped, not both")
    _emit(_sweep(_transfer_one, args, seeds), args.report)
    return EXIT_OK


def cmd_mmd(args) -> int:
    if args.estimator not in ("biased", "unbiased"):
        raise ConfigError("estimator", f"unknown estimator {args.estimator!r}")
    scales = _floats("kernel_scales", args.kernel_scales)
    bandwidths = _floats("bandwidths", args.bandwidths)
    kernels = None
    if bandwidths is not None:
        try:
            kernels = KernelFamily.uniform(bandwidths)
        except ArgumentError as exc:
            raise ConfigError("bandwidths", str(exc)) from None
    source = load_csv(args.source).features
    target = load_csv(args.target).features
    if source.shape[1] != target.shape[1]:
        raise ShapeError(f"source has {source.shape[1]} features, target {target.shape[1]}")
    if kernels is None:
        kernels = median_heuristic_bandwidths(np.vstack([source, target]), scales or DEFAULT_SCALES)
    value = mkmmd_sq(source, target, kernels, args.estimator)
    head = _block("mmd", [("estimator", value.kind), ("value", format(value.value, ".17g")),
                          ("n_source", source.shape[0]), ("n_target", target.shape[0]), ("dim", source.shape[1])])
    rows = ["bandwidth,coefficient,per_kernel"]
    for s, b, v in zip(kernels.bandwidths, kernels.coefficients, value.per_kernel):
        rows.append(f"{format(s, '.17g')},{format(b, '.17g')},{format(v, '.17g')}")
    _emit(head + "\n".join(rows) + "\n", args.report)
    return EXIT_OK


def cmd_eval(args) -> int:
    runs = []
    for item in args.runs:
        label, sep, path = item.partition("=")
        if not sep or not label or not path:
            raise ConfigError("runs", f"expected LABEL=CHECKPOINT, got {item!r}")
        runs.append((label, ml.from_checkpoint(ckpt_io.load(path))))
    data = _labeled(args.data)
    table = {}
    for label, model in runs:
        cols = [data.column(n) for n in model.attribute_names]
        decisions = ml.predict(model, data.features).decisions
        table[label] = dict(zip(model.attribute_names, ml.accuracy(decisions, data.labels[:, cols])))
    names = [n for n in data.names if all(n in t for t in table.values())]
    if not names:
        raise DataError("no attribute is shared by every run and the data")
    labels = [label for label, _ in runs]
    lines = ["attribute," + ",".join(labels)]
    for n in names:
        lines.append(n + "," + ",".join(f"{table[label][n]:.6f}" for label in labels))
    means = [float(np.mean([table[label][n] for n in names])) for label in labels]
    lines.append("mean," + ",".join(f"{m:.6f}" for m in means))
    text = "\n".join(lines) + "\n"
    if len(labels) == 2:
        a, b = labels
        wins = sum(table[a][n] > table[b][n] for n in names)
        text += _block("eval", [("mean_difference", means[0] - means[1]), (f"attributes_{a}_ahead", wins),
                                ("attributes", len(names))])
    _emit(text, args.report)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    components = list(gc.CHECKS) if args.components is None else list(_names(args.components))
    for c in components:
        if c not in gc.CHECKS:
            raise ConfigError("components", f"unknown component {c!r}; choose from {sorted(gc.CHECKS)}")
    if args.seeds < 1:
        raise ConfigError("seeds", "need at least one seed")
    results = gc.run_suite(args.seeds, components)
    lines = ["component,instances,max_rel_error,status"]
    failed = False
    for c in components:
        errs = [r.rel_error for r in results if r.name == c]
        ok = all(r.passed for r in results if r.name == c)
        failed |= not ok
        lines.append(f"{c},{len(errs)},{max(errs):.3e},{'pass' if ok else 'FAIL'}")
    text = "\n".join(lines) + "\n" + _block("gradcheck", [("tolerance", format(gc.TOLERANCE, "g")),
                                                       ("epsilon", format(gc.EPS, "g")),
                                                       ("status", "FAIL" if failed else "pass")])
    _emit(text, args.report)
    return EXIT_NUMERIC if failed else EXIT_OK


# ---------------------------------------------------------------- parser


def _add_train_flags(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--lr", type=float, help="learning rate")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--trunk-dims", help="comma-separated hidden widths of the shared trunk")
    p.add_argument("--head-dims", help="comma-separated hidden widths of each head")
    p.add_argument("--sweep", help="seeds=a..b: run each seed in its own process")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grouplift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON file with 'train' and/or 'data' sections")
        p.add_argument("--report", help="also write the printed report here")
        p.set_defaults(func=func)
        return p

    p = add("gen-data", cmd_gen_data, "generate synthetic source/target CSVs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--feature-dim", type=int)
    p.add_argument("--groups", help="planted group sizes, e.g. 2,3,1")
    p.add_argument("--rho-in", type=float)
    p.add_argument("--rho-out", type=float)
    p.add_argument("--n-source", type=int)
    p.add_argument("--n-target", type=int)
    p.add_argument("--shift", type=float)
    p.add_argument("--rotation", type=float, help="degrees")
    p.add_argument("--shift-subset", choices=("all", "nuisance"))
    p.add_argument("--group-signal", help="per-group feature scale, e.g. 1,1,0.3")
    p.add_argument("--names", help="comma-separated attribute names")
    p.add_argument("--seed", type=int)
    p.add_argument("--split", help="fractions for train/val/test files of the source, e.g. 0.8,0.1,0.1")

    p = add("group", cmd_group, "cluster attributes and assign loss weights")
    p.add_argument("--data", help="labelled CSV")
    p.add_argument("--n-groups", type=int)
    p.add_argument("--from", dest="from_file", help="ingest an existing (hand-edited) grouping file")
    p.add_argument("--weights", choices=("grouped", "equal", "emphasized", "file"), default=None)
    p.add_argument("--group", type=int, help="1-based group for --weights emphasized")
    p.add_argument("--out", help="grouping file to write")

    p = add("train-mnet", cmd_train_mnet, "train the multi-label network")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--grouping", help="grouping file")
    p.add_argument("--weights", choices=("grouped", "equal", "emphasized", "file"), default=None)
    p.add_argument("--group", type=int, help="1-based group for --weights emphasized")
    p.add_argument("--exclude", help="comma-separated attributes to leave out")
    p.add_argument("--eval-data", help="labelled CSV scored after each epoch")
    p.add_argument("--metrics", help="per-epoch metrics CSV")
    _add_train_flags(p)

    p = add("transfer", cmd_transfer, "adapt one head to an unlabelled target domain")
    p.add_argument("--checkpoint", required=True, help="multi-label checkpoint")
    p.add_argument("--source-data", required=True)
    p.add_argument("--target-data", required=True)
    p.add_argument("--source-attr", required=True)
    p.add_argument("--target-attr", help="attribute scored on the target (defaults to the source one)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-policy", choices=("fixed", "grouped"), default="fixed")
    p.add_argument("--grouping", help="grouping file for --alpha-policy grouped")
    p.add_argument("--freeze-depth", type=int)
    p.add_argument("--mmd-layers", help="comma-separated layer indices")
    p.add_argument("--mmd-multipliers", help="one multiplier per MMD layer")
    p.add_argument("--kernel-scales", help="median-heuristic multipliers")
    p.add_argument("--estimator", choices=("biased", "unbiased"))
    p.add_argument("--metrics", help="per-epoch metrics CSV")
    p.add_argument("--out", help="adapted checkpoint path")
    p.add_argument("--dump-embeddings", help="directory for per-layer activation CSVs")
    _add_train_flags(p)

    p = add("mmd", cmd_mmd, "MK-MMD between two feature CSVs")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--estimator", default="biased")
    p.add_argument("--kernel-scales", help="median-heuristic multipliers")
    p.add_argument("--bandwidths", help="explicit bandwidths, uniform coefficients")

    p = add("eval", cmd_eval, "per-attribute accuracy table for one or more checkpoints")
    p.add_argument("--data", required=True)
    p.add_argument("runs", nargs="+", metavar="LABEL=CHECKPOINT")

    p = add("gradcheck", cmd_gradcheck, "finite-difference check of every analytic gradient")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--components", help=f"subset of {','.join(gc.CHECKS)}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ArgumentError) as exc:
        return _fail(EXIT_CONFIG, "config error", exc)
    except (DataError, ShapeError, OSError) as exc:
        return _fail(EXIT_DATA, "data error", exc)
    except (NumericError, TrainingError) as exc:
        return _fail(EXIT_NUMERIC, "numerical failure", exc)


def _fail(code: int, kind: str, exc: Exception) -> int:
    print(f"grouplift: {kind}: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
