"""Text checkpoints for one or more named networks.

Layout::

    grouplift-ckpt v1
    seed 7
    config_hash 1f3a...
    meta attributes ["A0", "A1"]
    network trunk input_dim=16 layers=2
    layer 0 in=16 out=32 activation=relu frozen=0
    weights <out*in values, row-major>
    bias <out values>
    ...
    end

Floats are written with 17 significant digits, which round-trips float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .nncore import DenseLayer, DenseNetwork

HEADER = "grouplift-ckpt v1"


@dataclass
class Checkpoint:
    networks: dict[str, DenseNetwork]
    seed: int = 0
    config_hash: str = ""
    meta: dict = field(default_factory=dict)


def _fmt(values: np.ndarray) -> str:
    return " ".join(format(float(v), ".17g") for v in values.ravel())


def dumps(ckpt: Checkpoint) -> str:
    lines = [HEADER, f"seed {int(ckpt.seed)}", f"config_hash {ckpt.config_hash or '-'}"]
    for key in sorted(ckpt.meta):
        if not key or any(c.isspace() for c in key):
            raise ValueError(f"invalid meta key {key!r}")
        lines.append(f"meta {key} {json.dumps(ckpt.meta[key], sort_keys=True)}")
    for name, net in ckpt.networks.items():
        lines.append(f"network {name} input_dim={net.input_dim} layers={len(net)}")
        for i, layer in enumerate(net.layers):
            lines.append(
                f"layer {i} in={layer.in_dim} out={layer.out_dim} "
                f"activation={layer.activation} frozen={int(layer.frozen)}"
            )
            lines.append("weights " + _fmt(layer.weights))
            lines.append("bias " + _fmt(layer.bias))
    lines.append("end")
    return "\n".join(lines) + "\n"


def _kv(tokens, lineno):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParseError(f"expected key=value, got {tok!r}", lineno)
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _floats(line, tag, count, lineno):
    parts = line.split()
    if not parts or parts[0] != tag:
        raise ParseError(f"expected '{tag}' record", lineno)
    if len(parts) - 1 != count:
        raise ParseError(f"'{tag}' has {len(parts) - 1} values, expected {count}", lineno)
    try:
        return np.array([float(p) for p in parts[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def loads(text: str) -> Checkpoint:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(f"missing '{HEADER}' header", 1)
    ckpt = Checkpoint(networks={})
    i = 1
    saw_end = False
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        try:
            tag, _, rest = line.partition(" ")
            if tag == "seed":
                ckpt.seed = int(rest)
            elif tag == "config_hash":
                ckpt.config_hash = "" if rest == "-" else rest
            elif tag == "meta":
                key, _, payload = rest.partition(" ")
                try:
                    ckpt.meta[key] = json.loads(payload)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"bad meta value: {exc}", lineno) from None
            elif tag == "network":
                name, *props = rest.split()
                kv = _kv(props, lineno)
                n_layers = int(kv["layers"])
                layers = []
                for _ in range(n_layers):
                    if i + 2 >= len(lines):
                        raise ParseError("truncated network record", i + 1)
                    head = lines[i].split()
                    if not head or head[0] != "layer":
                        raise ParseError("expected 'layer' record", i + 1)
                    lkv = _kv(head[2:], i + 1)
                    n_in, n_out = int(lkv["in"]), int(lkv["out"])
                    w = _floats(lines[i + 1], "weights", n_in * n_out, i + 2).reshape(n_out, n_in)
                    b = _floats(lines[i + 2], "bias", n_out, i + 3)
                    layers.append(DenseLayer(w, b, lkv["activation"], lkv["frozen"] == "1"))
                    i += 3
                ckpt.networks[name] = DenseNetwork(tuple(layers), int(kv["input_dim"]))
            elif tag == "end":
                saw_end = True
                break
            else:
                raise ParseError(f"unknown record {tag!r}", lineno)
        except ParseError:
            raise
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed record: {exc}", lineno) from None
    if not saw_end:
        raise ParseError("missing 'end' record", len(lines))
    return ckpt


def save(path, ckpt: Checkpoint) -> None:
    Path(path).write_text(dumps(ckpt))


def load(path) -> Checkpoint:
    return loads(Path(path).read_text())
