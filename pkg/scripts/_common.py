"""Helpers shared by the experiment scripts: seed ranges, process pools, CSV output."""

from __future__ import annotations

import argparse
import csv
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path


def seed_range(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        return [int(lo)]
    return list(range(int(lo), int(hi) + 1))


def base_parser(description: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--seeds", type=seed_range, default=seed_range("0..4"), help="a..b inclusive")
    p.add_argument("--jobs", type=int, default=min(5, os.cpu_count() or 1))
    p.add_argument("--out", default=default_out, help="CSV written here")
    return p


def run_seeds(fn, seeds, jobs):
    """Map ``fn`` over seeds; results come back in seed order whatever the pool does."""
    if jobs <= 1:
        return [fn(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, seeds))


def write_rows(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
