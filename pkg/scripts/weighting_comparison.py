"""Group-balanced vs all-ones loss weights on data with one data-scarce group.

The all-ones run uses ``learning_rate / I`` so both runs take the same total
step size; see the README for why.

    python scripts/weighting_comparison.py --seeds 0..4
"""

from __future__ import annotations

from dataclasses import replace
from functools import partial

import numpy as np
from _common import base_parser, run_seeds, write_rows

from grouplift.experiments import SCARCE_GROUP_SPEC, WEIGHTING_CONFIG, weighting_run


def one(seed, epochs=WEIGHTING_CONFIG.epochs):
    return weighting_run(replace(SCARCE_GROUP_SPEC, seed=seed), replace(WEIGHTING_CONFIG, epochs=epochs))


def main():
    p = base_parser(__doc__.splitlines()[0], "results/weighting_comparison.csv")
    p.add_argument("--epochs", type=int, default=WEIGHTING_CONFIG.epochs)
    args = p.parse_args()
    outcomes = run_seeds(partial(one, epochs=args.epochs), args.seeds, args.jobs)
    rows = []
    for o in outcomes:
        for name, g, e in zip(o.names, o.grouped, o.equal):
            rows.append([o.seed, name, f"{g:.4f}", f"{e:.4f}"])
        print(f"seed {o.seed}: grouped {o.grouped_mean:.3f}  equal {o.equal_mean:.3f}")
    write_rows(args.out, ["seed", "attribute", "grouped", "equal"], rows)
    g = np.mean([o.grouped_mean for o in outcomes])
    e = np.mean([o.equal_mean for o in outcomes])
    print(f"mean per-attribute accuracy: grouped {g:.4f}, equal {e:.4f}; wrote {args.out}")


if __name__ == "__main__":
    main()
