"""Cost of the approximate, optimal and baseline policies over a -beta_l sweep.

Writes one CSV per discount factor and prints the worst excess of the
approximate policy over the optimum.
"""

import argparse
from pathlib import Path

import numpy as np
import pandas as pd

from edgemig.cli import SWEEP_POLICIES, sweep_point
from edgemig.sampling import random_move_probs, sweep_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50, help="random move probabilities per point")
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.5, 0.9, 0.99])
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/sweep")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rs = random_move_probs(args.seed, args.seeds)
    for gamma in args.gammas:
        rows = []
        for x in np.linspace(0.0, 1.0, args.points):
            per_r = [sweep_point(sweep_spec(float(x), float(r), gamma, args.n_max)) for r in rs]
            rows.append({"neg_beta_l": x, **{p: np.mean([m[p] for m in per_r]) for p in SWEEP_POLICIES}})
        df = pd.DataFrame(rows)
        df.to_csv(out / f"sweep_gamma{gamma:g}.csv", index=False)
        excess = (df["approx"] / df["optimal"] - 1).max()
        print(f"gamma={gamma:g}: worst approx excess {100 * excess:.2f}%")
        print(df.to_string(index=False, float_format=lambda v: f"{v:.4f}"))


if __name__ == "__main__":
    main()
