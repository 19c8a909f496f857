"""Wall time of the distance-based approximation vs exact policy iteration on the hexagon grid."""

import argparse
import statistics
import time

from edgemig import hex_mdp
from edgemig.sampling import sweep_spec


def median_time(fn, spec, runs):
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn(spec)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, nargs="+", default=[4, 6, 8, 10])
    ap.add_argument("--r", type=float, default=0.08)
    ap.add_argument("--gamma", type=float, default=0.9)
    ap.add_argument("--neg-beta-l", type=float, default=0.5)
    ap.add_argument("--runs", type=int, default=5)
    args = ap.parse_args()

    print(f"{'N':>3} {'states':>7} {'exact ms':>10} {'approx ms':>10} {'ratio':>7}")
    for n in args.n_max:
        spec = sweep_spec(args.neg_beta_l, args.r, args.gamma, n)
        spec.grid  # geometry is cached before timing
        te = median_time(hex_mdp.solve_exact, spec, args.runs)
        ta = median_time(hex_mdp.solve_approx, spec, args.runs)
        print(f"{n:>3} {spec.n_states:>7} {1e3 * te:>10.2f} {1e3 * ta:>10.2f} {te / ta:>7.1f}")


if __name__ == "__main__":
    main()
