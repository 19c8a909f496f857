"""Random specs and policies for tests, sweeps and benchmarks."""

from __future__ import annotations

import numpy as np

from edgemig.costs import ConstPlusExpCost
from edgemig.distance_mdp import DistanceMdpSpec, DistancePolicy
from edgemig.hex_mdp import HexMdpSpec, HexPolicy
from edgemig.hexgrid import grid

R_MAX = 1.0 / 6.0


def random_cost(rng, concave=True, scale=2.0) -> ConstPlusExpCost:
    """Valid constant-plus-exponential cost.

    ``concave`` draws base in [0.3, 1) with a negative exponential term;
    otherwise the base is in (1, 1.5] with a positive one.
    """
    if concave:
        base = rng.uniform(0.3, 0.999)
        lin = -rng.uniform(0.0, scale)
    else:
        base = rng.uniform(1.001, 1.5)
        lin = rng.uniform(0.0, scale)
    const = -lin + rng.uniform(0.0, scale)
    return ConstPlusExpCost(const, lin, base)


def random_distance_spec(rng, n_max=10, gamma=None, concave=True) -> DistanceMdpSpec:
    """Distance spec with p in (0, 1/2], q in [0, 1/2], p0 in (0, 1]."""
    p = rng.uniform(0.01, 0.5)
    q = rng.uniform(0.0, 0.5)
    p0 = rng.uniform(0.01, 1.0)
    if gamma is None:
        gamma = rng.choice([0.5, 0.9, 0.99])
    return DistanceMdpSpec(
        n_max, p0, p, q, float(gamma), random_cost(rng, concave), random_cost(rng, concave)
    )


def random_distance_policy(rng, n_max, migrate_prob=0.4) -> DistancePolicy:
    acts = [0]
    for d in range(1, n_max + 1):
        if d == n_max or rng.random() < migrate_prob:
            acts.append(int(rng.integers(0, d)))
        else:
            acts.append(d)
    return DistancePolicy(tuple(acts))


def random_hex_spec(rng, n_max=None, gamma=None, concave=True, n_range=(3, 10)) -> HexMdpSpec:
    if n_max is None:
        n_max = int(rng.integers(n_range[0], n_range[1] + 1))
    if gamma is None:
        gamma = rng.choice([0.5, 0.9, 0.99])
    r = rng.uniform(1e-3, R_MAX)
    return HexMdpSpec(n_max, r, float(gamma), random_cost(rng, concave), random_cost(rng, concave))


def random_hex_policy(rng, n_max, migrate_prob=0.4) -> HexPolicy:
    """Random policy that respects the 'never move farther' restriction."""
    g = grid(n_max)
    acts = np.arange(g.size)
    for s in range(1, g.size):
        if g.ring[s] == n_max or rng.random() < migrate_prob:
            choices = np.nonzero(g.ring < g.ring[s])[0]
            acts[s] = int(rng.choice(choices))
    return HexPolicy(n_max, acts)


def sweep_costs(neg_beta_l, mu=0.8, theta=0.8):
    """Migration/transmission costs with beta_c + beta_l = 1, delta_c = 1, delta_l = -1."""
    c_m = ConstPlusExpCost(1.0 + neg_beta_l, -neg_beta_l, mu)
    c_d = ConstPlusExpCost(1.0, -1.0, theta)
    return c_m, c_d


def sweep_spec(neg_beta_l, r, gamma, n_max=10) -> HexMdpSpec:
    c_m, c_d = sweep_costs(neg_beta_l)
    return HexMdpSpec(n_max, r, gamma, c_m, c_d)


def random_move_probs(seed, count):
    """Draws of r uniform on (0, 1/6], one per seed slot."""
    rng = np.random.default_rng(seed)
    return R_MAX * (1.0 - rng.random(count))
