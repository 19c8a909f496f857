"""Monte Carlo evaluation of 2-D policies under the uniform hexagon walk.

Slot timing: observe the offset, apply the action (migration then
transmission cost), then the user moves.
"""

from __future__ import annotations

import math

import numpy as np

from edgemig import hex_mdp
from edgemig.costs import eval_cost
from edgemig.errors import ZeroBaseline
from edgemig.hex_mdp import HexMdpSpec, HexPolicy
from edgemig.hexgrid import HexOffset


def outcome_table(spec: HexMdpSpec):
    """(targets, cumulative probabilities), both (S, 7): stay first, then the 6 moves."""
    g = spec.grid
    r = spec.move_prob
    own = np.arange(g.size)[:, None]
    nb = g.neighbor_index
    targets = np.concatenate([own, np.where(nb >= 0, nb, own)], axis=1)
    probs = np.concatenate([np.full((g.size, 1), 1.0 - 6.0 * r), np.full((g.size, 6), r)], axis=1)
    return targets, np.cumsum(probs, axis=1)


def default_horizon(spec: HexMdpSpec, policy: HexPolicy, tail_tol=1e-6) -> int:
    """Smallest T with gamma**T * C_max / (1 - gamma) < tail_tol."""
    c = policy_costs(spec, policy)
    cmax = float(np.max(c)) if c.size else 0.0
    if cmax <= 0:
        return 1
    bound = tail_tol * (1.0 - spec.gamma) / cmax
    return max(1, math.ceil(math.log(bound) / math.log(spec.gamma)) + 1)


def policy_costs(spec: HexMdpSpec, policy: HexPolicy) -> np.ndarray:
    g = spec.grid
    acts = policy.as_array()
    return eval_cost(spec.migration_cost, g.dist[np.arange(g.size), acts]) + eval_cost(
        spec.transmission_cost, g.ring[acts]
    )


def simulate_random_walk(
    spec: HexMdpSpec,
    policy: HexPolicy,
    horizon=None,
    episodes=10_000,
    seed=0,
    start: HexOffset = HexOffset(0, 0),
    tail_tol=1e-6,
):
    """Discounted cost from ``start`` averaged over episodes.

    Returns ``(mean, standard_error)``. Identical seeds give identical output.
    """
    g = spec.grid
    horizon = default_horizon(spec, policy, tail_tol) if horizon is None else int(horizon)
    rng = np.random.default_rng(seed)
    acts = policy.as_array()
    cost = policy_costs(spec, policy)
    targets, cum = outcome_table(spec)
    states = np.full(episodes, g.state(start), dtype=np.int64)
    total = np.zeros(episodes)
    disc = 1.0
    for _ in range(horizon):
        total += disc * cost[states]
        inter = acts[states]
        u = rng.random(episodes)
        k = np.minimum((cum[inter] <= u[:, None]).sum(axis=1), 6)
        states = targets[inter, k]
        disc *= spec.gamma
    se = float(total.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else float("nan")
    return float(total.mean()), se


def exact_value_at(spec: HexMdpSpec, policy: HexPolicy, start: HexOffset = HexOffset(0, 0)) -> float:
    return float(hex_mdp.evaluate_policy_2d(spec, policy)[spec.grid.state(start)])


def cost_reduction(baseline_cost: float, proposed_cost: float) -> float:
    """(C0 - C) / C0; negative when the proposed policy costs more."""
    if not baseline_cost > 0:
        raise ZeroBaseline(f"baseline cost must be positive, got {baseline_cost}")
    return (baseline_cost - proposed_cost) / baseline_cost
