"""2-D offset MDP on hexagonal cells and its distance-based approximation.

The user moves to each of the six neighbouring cells with probability r
per slot. States are offsets e = u - h with ring(e) <= N; a policy maps an
offset to the offset after migration. Moves that would leave ring N are
folded back into "stay" so the truncated chain stays stochastic (valid
policies never hold at ring N, so this never fires for them).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from edgemig.costs import ConstPlusExpCost, eval_cost, validate
from edgemig.distance_mdp import DistanceMdpSpec, DistancePolicy, modified_policy_iteration
from edgemig.errors import InvalidAction, InvalidSpec, NonConvergence
from edgemig.hexgrid import HexGrid, HexOffset, grid

TIE_TOL = 1e-12


@dataclass(frozen=True)
class HexMdpSpec:
    n_max: int
    move_prob: float
    gamma: float
    migration_cost: ConstPlusExpCost
    transmission_cost: ConstPlusExpCost

    def __post_init__(self):
        problems = []
        if int(self.n_max) != self.n_max or self.n_max < 1:
            problems.append(f"n_max must be a positive integer (got {self.n_max})")
        if not 0.0 <= self.move_prob <= 1.0 / 6.0 + 1e-12:
            problems.append(f"move_prob must lie in [0, 1/6] (got {self.move_prob})")
        if not 0.0 < self.gamma < 1.0:
            problems.append(f"gamma must lie in (0, 1) (got {self.gamma})")
        for name in ("migration_cost", "transmission_cost"):
            problems += [f"{name}: {v}" for v in validate(getattr(self, name))]
        if problems:
            raise InvalidSpec("; ".join(problems))

    @property
    def grid(self) -> HexGrid:
        return grid(self.n_max)

    @property
    def n_states(self) -> int:
        return self.grid.size

    def with_costs(self, migration_cost=None, transmission_cost=None, **kw) -> "HexMdpSpec":
        return HexMdpSpec(
            kw.get("n_max", self.n_max),
            kw.get("move_prob", self.move_prob),
            kw.get("gamma", self.gamma),
            migration_cost or self.migration_cost,
            transmission_cost or self.transmission_cost,
        )


@dataclass(frozen=True)
class HexPolicy:
    """Action per state index of ``grid(n_max)``; actions are state indices too."""

    n_max: int
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        g = grid(self.n_max)
        if len(self.actions) != g.size:
            raise InvalidAction(f"expected {g.size} actions, got {len(self.actions)}")
        acts = np.asarray(self.actions)
        if np.any((acts < 0) | (acts >= g.size)):
            raise InvalidAction("action outside the state space")
        bad = np.nonzero(g.ring[acts] > g.ring)[0]
        if bad.size:
            raise InvalidAction(f"state {g.offsets[bad[0]]} migrates farther from the user")
        outer = (g.ring == self.n_max) & (g.ring[acts] >= self.n_max)
        if np.any(outer):
            s = int(np.nonzero(outer)[0][0])
            raise InvalidAction(f"state {g.offsets[s]} on ring N must migrate inward")

    @classmethod
    def unchecked(cls, n_max, actions) -> "HexPolicy":
        """Skip the no-move-away checks (used for unrestricted action spaces)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "n_max", n_max)
        object.__setattr__(obj, "actions", tuple(int(a) for a in actions))
        return obj

    def __getitem__(self, offset: HexOffset) -> HexOffset:
        g = grid(self.n_max)
        return g.offsets[self.actions[g.state(offset)]]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.actions)

    def ring_actions(self) -> np.ndarray:
        """Action ring for each state."""
        g = grid(self.n_max)
        return g.ring[self.as_array()]


def transition_matrix(spec: HexMdpSpec) -> np.ndarray:
    """P[a, e]: probability of offset e next slot given intermediate offset a."""
    g = spec.grid
    r = spec.move_prob
    P = np.zeros((g.size, g.size))
    rows = np.repeat(np.arange(g.size), 6)
    cols = g.neighbor_index.ravel()
    inside = cols >= 0
    np.add.at(P, (rows[inside], cols[inside]), r)
    outside = (~inside).reshape(g.size, 6).sum(axis=1)
    P[np.arange(g.size), np.arange(g.size)] += 1.0 - 6.0 * r + r * outside
    return P


def transition_distribution(spec: HexMdpSpec, intermediate: HexOffset) -> dict:
    g = spec.grid
    row = transition_matrix(spec)[g.state(intermediate)]
    return {g.offsets[k]: float(row[k]) for k in np.nonzero(row)[0]}


def allowed_actions(spec: HexMdpSpec, restrict: bool = True) -> np.ndarray:
    """Boolean mask [s, a]; ``restrict`` keeps only actions no farther than s."""
    g = spec.grid
    ring_s = g.ring[:, None]
    ring_a = g.ring[None, :]
    mask = ring_a <= ring_s if restrict else np.ones((g.size, g.size), dtype=bool)
    return mask & ~((ring_s == spec.n_max) & (ring_a >= spec.n_max))


def cost_matrix(spec: HexMdpSpec, restrict: bool = True) -> np.ndarray:
    """C[s, a] = c_m(hops(s, a)) + c_d(ring(a)); inf where a is not allowed."""
    g = spec.grid
    C = eval_cost(spec.migration_cost, g.dist) + eval_cost(spec.transmission_cost, g.ring)[None, :]
    return np.where(allowed_actions(spec, restrict), C, np.inf)


def _argmin_rows(Q):
    best = Q.min(axis=1, keepdims=True)
    tol = TIE_TOL * np.maximum(1.0, np.abs(best))
    return np.argmax(Q <= best + tol, axis=1)


def _evaluate(C_pi, P_pi, gamma):
    n = len(C_pi)
    return np.linalg.solve(np.eye(n) - gamma * P_pi, C_pi)


def evaluate_policy_2d(spec: HexMdpSpec, policy: HexPolicy, P=None) -> np.ndarray:
    """Exact discounted cost of ``policy`` at every offset (linear solve)."""
    if policy.n_max != spec.n_max:
        raise InvalidAction("policy and spec disagree on N")
    g = spec.grid
    P = transition_matrix(spec) if P is None else P
    acts = policy.as_array()
    c = eval_cost(spec.migration_cost, g.dist[np.arange(g.size), acts]) + eval_cost(
        spec.transmission_cost, g.ring[acts]
    )
    return _evaluate(c, P[acts], spec.gamma)


def solve_exact(spec: HexMdpSpec, method="policy-iteration", tolerance=1e-9, restrict=True, max_iter=None):
    """Optimal policy of the full 2-D MDP by standard value or policy iteration.

    Returns ``(policy, values, iterations)``.
    """
    C = cost_matrix(spec, restrict)
    P = transition_matrix(spec)
    g = spec.gamma
    if method == "policy-iteration":
        cap = max_iter or 1000
        rows = np.arange(len(C))
        acts = np.zeros(len(C), dtype=np.int64)
        for it in range(1, cap + 1):
            V = _evaluate(C[rows, acts], P[acts], g)
            new = _argmin_rows(C + g * (P @ V)[None, :])
            if np.array_equal(new, acts):
                return _policy(spec, acts, restrict), V, it
            acts = new
        raise NonConvergence(f"2-D policy iteration did not settle within {cap} iterations")
    if method == "value-iteration":
        cap = max_iter or 10_000_000
        stop = tolerance * (1.0 - g) / g
        V = np.zeros(len(C))
        for it in range(1, cap + 1):
            V_new = (C + g * (P @ V)[None, :]).min(axis=1)
            done = np.max(np.abs(V_new - V)) < stop
            V = V_new
            if done:
                acts = _argmin_rows(C + g * (P @ V)[None, :])
                return _policy(spec, acts, restrict), V, it
        raise NonConvergence(f"2-D value iteration did not converge within {cap} sweeps")
    raise ValueError(f"unknown method {method!r}")


def _policy(spec, acts, checked):
    return HexPolicy(spec.n_max, acts) if checked else HexPolicy.unchecked(spec.n_max, acts)


def bellman_residual(spec: HexMdpSpec, V, restrict=True) -> np.ndarray:
    C = cost_matrix(spec, restrict)
    P = transition_matrix(spec)
    return np.abs(V - (C + spec.gamma * (P @ V)[None, :]).min(axis=1))


def build_approx_distance_spec(spec: HexMdpSpec) -> DistanceMdpSpec:
    """Distance MDP with p0 = 6r, p = 2.5r, q = 1.5r and the same N, gamma, costs."""
    r = spec.move_prob
    return DistanceMdpSpec(
        spec.n_max, 6.0 * r, 2.5 * r, 1.5 * r, spec.gamma, spec.migration_cost, spec.transmission_cost
    )


def map_1d_policy_to_2d(spec: HexMdpSpec, dpolicy: DistancePolicy) -> HexPolicy:
    """Lift a distance policy: migrate along a shortest path into ring a*(i)."""
    if dpolicy.n_max != spec.n_max:
        raise InvalidAction("distance policy and spec disagree on N")
    g = spec.grid
    target_ring = np.asarray(dpolicy.actions)[g.ring]
    return HexPolicy(spec.n_max, g.toward[np.arange(g.size), target_ring])


def solve_approx(spec: HexMdpSpec):
    """Distance-MDP solve plus shortest-path lifting.

    Returns ``(hex_policy, distance_policy, distance_values)``.
    """
    dspec = build_approx_distance_spec(spec)
    dpolicy, dvalues, _ = modified_policy_iteration(dspec)
    return map_1d_policy_to_2d(spec, dpolicy), dpolicy, dvalues


def error_bound(spec: HexMdpSpec) -> float:
    """gamma * r * k / (1 - gamma), k = max over x in [0, N-2] of c_m(x+2) - c_m(x)."""
    x = np.arange(max(spec.n_max - 1, 1))
    steps = eval_cost(spec.migration_cost, x + 2) - eval_cost(spec.migration_cost, x)
    k = float(np.max(steps))
    return spec.gamma * spec.move_prob * k / (1.0 - spec.gamma)


def to_csv_rows(policy: HexPolicy, values):
    g = grid(policy.n_max)
    rows = []
    for s, a in enumerate(policy.actions):
        o, t = g.offsets[s], g.offsets[a]
        rows.append(
            {"ring": o.ring, "index": o.index, "action_ring": t.ring, "action_index": t.index, "value": float(values[s])}
        )
    return rows
