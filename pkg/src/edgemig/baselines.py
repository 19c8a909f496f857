"""Reference policies (never / always / myopic) and policy comparison tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from edgemig import hex_mdp
from edgemig.distance_mdp import DistanceMdpSpec, DistancePolicy, evaluate_policy_linear_system, policy_iteration_1d
from edgemig.hex_mdp import HexMdpSpec, HexPolicy


class BaselineKind(str, Enum):
    NEVER = "never"
    ALWAYS = "always"
    MYOPIC = "myopic"


def _argmin_first(C):
    best = C.min(axis=1, keepdims=True)
    tol = hex_mdp.TIE_TOL * np.maximum(1.0, np.abs(best))
    return np.argmax(C <= best + tol, axis=1)


def build_baseline(spec, kind):
    """Baseline policy for a hexagon or distance spec.

    never:  hold the service, except on the outer ring N where it moves to the user
    always: move the service to the user whenever they differ
    myopic: minimise the one-slot cost only
    """
    kind = BaselineKind(kind)
    if isinstance(spec, HexMdpSpec):
        g = spec.grid
        if kind is BaselineKind.ALWAYS:
            acts = np.zeros(g.size, dtype=np.int64)
        elif kind is BaselineKind.NEVER:
            acts = np.where(g.ring == spec.n_max, 0, np.arange(g.size))
        else:
            acts = _argmin_first(hex_mdp.cost_matrix(spec))
        return HexPolicy(spec.n_max, acts)
    if isinstance(spec, DistanceMdpSpec):
        n = spec.n_max
        if kind is BaselineKind.ALWAYS:
            return DistancePolicy.always_migrate(n)
        if kind is BaselineKind.NEVER:
            return DistancePolicy.never_migrate(n)
        return DistancePolicy(_argmin_first(spec.cost_matrix()))
    raise TypeError(f"unsupported spec type {type(spec).__name__}")


@dataclass
class Comparison:
    values: dict  # name -> per-state values
    optimal: str = "optimal"
    labels: list = field(default_factory=list)  # state labels in row order

    @property
    def means(self) -> dict:
        return {k: float(np.mean(v)) for k, v in self.values.items()}

    def gap(self, name) -> np.ndarray:
        return self.values[name] - self.values[self.optimal]

    def rows(self):
        out = []
        for name, vals in self.values.items():
            for label, v in zip(self.labels, vals):
                out.append({"policy": name, "state": label, "value": float(v)})
            out.append({"policy": name, "state": "mean", "value": float(np.mean(vals))})
        return out


def compare_policies(spec, policies: dict, optimal=None) -> Comparison:
    """Exact per-state discounted costs for each named policy plus the optimum.

    ``optimal`` may carry a precomputed optimal value table; otherwise it is
    solved with standard policy iteration.
    """
    values = {}
    if isinstance(spec, HexMdpSpec):
        P = hex_mdp.transition_matrix(spec)
        if optimal is None:
            _, optimal, _ = hex_mdp.solve_exact(spec)
        for name, pol in policies.items():
            values[name] = hex_mdp.evaluate_policy_2d(spec, pol, P=P)
        labels = [f"{o.ring}:{o.index}" for o in spec.grid.offsets]
    elif isinstance(spec, DistanceMdpSpec):
        if optimal is None:
            _, optimal, _ = policy_iteration_1d(spec)
        for name, pol in policies.items():
            values[name] = evaluate_policy_linear_system(spec, pol)
        labels = [str(d) for d in range(spec.n_states)]
    else:
        raise TypeError(f"unsupported spec type {type(spec).__name__}")
    values = {"optimal": np.asarray(optimal), **values}
    return Comparison(values=values, labels=labels)


def standard_policies(spec: HexMdpSpec) -> dict:
    """Approximation policy plus the three baselines, keyed by name."""
    approx, _, _ = hex_mdp.solve_approx(spec)
    out = {"approx": approx}
    for kind in BaselineKind:
        out[kind.value] = build_baseline(spec, kind)
    return out
