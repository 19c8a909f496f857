"""Distance-based MDP: closed-form policy evaluation and policy search.

States are user-service distances d in [0, N] observed at the start of a
slot. Action a(d) <= d is the distance after migration; from the
intermediate distance a the next distance is a+1 / a-1 / a with
probabilities p / q / 1-p-q (p0 / 0 / 1-p0 at a = 0).

For a fixed policy the discounted cost on each run of non-migrating
states solves a second-order linear difference equation, so

    V(d) = A_k m1**d + B_k m2**d + D + H theta**d

between consecutive migrating states. ``closed_form_value`` fits (A_k, B_k)
segment by segment in O(N); ``modified_policy_iteration`` wraps it in a
policy-improvement loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from edgemig.costs import ConstPlusExpCost, eval_cost, validate
from edgemig.errors import DegenerateSpec, InvalidAction, InvalidSpec, NonConvergence, SingularSegment

DEGENERATE_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DistanceMdpSpec:
    n_max: int
    p0: float
    p: float
    q: float
    gamma: float
    migration_cost: ConstPlusExpCost
    transmission_cost: ConstPlusExpCost

    def __post_init__(self):
        problems = []
        if int(self.n_max) != self.n_max or self.n_max < 2:
            problems.append(f"n_max must be an integer >= 2 (got {self.n_max})")
        if not 0.0 <= self.p0 <= 1.0:
            problems.append(f"p0 must lie in [0, 1] (got {self.p0})")
        if self.p < 0 or self.q < 0 or self.p + self.q > 1.0 + 1e-12:
            problems.append(f"need p >= 0, q >= 0, p + q <= 1 (got p={self.p}, q={self.q})")
        if not 0.0 < self.gamma < 1.0:
            problems.append(f"gamma must lie in (0, 1) (got {self.gamma})")
        for name in ("migration_cost", "transmission_cost"):
            problems += [f"{name}: {v}" for v in validate(getattr(self, name))]
        if problems:
            raise InvalidSpec("; ".join(problems))
        if self.p == 0:
            raise DegenerateSpec("p = 0: the distance never grows and m1, m2 are undefined")

    @classmethod
    def from_random_walk_1d(cls, r1, n_max, gamma, migration_cost, transmission_cost):
        """Spec for a 1-D walk that steps left or right with probability r1 each."""
        return cls(n_max, 2 * r1, r1, r1, gamma, migration_cost, transmission_cost)

    @property
    def n_states(self) -> int:
        return self.n_max + 1

    def transition_matrix(self) -> np.ndarray:
        """Row a: distribution of the next distance given intermediate distance a.

        Row N (never used by a valid policy) keeps the up-move mass in place.
        """
        n = self.n_max
        P = np.zeros((n + 1, n + 1))
        P[0, 0] = 1.0 - self.p0
        P[0, 1] = self.p0
        for a in range(1, n + 1):
            P[a, a - 1] = self.q
            P[a, a] = 1.0 - self.p - self.q
            if a < n:
                P[a, a + 1] = self.p
            else:
                P[a, a] += self.p
        return P

    def cost_matrix(self) -> np.ndarray:
        """C[d, a] = one-slot cost; inf where a > d or (d, a) = (N, N)."""
        n = self.n_max
        d = np.arange(n + 1)[:, None]
        a = np.arange(n + 1)[None, :]
        C = eval_cost(self.migration_cost, np.abs(d - a)) + eval_cost(self.transmission_cost, a * np.ones_like(d))
        C = np.where(a <= d, C, np.inf)
        C[n, n] = np.inf
        return C


@dataclass(frozen=True)
class DistancePolicy:
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        acts = self.actions
        n = len(acts) - 1
        if n < 1:
            raise InvalidAction("policy needs at least two states")
        if acts[0] != 0:
            raise InvalidAction(f"a(0) must be 0, got {acts[0]}")
        for d, a in enumerate(acts):
            if not 0 <= a <= d:
                raise InvalidAction(f"a({d}) = {a} is outside [0, {d}]")
        if acts[n] >= n:
            raise InvalidAction(f"a(N) must be < N = {n}, got {acts[n]}")

    @property
    def n_max(self) -> int:
        return len(self.actions) - 1

    def __getitem__(self, d):
        return self.actions[d]

    def __len__(self):
        return len(self.actions)

    def migrating_states(self) -> list[int]:
        return [d for d, a in enumerate(self.actions) if a != d]

    @classmethod
    def always_migrate(cls, n_max):
        return cls((0,) * (n_max + 1))

    @classmethod
    def never_migrate(cls, n_max, boundary_target=0):
        return cls(tuple(range(n_max)) + (boundary_target,))


def one_slot_cost(spec: DistanceMdpSpec, d: int, a: int) -> float:
    if a > d or a < 0 or d > spec.n_max:
        raise InvalidAction(f"action {a} is not allowed in state {d}")
    return eval_cost(spec.migration_cost, abs(d - a)) + eval_cost(spec.transmission_cost, a)


@dataclass(frozen=True)
class PhiConstants:
    phi0: float
    phi1: float
    phi2: float
    phi3: float
    phi4: float
    m1: float
    m2: float
    d_const: float
    h_const: float
    degenerate: bool
    theta: float

    def particular(self, d):
        """D + H theta**d (or D + H d theta**d in the degenerate branch)."""
        if self.h_const == 0.0:
            return self.d_const
        if self.degenerate:
            return self.d_const + self.h_const * d * self.theta**d
        return self.d_const + self.h_const * self.theta**d


def phi_constants(spec: DistanceMdpSpec) -> PhiConstants:
    g, p, q, p0 = spec.gamma, spec.p, spec.q, spec.p0
    if p == 0:
        raise DegenerateSpec("p = 0 makes phi2 = 0")
    tc = spec.transmission_cost
    denom = 1.0 - g * (1.0 - p - q)
    phi1 = g * q / denom
    phi2 = g * p / denom
    phi3 = tc.const_term / denom
    phi4 = tc.lin_term / denom
    phi0 = g * p0 / (1.0 - g * (1.0 - p0))
    root = math.sqrt(max(1.0 - 4.0 * phi1 * phi2, 0.0))
    m1 = (1.0 + root) / (2.0 * phi2)
    # same root as (1 - root) / (2 phi2), without the cancellation for small phi's
    m2 = 2.0 * phi1 / (1.0 + root)
    d_const = phi3 / (1.0 - phi1 - phi2)
    theta = float(tc.base)
    degenerate = False
    if phi4 == 0.0 or theta == 0.0:
        # theta**d vanishes for every d >= 1, so there is nothing to match
        h_const = 0.0
    else:
        gap = 1.0 - phi1 / theta - phi2 * theta
        if abs(gap) < DEGENERATE_TOL:
            degenerate = True
            h_const = phi4 / (phi1 / theta - phi2 * theta)
        else:
            h_const = phi4 / gap
    return PhiConstants(phi0, phi1, phi2, phi3, phi4, m1, m2, d_const, h_const, degenerate, theta)


@dataclass(frozen=True)
class ClosedFormCoeffs:
    phi: PhiConstants
    segments: tuple  # ((n_k, A_k, B_k), ...)

    @property
    def m1(self):
        return self.phi.m1

    @property
    def m2(self):
        return self.phi.m2

    @property
    def d_const(self):
        return self.phi.d_const

    @property
    def h_const(self):
        return self.phi.h_const

    @property
    def degenerate(self):
        return self.phi.degenerate


def _solve2(r1, r2):
    (a11, a12, b1), (a21, a22, b2) = r1, r2
    det = a11 * a22 - a12 * a21
    scale = math.hypot(a11, a12) * math.hypot(a21, a22)
    if scale == 0.0 or abs(det) <= 1e-13 * scale:
        raise SingularSegment(f"segment system is singular (det={det:.3e})")
    return (b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det


class _Evaluator:
    """Precomputed tables for repeated closed-form evaluations of one spec."""

    def __init__(self, spec: DistanceMdpSpec):
        self.spec = spec
        self.phi = phi_constants(spec)
        n = spec.n_max
        self.n = n
        self.cm = [float(eval_cost(spec.migration_cost, x)) for x in range(n + 1)]
        self.cd = [float(eval_cost(spec.transmission_cost, x)) for x in range(n + 1)]
        self.part = [float(self.phi.particular(d)) for d in range(n + 1)]

    def values(self, acts):
        """Closed-form V for the action list ``acts``; returns (V, segments)."""
        ph, n, part, cm, cd = self.phi, self.n, self.part, self.cm, self.cd
        m1, m2 = ph.m1, ph.m2
        g, p, q = self.spec.gamma, self.spec.p, self.spec.q
        stay = 1.0 - p - q
        migrating = [d for d in range(1, n + 1) if acts[d] != d]
        is_mig = [False] * (n + 1)
        for d in migrating:
            is_mig[d] = True

        V = [0.0] * (n + 1)
        segments = []
        lo = 0
        for k, hi in enumerate(migrating):
            # basis scaled to be <= 1 on [lo, hi]: m1**(d - hi), m2**(d - lo)
            def g1(d, hi=hi):
                return m1 ** (d - hi)

            def g2(d, lo=lo):
                return m2 ** (d - lo)

            t = acts[hi]
            if k == 0:
                # V(0) = phi0 V(1)
                phi0 = ph.phi0
                r1 = (g1(0) - phi0 * g1(1), g2(0) - phi0 * g2(1), phi0 * part[1] - part[0])
            else:
                r1 = (g1(lo), g2(lo), V[lo] - part[lo])

            if t > lo or (k == 0):
                # V(hi) = c_m(hi - t) + V(t), t inside the current segment
                r2 = (g1(hi) - g1(t), g2(hi) - g2(t), cm[hi - t] - part[hi] + part[t])
            elif not is_mig[t]:
                # t already evaluated and does not migrate itself
                r2 = (g1(hi), g2(hi), cm[hi - t] + V[t] - part[hi])
            else:
                # t migrates onward: expand its post-decision value directly
                c1, c2 = g1(hi), g2(hi)
                rhs = cm[hi - t] + cd[t] - part[hi]
                for j, pj in ((t - 1, q), (t, stay), (t + 1, p)):
                    if pj == 0.0:
                        continue
                    if j <= lo:
                        rhs += g * pj * V[j]
                    else:
                        c1 -= g * pj * g1(j)
                        c2 -= g * pj * g2(j)
                        rhs += g * pj * part[j]
                r2 = (c1, c2, rhs)

            a, b = _solve2(r1, r2)
            start = 0 if k == 0 else lo + 1
            for d in range(start, hi + 1):
                V[d] = a * g1(d) + b * g2(d) + part[d]
            segments.append((hi, a, b, lo))
            lo = hi
        return V, segments

    def improve(self, V):
        """Greedy actions for V, smallest action on ties."""
        n, cm, cd = self.n, self.cm, self.cd
        g, p, q, p0 = self.spec.gamma, self.spec.p, self.spec.q, self.spec.p0
        stay = 1.0 - p - q
        after = [g * (p0 * V[1] + (1.0 - p0) * V[0])]
        for a in range(1, n):
            after.append(cd[a] + g * (p * V[a + 1] + q * V[a - 1] + stay * V[a]))
        acts = [0] * (n + 1)
        for d in range(1, n + 1):
            top = d if d < n else n - 1
            qs = [cm[d - a] + after[a] for a in range(top + 1)]
            best = min(qs)
            tol = TIE_TOL * max(1.0, abs(best))
            acts[d] = next(a for a, v in enumerate(qs) if v <= best + tol)
        return acts


def _segment_coeffs(phi, segments):
    out = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for hi, a, b, lo in segments:
            A = a / phi.m1**hi
            B = b / phi.m2**lo if phi.m2 != 0.0 else (b if lo == 0 else float("nan"))
            out.append((hi, float(A), float(B)))
    return tuple(out)


def closed_form_value(spec: DistanceMdpSpec, policy: DistancePolicy):
    """Discounted cost of ``policy`` via the segment-wise closed form.

    Returns ``(values, coeffs)`` with ``values`` an array over d = 0..N.
    """
    if policy.n_max != spec.n_max:
        raise InvalidAction(f"policy covers N={policy.n_max}, spec has N={spec.n_max}")
    ev = _Evaluator(spec)
    V, segments = ev.values(policy.actions)
    return np.array(V), ClosedFormCoeffs(ev.phi, _segment_coeffs(ev.phi, segments))


def evaluate_policy_linear_system(spec: DistanceMdpSpec, policy: DistancePolicy) -> np.ndarray:
    """Solve (I - gamma P_pi) V = c_pi directly."""
    n = spec.n_max
    P = spec.transition_matrix()
    acts = np.asarray(policy.actions)
    states = np.arange(n + 1)
    c = eval_cost(spec.migration_cost, states - acts) + eval_cost(spec.transmission_cost, acts)
    A = np.eye(n + 1) - spec.gamma * P[acts]
    return np.linalg.solve(A, c)


def greedy_policy(spec: DistanceMdpSpec, V) -> DistancePolicy:
    return DistancePolicy(_Evaluator(spec).improve(list(V)))


def modified_policy_iteration(spec: DistanceMdpSpec, max_iter=None, record=None):
    """Policy iteration with closed-form evaluation.

    Starts from a(d) = 0 everywhere. Returns ``(policy, values, iterations)``.
    If ``record`` is a list, the value table of every iteration is appended.
    """
    cap = max_iter if max_iter is not None else 10 * (spec.n_max + 1)
    ev = _Evaluator(spec)
    acts = [0] * (spec.n_max + 1)
    for it in range(1, cap + 1):
        V, _ = ev.values(acts)
        if record is not None:
            record.append(np.array(V))
        new = ev.improve(V)
        if new == acts:
            return DistancePolicy(acts), np.array(V), it
        acts = new
    raise NonConvergence(f"policy iteration did not settle within {cap} iterations")


def policy_iteration_1d(spec: DistanceMdpSpec, max_iter=None):
    """Textbook policy iteration: dense Q matrix, linear-solve evaluation."""
    cap = max_iter if max_iter is not None else 10 * (spec.n_max + 1)
    C = spec.cost_matrix()
    P = spec.transition_matrix()
    policy = DistancePolicy.always_migrate(spec.n_max)
    for it in range(1, cap + 1):
        V = evaluate_policy_linear_system(spec, policy)
        Q = C + spec.gamma * (P @ V)[None, :]
        new = DistancePolicy(_argmin_rows(Q))
        if new == policy:
            return policy, V, it
        policy = new
    raise NonConvergence(f"policy iteration did not settle within {cap} iterations")


def _argmin_rows(Q):
    best = Q.min(axis=1, keepdims=True)
    tol = TIE_TOL * np.maximum(1.0, np.abs(best))
    return np.argmax(Q <= best + tol, axis=1)


def value_iteration_1d(spec: DistanceMdpSpec, tolerance=1e-9, max_iter=1_000_000):
    """Bellman fixed-point iteration; sup-norm optimality gap below ``tolerance``.

    Returns ``(policy, values, iterations)``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    C = spec.cost_matrix()
    P = spec.transition_matrix()
    g = spec.gamma
    stop = tolerance * (1.0 - g) / g
    V = np.zeros(spec.n_states)
    for it in range(1, max_iter + 1):
        Q = C + g * (P @ V)[None, :]
        V_new = Q.min(axis=1)
        done = np.max(np.abs(V_new - V)) < stop
        V = V_new
        if done:
            Q = C + g * (P @ V)[None, :]
            return DistancePolicy(_argmin_rows(Q)), V, it
    raise NonConvergence(f"value iteration did not converge within {max_iter} sweeps")


def to_csv_rows(policy: DistancePolicy, values):
    return [{"d": d, "action": a, "value": float(v)} for d, (a, v) in enumerate(zip(policy.actions, values))]
