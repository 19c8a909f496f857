"""Constant-plus-exponential cost functions and the three-point fit.

A cost function of hop distance ``x`` has the shape::

    c(x) = 0                          if x == 0
    c(x) = const_term + lin_term * base**x   if x > 0

and is used both for the migration cost and for the transmission cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from edgemig.errors import DegenerateInput, NonMonotone

# Guard distance of the ratio root from 1, where the fit would divide by zero.
FIT_EPSILON = 1e-6


@dataclass(frozen=True)
class ConstPlusExpCost:
    const_term: float
    lin_term: float
    base: float

    def __call__(self, x):
        return eval_cost(self, x)

    def raw(self, n):
        """Exponential form without the ``x == 0`` special case."""
        return self.const_term + self.lin_term * np.power(float(self.base), n)

    def violations(self) -> list[str]:
        return validate(self)

    @property
    def is_valid(self) -> bool:
        return not validate(self)

    @classmethod
    def zero(cls) -> "ConstPlusExpCost":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def constant(cls, value: float) -> "ConstPlusExpCost":
        """Cost equal to ``value`` for every x > 0."""
        return cls(float(value), 0.0, 0.0)


def eval_cost(params: ConstPlusExpCost, x):
    """Evaluate the cost at integer distance(s) ``x``.

    Scalars give a float, arrays give an array of the same shape.
    """
    if np.ndim(x) == 0:
        if x < 0:
            raise ValueError(f"distance must be non-negative, got {x}")
        if x == 0:
            return 0.0
        return _scalar(params, int(x))
    x = np.asarray(x)
    if np.any(x < 0):
        raise ValueError("distances must be non-negative")
    # per distinct distance through the scalar formula, so array and scalar
    # results agree bit for bit (vectorised pow may round differently)
    uniq, inv = np.unique(x, return_inverse=True)
    table = np.array([_scalar(params, int(v)) for v in uniq])
    return table[inv].reshape(x.shape)


def _scalar(params: ConstPlusExpCost, x: int) -> float:
    if x == 0:
        return 0.0
    return params.const_term + params.lin_term * float(params.base) ** x


def validate(params: ConstPlusExpCost) -> list[str]:
    """Return the sign/monotonicity rules that ``params`` breaks (empty if none)."""
    c, l, b = params.const_term, params.lin_term, params.base
    problems = []
    for name, v in (("const_term", c), ("lin_term", l), ("base", b)):
        if not math.isfinite(v):
            problems.append(f"{name} is not finite ({v})")
    if problems:
        return problems
    if b < 0:
        problems.append(f"base must be >= 0 (got {b})")
    if b <= 1 and l > 0:
        problems.append(f"lin_term must be <= 0 when base <= 1 (got lin_term={l}, base={b})")
    if b >= 1 and l < 0:
        problems.append(f"lin_term must be >= 0 when base >= 1 (got lin_term={l}, base={b})")
    if c < -l:
        problems.append(f"const_term must be >= -lin_term (got const_term={c}, lin_term={l})")
    return problems


@dataclass(frozen=True)
class TabulatedCost:
    """Cost samples f(0), f(1), ..., f(2W)."""

    values: tuple[float, ...]
    width: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.width < 1:
            raise ValueError(f"width must be a positive integer, got {self.width}")
        if len(self.values) != 2 * self.width + 1:
            raise ValueError(
                f"expected {2 * self.width + 1} samples for width {self.width}, got {len(self.values)}"
            )

    @classmethod
    def from_function(cls, f, width: int) -> "TabulatedCost":
        return cls(tuple(f(n) for n in range(2 * width + 1)), width)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)


@dataclass(frozen=True)
class FitResult:
    params: ConstPlusExpCost
    sse: float
    root_used: str  # "+" or "-": sign in front of the square root
    guarded: bool  # the epsilon guard moved theta**W away from 1
    candidates: tuple  # ((sign, params, sse, guarded), ...) for both roots

    @property
    def violations(self) -> list[str]:
        return validate(self.params)


def sum_squared_error(f: TabulatedCost | Sequence[float], params: ConstPlusExpCost) -> float:
    """SSE of the exponential form against f over n = 0..len(f)-1.

    The exponential form is used at n = 0 as well (no zero special case).
    """
    values = f.as_array() if isinstance(f, TabulatedCost) else np.asarray(f, dtype=float)
    n = np.arange(len(values))
    resid = values - params.raw(n)
    return float(np.dot(resid, resid))


def _params_for_root(f0: float, fW: float, tw: float, width: int) -> tuple[ConstPlusExpCost, bool]:
    guarded = False
    if abs(tw - 1.0) < FIT_EPSILON:
        # sign follows theta**W - 1; an exact 1 goes up
        tw = 1.0 - FIT_EPSILON if tw < 1.0 else 1.0 + FIT_EPSILON
        guarded = True
    theta = tw ** (1.0 / width)
    beta_c = (f0 * tw - fW) / (tw - 1.0)
    beta_l = (fW - f0) / (tw - 1.0)
    return ConstPlusExpCost(beta_c, beta_l, theta), guarded


def fit_exponential(f: TabulatedCost) -> FitResult:
    """Fit const + lin * theta**n through f at n = 0, W, 2W.

    Both roots of the ratio equation are tried and the one with the
    smaller sum squared error over 0..2W is kept.
    """
    values = f.as_array()
    if np.any(np.diff(values) < 0):
        bad = int(np.argmax(np.diff(values) < 0))
        raise NonMonotone(f"cost samples decrease between n={bad} and n={bad + 1}")
    w = f.width
    f0, fW, f2W = values[0], values[w], values[2 * w]
    if fW == f0:
        raise DegenerateInput("f(W) == f(0): the ratio R is undefined")
    ratio = (f2W - f0) / (fW - f0)
    disc = max(ratio * ratio - 4.0 * (ratio - 1.0), 0.0)
    root = math.sqrt(disc)

    candidates = []
    for sign, tw in (("+", (ratio + root) / 2.0), ("-", (ratio - root) / 2.0)):
        params, guarded = _params_for_root(f0, fW, tw, w)
        candidates.append((sign, params, sum_squared_error(f, params), guarded))

    # ties keep the "+" root
    best = candidates[0] if candidates[0][2] <= candidates[1][2] else candidates[1]
    sign, params, sse, guarded = best
    return FitResult(params=params, sse=sse, root_used=sign, guarded=guarded, candidates=tuple(candidates))
