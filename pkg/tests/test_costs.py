import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from edgemig.costs import (
    FIT_EPSILON,
    ConstPlusExpCost,
    TabulatedCost,
    eval_cost,
    fit_exponential,
    sum_squared_error,
    validate,
)
from edgemig.errors import DegenerateInput, NonMonotone


def test_eval_examples():
    cd = ConstPlusExpCost(1.0, -1.0, 0.8)
    assert eval_cost(cd, 0) == 0.0
    assert eval_cost(cd, 1) == pytest.approx(0.2, abs=1e-15)
    assert eval_cost(ConstPlusExpCost(1.5, -0.5, 0.8), 2) == pytest.approx(1.18, abs=1e-15)


def test_eval_matches_table_oracle():
    cm = ConstPlusExpCost(1.5, -0.5, 0.8)
    table = [0.0] + [1.5 - 0.5 * 0.8**x for x in range(1, 12)]
    np.testing.assert_allclose(eval_cost(cm, np.arange(12)), table, rtol=0, atol=1e-15)
    assert [cm(x) for x in range(12)] == pytest.approx(table, abs=1e-15)


def test_eval_rejects_negative_distance():
    with pytest.raises(ValueError):
        eval_cost(ConstPlusExpCost(1, -1, 0.5), -1)
    with pytest.raises(ValueError):
        eval_cost(ConstPlusExpCost(1, -1, 0.5), np.array([1, -2]))


def test_validate_examples():
    assert validate(ConstPlusExpCost(1, -1, 0.8)) == []
    assert any("lin_term" in v for v in validate(ConstPlusExpCost(1, 1, 0.8)))
    assert any("const_term" in v for v in validate(ConstPlusExpCost(0.4, -0.5, 0.8)))
    assert validate(ConstPlusExpCost(1, -1, -0.1))
    assert validate(ConstPlusExpCost(float("nan"), 0, 0.5))
    assert validate(ConstPlusExpCost(0.0, -1.0, 1.5))  # base > 1 needs lin >= 0


def test_constant_and_zero_helpers():
    c = ConstPlusExpCost.constant(2.5)
    assert c.is_valid
    assert eval_cost(c, 0) == 0.0
    assert all(eval_cost(c, x) == 2.5 for x in range(1, 6))
    assert eval_cost(ConstPlusExpCost.zero(), np.arange(5)).tolist() == [0.0] * 5


@st.composite
def valid_costs(draw):
    base = draw(st.floats(0.0, 3.0))
    if base < 1:
        lin = -draw(st.floats(0.0, 5.0))
    elif base > 1:
        lin = draw(st.floats(0.0, 5.0))
    else:
        lin = 0.0
    const = -lin + draw(st.floats(0.0, 5.0))
    return ConstPlusExpCost(const, lin, base)


@settings(max_examples=200, deadline=None)
@given(valid_costs())
def test_valid_costs_are_nonnegative_and_nondecreasing(c):
    assert validate(c) == []
    vals = eval_cost(c, np.arange(30))
    assert vals[0] == 0.0
    assert np.all(vals >= -1e-12 * (1 + abs(c.const_term)))
    assert np.all(np.diff(vals) >= -1e-9 * (1 + np.abs(vals[1:])))


def test_tabulated_length_check():
    with pytest.raises(ValueError):
        TabulatedCost((0, 1, 2, 3), 1)
    with pytest.raises(ValueError):
        TabulatedCost((0,), 0)
    t = TabulatedCost.from_function(lambda n: n * n, 2)
    assert t.values == (0, 1, 4, 9, 16)


def test_fit_square_w1_hand_solution():
    # R = 4, roots {3, 1}; 1 is pushed to 1 + eps and loses on SSE
    res = fit_exponential(TabulatedCost((0, 1, 4), 1))
    assert res.params.base == pytest.approx(3.0, abs=1e-12)
    assert res.params.const_term == pytest.approx(-0.5, abs=1e-12)
    assert res.params.lin_term == pytest.approx(0.5, abs=1e-12)
    assert res.sse == pytest.approx(0.0, abs=1e-20)
    assert res.root_used == "+"
    assert not res.guarded
    # beta_c < 0 but beta_c >= -beta_l: the fit is still a usable cost
    assert res.violations == []


def test_fit_square_w2_has_positive_sse():
    f = TabulatedCost.from_function(lambda n: n * n, 2)
    res = fit_exponential(f)
    assert res.sse > 1e-3
    # residuals at the interpolation points vanish, the others do not
    for n in (0, 2, 4):
        assert res.params.raw(n) == pytest.approx(f.values[n], abs=1e-9)
    assert abs(res.params.raw(1) - 1) > 1e-3 or abs(res.params.raw(3) - 9) > 1e-3


def test_fit_constant_is_degenerate():
    with pytest.raises(DegenerateInput):
        fit_exponential(TabulatedCost((3, 3, 3, 3, 3), 2))


def test_fit_decreasing_is_rejected():
    with pytest.raises(NonMonotone):
        fit_exponential(TabulatedCost((0, 2, 1), 1))


def test_fit_linear_triggers_guard_on_both_roots():
    # R = 2: both roots equal 1, so both get the epsilon guard
    res = fit_exponential(TabulatedCost((0, 1, 2), 1))
    assert res.guarded
    assert all(c[3] for c in res.candidates)
    assert abs(res.params.base - 1) == pytest.approx(FIT_EPSILON, rel=1e-6)


def _independent_candidates(values, W):
    """Solve the 3-point system for each root of t^2 - R t + (R - 1) = 0 via numpy."""
    f = np.asarray(values, dtype=float)
    R = (f[2 * W] - f[0]) / (f[W] - f[0])
    out = []
    for t in np.roots([1.0, -R, R - 1.0]).real:
        if abs(t - 1) < FIT_EPSILON:
            continue
        theta = t ** (1.0 / W)
        A = np.array([[1.0, 1.0], [1.0, theta**W]])
        bc, bl = np.linalg.solve(A, [f[0], f[W]])
        n = np.arange(len(f))
        sse = float(np.sum((f - (bc + bl * theta**n)) ** 2))
        out.append((theta, bc, bl, sse))
    return out


@pytest.mark.parametrize("W", [1, 2, 5])
@pytest.mark.parametrize(
    "f", [lambda n: n * n, lambda n: math.log(n + 1) + 10, lambda n: math.sqrt(n + 1) + 5], ids=["sq", "log", "sqrt"]
)
def test_fit_interpolates_and_picks_smaller_sse(f, W):
    tab = TabulatedCost.from_function(f, W)
    res = fit_exponential(tab)
    for n in (0, W, 2 * W):
        assert abs(res.params.raw(n) - f(n)) <= 1e-9 * (1 + abs(f(n)))
    sses = [c[2] for c in res.candidates]
    assert res.sse == min(sses)
    # independent recomputation of both SSEs
    assert sum_squared_error(tab, res.params) == pytest.approx(res.sse, rel=1e-9, abs=1e-18)
    indep = _independent_candidates(tab.values, W)
    assert res.sse <= min(c[3] for c in indep) * (1 + 1e-7) + 1e-15


@settings(max_examples=150, deadline=None)
@given(
    st.integers(1, 6),
    st.lists(st.floats(0.01, 10.0), min_size=13, max_size=13),
    st.floats(-5, 5),
)
def test_fit_interpolation_property(W, steps, f0):
    vals = f0 + np.concatenate([[0.0], np.cumsum(steps[: 2 * W])])
    tab = TabulatedCost(tuple(vals), W)
    res = fit_exponential(tab)
    assume(not res.guarded)
    for n in (0, W, 2 * W):
        assert abs(res.params.raw(n) - vals[n]) <= 1e-9 * (1 + abs(vals[n])) * max(1.0, res.params.base ** (2 * W))
    other = [c for c in res.candidates if c[0] != res.root_used][0]
    assert res.sse <= other[2]


def test_sse_exact_match_is_zero():
    c = ConstPlusExpCost(2.0, -1.0, 0.5)
    vals = [c.raw(n) for n in range(7)]
    assert sum_squared_error(vals, c) == 0.0
