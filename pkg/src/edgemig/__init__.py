"""Dynamic service migration policies for mobile edge clouds."""

from edgemig.costs import ConstPlusExpCost, FitResult, TabulatedCost, eval_cost, fit_exponential
from edgemig.distance_mdp import (
    DistanceMdpSpec,
    DistancePolicy,
    closed_form_value,
    evaluate_policy_linear_system,
    modified_policy_iteration,
    policy_iteration_1d,
    value_iteration_1d,
)
from edgemig.hex_mdp import HexMdpSpec, HexPolicy, error_bound, evaluate_policy_2d, solve_approx, solve_exact
from edgemig.hexgrid import HexOffset

__version__ = "0.1.0"
