"""
funclass - Function classes, approximation error and Eluder dimension.

Usage:
    from env import gen_mdp, solve_dp
    from funclass import LinearClass, compute_approx_error, gen_linear_features

    mdp = gen_mdp(seed=0, horizon=2, level_widths=[1, 2], actions_per_state=2, target_gap=0.2)
    truth = solve_dp(mdp)
    feature_map, theta_star = gen_linear_features(truth, d=3, delta_target=0.05, seed=7)
    report = compute_approx_error(LinearClass(feature_map), truth, theta_hint=theta_star)
    report.delta   # <= 0.05
"""

from .approx import ApproxErrorReport, compute_approx_error, sup_error
from .classes import FeatureMap, FiniteClass, FittedFunction, FunctionClass, LinearClass
from .eluder import (
    MAX_BRUTEFORCE_DOMAIN,
    eluder_dim_bruteforce,
    eluder_dim_greedy,
    is_eps_dependent,
    linear_eluder_estimate,
)
from .generators import gen_finite_class, gen_linear_features

__all__ = [
    "FeatureMap",
    "LinearClass",
    "FiniteClass",
    "FunctionClass",
    "FittedFunction",
    "ApproxErrorReport",
    "compute_approx_error",
    "sup_error",
    "gen_linear_features",
    "gen_finite_class",
    "is_eps_dependent",
    "eluder_dim_bruteforce",
    "eluder_dim_greedy",
    "linear_eluder_estimate",
    "MAX_BRUTEFORCE_DOMAIN",
]
