"""
linear_agent - Recursive exploration with linear features and a ridge covariance.

Usage:
    from env import EpisodicEnv, gen_mdp, solve_dp
    from funclass import gen_linear_features
    from linear_agent import learn_linear

    mdp = gen_mdp(seed=1, horizon=3, level_widths=[1, 3, 3], actions_per_state=2, target_gap=0.3)
    feature_map, _ = gen_linear_features(solve_dp(mdp), d=4, delta_target=0.0, seed=1)
    policy, stats = learn_linear(EpisodicEnv(mdp), feature_map, rho=0.3)
    stats.data_additions
"""

from .agent import LinearRunStats, RecursionDepthError, data_addition_bound, learn_linear
from .config import LOG_BASES, LinearAgentConfig
from .covariance import (
    CovarianceState,
    add_datum,
    choldate,
    predict_q,
    ridge_lemma_terms,
    uncertainty_gate,
)

__all__ = [
    "learn_linear",
    "LinearRunStats",
    "RecursionDepthError",
    "LinearAgentConfig",
    "LOG_BASES",
    "CovarianceState",
    "uncertainty_gate",
    "predict_q",
    "add_datum",
    "choldate",
    "ridge_lemma_terms",
    "data_addition_bound",
]
