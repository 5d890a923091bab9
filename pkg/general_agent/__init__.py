"""
general_agent - Recursive exploration over general function classes.

Usage:
    from env import EpisodicEnv, gen_mdp, solve_dp
    from funclass import gen_finite_class
    from general_agent import learn_general

    mdp = gen_mdp(seed=3, horizon=2, level_widths=[1, 2], actions_per_state=2, target_gap=0.4)
    function_class = gen_finite_class(solve_dp(mdp), class_size=1, delta_target=0.0, seed=3)
    policy, stats = learn_general(EpisodicEnv(mdp), function_class, rho=0.4, delta=0.0)
    stats.y_size
"""

from .agent import ExplorationLimitError, GeneralRunStats, learn_general, learn_stochastic
from .config import GeneralAgentConfig, StochasticConfig
from .fitting import least_squares_fit
from .sampling import estimate_reward, hoeffding_count, sample_count

__all__ = [
    "learn_general",
    "learn_stochastic",
    "GeneralRunStats",
    "ExplorationLimitError",
    "GeneralAgentConfig",
    "StochasticConfig",
    "least_squares_fit",
    "sample_count",
    "hoeffding_count",
    "estimate_reward",
]
