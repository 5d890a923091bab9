"""
env - Geschichtete deterministische MDPs, Ground Truth und Instanz-Generatoren.

Verwendung:
    from env import gen_mdp, solve_dp, rollout, EpisodeAccount

    mdp = gen_mdp(seed=0, horizon=3, level_widths=[1, 3, 3], actions_per_state=2, target_gap=0.1)
    truth = solve_dp(mdp)
    policy = {state: min(actions) for state, actions in truth.pi_star.items()}
    trajectory, total = rollout(mdp, policy, EpisodeAccount())
    assert total == truth.v_star[mdp.start]
"""

from .episode import EpisodeAccount, EpisodicEnv, TrialTimeout, rollout
from .generator import InfeasibleParametersError, gen_mdp, gen_stochastic_rewards, two_point_around
from .mdp import (
    DeterministicMdp,
    DeterministicReward,
    InvalidMdpError,
    RewardSpec,
    State,
    StateAction,
    TwoPointReward,
    check_path_sums,
    path_reward_bounds,
    reward_from_dict,
    scale_rewards,
)
from .solver import OPTIMAL_TOL, GroundTruth, policy_matches, reachable_states, solve_dp

__all__ = [
    "DeterministicMdp",
    "DeterministicReward",
    "TwoPointReward",
    "RewardSpec",
    "State",
    "StateAction",
    "InvalidMdpError",
    "InfeasibleParametersError",
    "TrialTimeout",
    "GroundTruth",
    "OPTIMAL_TOL",
    "solve_dp",
    "policy_matches",
    "reachable_states",
    "EpisodeAccount",
    "EpisodicEnv",
    "rollout",
    "gen_mdp",
    "gen_stochastic_rewards",
    "two_point_around",
    "scale_rewards",
    "path_reward_bounds",
    "check_path_sums",
    "reward_from_dict",
]
