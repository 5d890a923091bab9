"""
Recursive exploration with linear function approximation.

``learn_linear`` runs the Main/Explore pair: at each state every action is
either predicted by least squares (when ``phi^T C^{-1} phi <= 1``) or explored
by recursing into its successor, and the recursion result is added to the
covariance as a new datum. The state's action is the argmax of the resulting
estimates and the call returns the reward of that action plus the value of a
fresh recursive call from its successor (just the reward at the last level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from env import EpisodicEnv, State, StateAction
from funclass import FeatureMap

from .config import LOG_BASES, LinearAgentConfig
from .covariance import CovarianceState, add_datum, predict_q, uncertainty_gate


class RecursionDepthError(RuntimeError):
    """Explore nested deeper than the horizon."""


def data_addition_bound(d: int, rho: float, log_base: str = "e") -> float:
    """``2 d log(16 / rho^2)``: the maximal number of data additions."""
    base = LOG_BASES[log_base]
    value = 16.0 / rho**2
    logarithm = math.log(value) if base is None else math.log(value, base)
    return 2.0 * d * logarithm


@dataclass
class LinearRunStats:
    """Counters and trace of one ``learn_linear`` run.

    Attributes:
        recur_line_executions: Times an action was explored through recursion
        data_additions: Times a datum was added to the covariance
        explore_calls: Calls of Explore (including memoized hits)
        learned_policy: Last action chosen at every visited state
        value_at_root: Return value of the top-level Explore call
        env_steps: Transitions taken through the environment handle
        labels: ``(key, label)`` of every datum, in addition order
        predictions: ``(key, prediction)`` of every gated prediction
        explore_returns: Every return value per state
        det_factors: Determinant growth factor of every addition
        gate_values: ``(key, phi^T C^{-1} phi)`` of every gate evaluation
        max_depth: Deepest recursion level reached
    """

    recur_line_executions: int = 0
    data_additions: int = 0
    explore_calls: int = 0
    learned_policy: dict[State, int] = field(default_factory=dict)
    value_at_root: float = 0.0
    env_steps: int = 0
    labels: list[tuple[StateAction, float]] = field(default_factory=list)
    predictions: list[tuple[StateAction, float]] = field(default_factory=list)
    explore_returns: dict[State, list[float]] = field(default_factory=dict)
    det_factors: list[float] = field(default_factory=list)
    gate_values: list[tuple[StateAction, float]] = field(default_factory=list)
    max_depth: int = 0

    def to_dict(self) -> dict:
        return {
            "policy": [[*state, action] for state, action in sorted(self.learned_policy.items())],
            "recur_line_executions": self.recur_line_executions,
            "data_additions": self.data_additions,
            "explore_calls": self.explore_calls,
            "env_steps": self.env_steps,
            "value_at_root": self.value_at_root,
        }


class _LinearExplorer:
    def __init__(self, env: EpisodicEnv, feature_map: FeatureMap, rho: float, config: LinearAgentConfig):
        self.env = env
        self.feature_map = feature_map
        self.config = config
        self.cov = CovarianceState.for_gap(
            feature_map.d,
            rho,
            factorization=config.factorization,
            refactor_every=config.refactor_every,
        )
        self.stats = LinearRunStats()
        self._memo: dict[State, float] = {}

    def explore(self, state: State, depth: int = 1) -> float:
        stats = self.stats
        stats.explore_calls += 1
        stats.max_depth = max(stats.max_depth, depth)
        if self.config.depth_guard and depth > self.env.horizon:
            raise RecursionDepthError(f"Explore reached depth {depth} > H={self.env.horizon} at {state}")
        if self.config.memoize and state in self._memo:
            return self._memo[state]

        last = self.env.is_last_level(state)
        estimates = np.empty(self.env.n_actions(state))
        for a in range(estimates.size):
            key = (*state, a)
            phi = self.feature_map.phi(key)
            value, passed = uncertainty_gate(self.cov, phi)
            if self.config.trace:
                stats.gate_values.append((key, value))
            if passed:
                estimates[a] = predict_q(self.cov, phi)
                if self.config.trace:
                    stats.predictions.append((key, float(estimates[a])))
                continue

            stats.recur_line_executions += 1
            reward = self.env.reward(state, a)
            if last:
                label = reward
            else:
                label = reward + self.explore(self.env.next_state(state, a), depth + 1)
            estimates[a] = label
            factor = add_datum(self.cov, phi, label)
            stats.data_additions += 1
            if self.config.trace:
                stats.labels.append((key, label))
                stats.det_factors.append(factor)

        action = int(np.argmax(estimates))
        stats.learned_policy[state] = action
        reward = self.env.reward(state, action)
        if last:
            result = reward
        else:
            result = reward + self.explore(self.env.next_state(state, action), depth + 1)

        if self.config.trace:
            stats.explore_returns.setdefault(state, []).append(result)
        if self.config.memoize:
            self._memo[state] = result
        return result


def learn_linear(
    env: EpisodicEnv,
    feature_map: FeatureMap,
    rho: float,
    config: Optional[LinearAgentConfig] = None,
) -> tuple[dict[State, int], LinearRunStats]:
    """Learn a policy with linear features and gap ``rho``.

    Args:
        env: Environment handle over a deterministic-reward MDP
        feature_map: Features covering every state-action pair
        rho: Optimality gap in (0, 1]
        config: Agent knobs (defaults if None)

    Returns:
        (policy, stats); the policy maps every visited state to its chosen action

    Raises:
        ValueError: for ``rho`` outside (0, 1] or stochastic rewards
        RecursionDepthError: if the recursion passes the horizon
    """
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    config = config or LinearAgentConfig()
    explorer = _LinearExplorer(env, feature_map, rho, config)
    steps_before = env.account.env_steps
    explorer.stats.value_at_root = explorer.explore(env.initial_state)
    explorer.stats.env_steps = env.account.env_steps - steps_before
    return dict(explorer.stats.learned_policy), explorer.stats
