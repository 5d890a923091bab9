"""
Recursive exploration for general function classes.

At each state the agent asks the oracle for the action on which consistent
class members disagree most. While that disagreement exceeds ``|rho/2 - delta|``
the action is explored: its reward plus the value of a recursive call from the
successor becomes a new dataset label, and the oracle is asked again. Once the
class is settled at the state, a least-squares fit picks the action and the
call returns that action's reward plus a fresh recursive value.

The stochastic variant replaces every reward by the empirical mean of ``n``
fresh samples, widens the oracle tolerance to ``2 (delta + delta_r)`` and
keeps the loop guard at ``|rho/2 - delta|``. A reward needed by the return line
that was never estimated is estimated on demand with the same ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from env import EpisodicEnv, State, StateAction
from funclass import FunctionClass
from linear_agent import RecursionDepthError
from oracle import Dataset, max_uncertainty

from .config import GeneralAgentConfig, StochasticConfig
from .fitting import least_squares_fit
from .sampling import estimate_reward


class ExplorationLimitError(RuntimeError):
    """The dataset outgrew its cap; the exploration loop is not terminating."""


@dataclass
class GeneralRunStats:
    """Counters and trace of one general-class run.

    Attributes:
        y_size: Executions of the dataset-append line
        oracle_calls: Oracle invocations
        explore_calls: Calls of Explore
        reward_samples: Reward draws taken by the run
        estimate_calls: Executions of the reward-estimation step (incl. on-demand)
        on_demand_estimates: Estimates made only for the return line
        projected_fits: Linear fits that were rescaled onto the unit ball
        learned_policy: Last action chosen at every visited state
        value_at_root: Return value of the top-level Explore call
        env_steps: Transitions taken through the environment handle
        labels: ``(key, label)`` of every dataset entry, in append order
        explore_returns: Every return value per state
        fitted_values: Fitted values of all actions at each state when its action was set
        oracle_trace: ``(state, answer)`` summaries of every oracle call
    """

    y_size: int = 0
    oracle_calls: int = 0
    explore_calls: int = 0
    reward_samples: int = 0
    estimate_calls: int = 0
    on_demand_estimates: int = 0
    projected_fits: int = 0
    learned_policy: dict[State, int] = field(default_factory=dict)
    value_at_root: float = 0.0
    env_steps: int = 0
    labels: list[tuple[StateAction, float]] = field(default_factory=list)
    explore_returns: dict[State, list[float]] = field(default_factory=dict)
    fitted_values: dict[State, list[np.ndarray]] = field(default_factory=dict)
    oracle_trace: list[tuple[State, dict]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "policy": [[*state, action] for state, action in sorted(self.learned_policy.items())],
            "y_size": self.y_size,
            "oracle_calls": self.oracle_calls,
            "explore_calls": self.explore_calls,
            "reward_samples": self.reward_samples,
            "estimate_calls": self.estimate_calls,
            "env_steps": self.env_steps,
            "value_at_root": self.value_at_root,
        }


class _GeneralExplorer:
    def __init__(
        self,
        env: EpisodicEnv,
        function_class: FunctionClass,
        rho: float,
        delta: float,
        config: GeneralAgentConfig,
        stochastic: Optional[StochasticConfig] = None,
    ):
        self.env = env
        self.function_class = function_class
        self.config = config
        self.stochastic = stochastic
        self.guard = abs(rho / 2.0 - delta)
        if stochastic is None:
            self.tolerance = 2.0 * delta
            self.n_samples = 0
        else:
            self.tolerance = 2.0 * (delta + stochastic.delta_r)
            self.n_samples = stochastic.n_samples
        self.dataset = Dataset(strict_labels=config.strict_labels and stochastic is None)
        self.cap = config.dataset_cap_factor * len(function_class.keys)
        self.stats = GeneralRunStats()
        self._estimates: dict[StateAction, float] = {}

    def _reward(self, key: StateAction) -> float:
        if self.stochastic is None:
            return self.env.reward(key[:2], key[2])
        self.stats.estimate_calls += 1
        value = estimate_reward(self.env, key, self.n_samples)
        self._estimates[key] = value
        return value

    def _return_reward(self, key: StateAction) -> float:
        if self.stochastic is None:
            return self.env.reward(key[:2], key[2])
        if key not in self._estimates:
            self.stats.on_demand_estimates += 1
            return self._reward(key)
        return self._estimates[key]

    def explore(self, state: State, depth: int = 1) -> float:
        stats = self.stats
        stats.explore_calls += 1
        if self.config.depth_guard and depth > self.env.horizon:
            raise RecursionDepthError(f"Explore reached depth {depth} > H={self.env.horizon} at {state}")
        last = self.env.is_last_level(state)

        while True:
            answer = max_uncertainty(state, self.tolerance, self.dataset, self.function_class)
            stats.oracle_calls += 1
            if self.config.trace:
                stats.oracle_trace.append((state, answer.describe()))
            if answer.uncertainty <= self.guard:
                break

            key = (*state, answer.action)
            reward = self._reward(key)
            if last:
                label = reward
            else:
                label = reward + self.explore(self.env.next_state(state, answer.action), depth + 1)
            self.dataset.append(key, label)
            stats.y_size += 1
            if self.config.trace:
                stats.labels.append((key, label))
            if stats.y_size > self.cap:
                raise ExplorationLimitError(
                    f"|Y| = {stats.y_size} exceeds the cap of {self.cap} entries "
                    f"(dataset_cap_factor {self.config.dataset_cap_factor} x |S x A|; factor 1 gives the plain |S x A| cap) "
                    f"at state {state}"
                )

        fitted = least_squares_fit(self.dataset, self.function_class)
        if fitted.projected:
            stats.projected_fits += 1
        values = fitted.values(self.function_class.state_keys(state))
        action = int(np.argmax(values))
        stats.learned_policy[state] = action
        if self.config.trace:
            stats.fitted_values.setdefault(state, []).append(np.asarray(values, dtype=float))

        reward = self._return_reward((*state, action))
        if last:
            result = reward
        else:
            result = reward + self.explore(self.env.next_state(state, action), depth + 1)
        if self.config.trace:
            stats.explore_returns.setdefault(state, []).append(result)
        return result


def _run(explorer: _GeneralExplorer) -> tuple[dict[State, int], GeneralRunStats]:
    account = explorer.env.account
    steps_before = account.env_steps
    samples_before = account.reward_samples_drawn
    explorer.stats.value_at_root = explorer.explore(explorer.env.initial_state)
    explorer.stats.env_steps = account.env_steps - steps_before
    explorer.stats.reward_samples = account.reward_samples_drawn - samples_before
    return dict(explorer.stats.learned_policy), explorer.stats


def _check_parameters(rho: float, delta: float) -> None:
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    if delta >= rho / 2.0:
        raise ValueError(f"delta = {delta} must stay below rho/2 = {rho / 2.0}; no guarantee holds there")


def learn_general(
    env: EpisodicEnv,
    function_class: FunctionClass,
    rho: float,
    delta: float,
    config: Optional[GeneralAgentConfig] = None,
) -> tuple[dict[State, int], GeneralRunStats]:
    """Learn a policy over a general class with deterministic rewards.

    Args:
        env: Environment handle over a deterministic-reward MDP
        function_class: Finite or linear class over the MDP's pairs
        rho: Optimality gap in (0, 1]
        delta: Approximation error of the class (>= 0)
        config: Agent knobs (defaults if None)

    Returns:
        (policy, stats)

    Raises:
        ExplorationLimitError: if the dataset exceeds its cap
        RecursionDepthError: if the recursion passes the horizon
    """
    _check_parameters(rho, delta)
    explorer = _GeneralExplorer(env, function_class, rho, delta, config or GeneralAgentConfig())
    return _run(explorer)


def learn_stochastic(
    env: EpisodicEnv,
    function_class: FunctionClass,
    rho: float,
    delta: float,
    cfg: StochasticConfig,
    config: Optional[GeneralAgentConfig] = None,
) -> tuple[dict[State, int], GeneralRunStats]:
    """Learn a policy from sampled rewards; ``env`` needs a seeded ``rng``.

    Every reward-estimation step draws ``cfg.n_samples`` fresh samples.
    """
    _check_parameters(rho, delta)
    if env.rng is None:
        raise ValueError("learn_stochastic needs an environment with a random generator")
    explorer = _GeneralExplorer(
        env, function_class, rho, delta, config or GeneralAgentConfig(), stochastic=cfg
    )
    return _run(explorer)
