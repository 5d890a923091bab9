"""
Reward-sampling schedule and empirical reward estimates.
"""

from __future__ import annotations

import math

import numpy as np

from env import EpisodicEnv, StateAction


def sample_count(horizon: int, delta_r: float, p: float, dim_e_value: int) -> int:
    """Samples per estimate: ``ceil(H^2 / (2 delta_r^2) * ln(18 dim_E H / p))``, at least 1."""
    if horizon < 1 or dim_e_value < 1:
        raise ValueError(f"horizon and dim_e_value must be positive, got {horizon}, {dim_e_value}")
    if delta_r <= 0:
        raise ValueError(f"delta_r must be positive, got {delta_r}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    prefactor = horizon**2 / (2.0 * delta_r**2)
    return max(1, math.ceil(prefactor * math.log(18.0 * dim_e_value * horizon / p)))


def hoeffding_count(horizon: int, delta_r: float, p_prime: float) -> int:
    """Samples for ``|mean - r| <= delta_r / H`` with probability ``1 - p'``."""
    if not (0.0 < p_prime < 1.0) or delta_r <= 0 or horizon < 1:
        raise ValueError("Need horizon >= 1, delta_r > 0 and p' in (0, 1)")
    return max(1, math.ceil(horizon**2 / (2.0 * delta_r**2) * math.log(1.0 / p_prime)))


def estimate_reward(env: EpisodicEnv, key: StateAction, n: int) -> float:
    """Empirical mean of ``n`` fresh reward draws at ``key``.

    Raises:
        ValueError: if ``n < 1`` or a draw falls outside [0, 1]
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    samples = env.sample_rewards(key, n)
    if samples.min() < 0.0 or samples.max() > 1.0:
        raise ValueError(f"Reward sample outside [0, 1] at {key}")
    if samples.min() == samples.max():
        return float(samples[0])
    return float(np.mean(samples))
