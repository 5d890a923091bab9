"""
Premises and counter bounds checked by the sweeps.

Every premise is linear in ``delta`` for fixed ``rho`` and dimension, so the
largest admissible ``delta`` has a closed form; sweeps place their realized
error at a fraction of it.
"""

from __future__ import annotations

import math

from linear_agent import data_addition_bound

SQRT2 = math.sqrt(2.0)


# ============================================================================
# LINEAR CLASS
# ============================================================================


def linear_premise_factor(d: int, rho: float, log_base: str = "e") -> float:
    """``4 (sqrt(2 d log(16/rho^2)) + 1)``, so that the premise reads ``rho >= factor * delta``."""
    return 4.0 * (math.sqrt(data_addition_bound(d, rho, log_base)) + 1.0)


def linear_premise(rho: float, delta: float, d: int, log_base: str = "e") -> bool:
    return rho >= linear_premise_factor(d, rho, log_base) * delta


def linear_max_delta(rho: float, d: int, log_base: str = "e") -> float:
    return rho / linear_premise_factor(d, rho, log_base)


# ============================================================================
# GENERAL CLASS
# ============================================================================


def general_premise(rho: float, delta: float, dim_e: int) -> bool:
    """``rho >= 6 sqrt(2) delta sqrt(dim_E)``."""
    return rho >= 6.0 * SQRT2 * delta * math.sqrt(dim_e)


def general_max_delta(rho: float, dim_e: int) -> float:
    if dim_e <= 0:
        return rho / 2.0
    return rho / (6.0 * SQRT2 * math.sqrt(dim_e))


def dataset_premise(rho: float, delta: float, dim_e: int, c: float = 18.0) -> bool:
    """``rho >= 4 delta sqrt((c dim_E - 1) / (c - 1)) + 2 delta`` (dataset size at most ``c dim_E``)."""
    if dim_e <= 0:
        return rho >= 2.0 * delta
    return rho >= 4.0 * delta * math.sqrt((c * dim_e - 1.0) / (c - 1.0)) + 2.0 * delta


def dataset_max_delta(rho: float, dim_e: int, c: float = 18.0) -> float:
    if dim_e <= 0:
        return rho / 2.0
    return rho / (4.0 * math.sqrt((c * dim_e - 1.0) / (c - 1.0)) + 2.0)


def dataset_bound(dim_e: int, c: float = 18.0) -> float:
    return c * dim_e


# ============================================================================
# STOCHASTIC REWARDS
# ============================================================================


def stochastic_premise(rho: float, delta: float, delta_r: float, dim_e: int) -> bool:
    """``rho >= 6 sqrt(2) (delta + delta_r) sqrt(dim_E) + 2 delta_r``."""
    return rho >= 6.0 * SQRT2 * (delta + delta_r) * math.sqrt(dim_e) + 2.0 * delta_r


def stochastic_max_delta(rho: float, delta_r: float, dim_e: int) -> float:
    """Largest ``delta`` for the stochastic premise; negative when ``delta_r`` alone violates it."""
    if dim_e <= 0:
        return rho / 2.0
    return (rho - 2.0 * delta_r) / (6.0 * SQRT2 * math.sqrt(dim_e)) - delta_r


def default_delta_r(rho: float, dim_e: int) -> float:
    """``rho / (24 sqrt(2) dim_E)``; with ``rho >= 12 sqrt(2) delta sqrt(dim_E)`` the stochastic premise holds."""
    return rho / (24.0 * SQRT2 * max(dim_e, 1))


def estimate_bound(dim_e: int, horizon: int) -> int:
    """Reward estimations covered by the union bound: ``18 dim_E H``."""
    return 18 * max(dim_e, 1) * horizon
