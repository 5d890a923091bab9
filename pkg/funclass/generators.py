"""
Synthetic function classes with a planted near-realizing member.
"""

from __future__ import annotations

import numpy as np

from env import GroundTruth, InfeasibleParametersError

from .classes import FeatureMap, FiniteClass


def gen_linear_features(
    truth: GroundTruth,
    d: int,
    delta_target: float,
    seed: int,
) -> tuple[FeatureMap, np.ndarray]:
    """Feature map whose class contains ``theta_star`` within ``delta_target`` of Q*.

    ``theta_star = sigma * e_1`` with ``sigma = max|Q*| + delta_target``. The first
    feature coordinate carries ``(Q*(s,a) + b(s,a)) / sigma`` with
    ``|b| <= delta_target``; the remaining coordinates are a random direction
    scaled into the norm budget left over by the first one.

    Raises:
        InfeasibleParametersError: if ``d < 2``, ``delta_target < 0`` or ``sigma > 1``
    """
    if d < 2:
        raise InfeasibleParametersError(f"Feature dimension must be at least 2, got {d}")
    if delta_target < 0:
        raise InfeasibleParametersError(f"delta_target must be non-negative, got {delta_target}")

    keys = truth.pairs
    q = truth.q_array
    sigma = (float(np.max(np.abs(q))) if q.size else 0.0) + delta_target
    if sigma > 1.0:
        raise InfeasibleParametersError(
            f"max|Q*| + delta_target = {sigma:.6g} exceeds the unit parameter ball"
        )
    if sigma == 0.0:
        sigma = 1.0

    rng = np.random.default_rng(seed)
    bias = rng.uniform(-delta_target, delta_target, size=len(keys))
    first = (q + bias) / sigma
    first = np.clip(first, -1.0, 1.0)

    tail = rng.normal(size=(len(keys), d - 1))
    tail_norm = np.linalg.norm(tail, axis=1, keepdims=True)
    tail_norm[tail_norm == 0.0] = 1.0
    budget = np.sqrt(np.clip(1.0 - first**2, 0.0, None))[:, None]
    scale = rng.uniform(0.5, 1.0, size=(len(keys), 1))
    tail = tail / tail_norm * budget * scale

    features = np.hstack([first[:, None], tail])
    theta_star = np.zeros(d)
    theta_star[0] = sigma
    return FeatureMap(d=d, keys=keys, features=features), theta_star


def gen_finite_class(
    truth: GroundTruth,
    class_size: int,
    delta_target: float,
    seed: int,
    spread: float = 0.5,
) -> FiniteClass:
    """Finite class of ``class_size`` tables with one planted near-Q* member.

    The planted table is ``Q* + U[-delta_target, delta_target]`` at a random
    position; all other tables are ``Q* + U[-spread, spread]``.
    """
    if class_size < 1:
        raise ValueError(f"class_size must be at least 1, got {class_size}")
    if delta_target < 0 or spread < 0:
        raise ValueError("delta_target and spread must be non-negative")

    rng = np.random.default_rng(seed)
    q = truth.q_array
    planted_at = int(rng.integers(0, class_size))
    tables = np.empty((class_size, q.size))
    for i in range(class_size):
        width = delta_target if i == planted_at else spread
        tables[i] = q + rng.uniform(-width, width, size=q.size)
    return FiniteClass(keys=truth.pairs, tables=tables)
