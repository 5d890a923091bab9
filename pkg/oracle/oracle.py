"""
Maximum-uncertainty oracle.

For a state ``s``, a tolerance ``delta'`` and a dataset ``Y`` the oracle returns
the action with the largest disagreement ``|f1(s, a) - f2(s, a)|`` over member
pairs that stay consistent on the data:

    (1/|Y|) * sum_Y (f1 - f2)^2 <= delta'^2

An empty dataset leaves every pair feasible. The reported uncertainty is the
absolute disagreement (not its square), so callers compare it against
``rho/2 - delta`` directly.

Linear classes reduce to ``max c^T D`` over ``D^T M D <= delta'^2`` and
``||D|| <= 2`` where ``M`` is the empirical second-moment matrix of the data
features and ``c = phi(s, a)``. By duality its value is

    min_{w in [0, 1]} sqrt( c^T ((1-w) M/delta'^2 + w I/4)^{-1} c )

which is a convex 1-d problem in the eigenbasis of ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from env import State
from funclass import FiniteClass, FunctionClass, LinearClass

from .dataset import Dataset

# Relative eigenvalue cutoff below which a direction counts as unobserved
NULL_SPACE_TOL = 1e-12
# Absolute slack on the summed consistency constraint, per dataset entry
FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OracleAnswer:
    """Oracle response.

    Attributes:
        action: Action index with maximal disagreement (lowest index on ties)
        uncertainty: ``|f1(s, action) - f2(s, action)|`` of the witnesses
        witnesses: Member indices ``(i, j)`` (finite) or parameter vectors
            ``(theta1, theta2)`` (linear)
        per_action: Uncertainty at every action of the state
    """

    action: int
    uncertainty: float
    witnesses: tuple
    per_action: tuple[float, ...] = ()

    def describe(self) -> dict:
        witnesses = [w.tolist() if isinstance(w, np.ndarray) else int(w) for w in self.witnesses]
        return {"action": self.action, "uncertainty": self.uncertainty, "witnesses": witnesses}


def constraint_value(differences_on_data: np.ndarray) -> float:
    """``sum_Y (f1 - f2)^2`` for one member pair."""
    return float(np.sum(np.asarray(differences_on_data) ** 2))


# =============================================================================
# FINITE CLASSES
# =============================================================================


def max_uncertainty_finite(
    state: State,
    delta_prime: float,
    dataset: Dataset,
    function_class: FiniteClass,
) -> OracleAnswer:
    """Exhaustive oracle over all ordered member pairs and all actions at ``state``."""
    if delta_prime < 0:
        raise ValueError(f"delta_prime must be non-negative, got {delta_prime}")

    tables = function_class.tables
    m = function_class.size
    n_data = len(dataset)
    if n_data:
        data_values = tables[:, function_class.columns(dataset.keys)]
        sumsq = np.sum((data_values[:, None, :] - data_values[None, :, :]) ** 2, axis=2)
        feasible = (sumsq <= n_data * delta_prime**2 + FEASIBILITY_TOL * n_data).ravel()
    else:
        feasible = np.ones(m * m, dtype=bool)

    best_action, best_value, best_pair = 0, -1.0, 0
    per_action = []
    for key in function_class.state_keys(state):
        column = tables[:, function_class.pair_index[key]]
        gaps = np.abs(column[:, None] - column[None, :]).ravel()
        gaps = np.where(feasible, gaps, -1.0)
        pair = int(np.argmax(gaps))
        value = float(gaps[pair])
        per_action.append(value)
        if value > best_value:
            best_action, best_value, best_pair = key[2], value, pair

    i, j = divmod(best_pair, m)
    return OracleAnswer(
        action=best_action,
        uncertainty=best_value,
        witnesses=(i, j),
        per_action=tuple(per_action),
    )


# =============================================================================
# LINEAR CLASSES
# =============================================================================


def second_moment(features: np.ndarray) -> np.ndarray:
    """``(1/n) sum phi phi^T`` of the data features (zeros for empty data)."""
    features = np.atleast_2d(features)
    n = features.shape[0]
    if n == 0:
        return np.zeros((features.shape[1], features.shape[1]))
    return features.T @ features / n


def _linear_direction(
    eigvals: np.ndarray,
    eigvecs: np.ndarray,
    phi: np.ndarray,
    delta_prime: float,
    norm_bound: float,
) -> np.ndarray:
    """Maximising difference vector ``D = theta1 - theta2`` for one feature vector."""
    c = eigvecs.T @ phi
    radius = 2.0 * norm_bound
    if not np.any(c):
        return np.zeros_like(phi)

    scale = max(1.0, float(eigvals.max(initial=0.0)))
    null = eigvals <= NULL_SPACE_TOL * scale

    if delta_prime == 0.0 or np.all(null):
        c_null = np.where(null, c, 0.0)
        norm = float(np.linalg.norm(c_null))
        if norm == 0.0:
            return np.zeros_like(phi)
        return eigvecs @ (radius * c_null / norm)

    a = np.where(null, 0.0, eigvals) / delta_prime**2
    c2 = c**2
    inv_r2 = 1.0 / radius**2

    def dual(w: float) -> float:
        denom = (1.0 - w) * a + w * inv_r2
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(c2 > 0.0, c2 / denom, 0.0)
        return float(np.sum(terms))

    result = minimize_scalar(dual, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    candidates = [(dual(1.0), 1.0), (float(result.fun), float(result.x))]
    if not np.any(null & (c2 > 0.0)):
        candidates.append((dual(0.0), 0.0))
    value, w = min(candidates)

    denom = (1.0 - w) * a + w * inv_r2
    with np.errstate(divide="ignore", invalid="ignore"):
        coords = np.where(c2 > 0.0, c / denom, 0.0)
    direction = coords / np.sqrt(value)

    # Scale into both constraints
    norm = float(np.linalg.norm(direction))
    energy = float(np.sum(a * direction**2)) * delta_prime**2
    shrink = 1.0
    if norm > radius:
        shrink = min(shrink, radius / norm)
    if energy > delta_prime**2:
        shrink = min(shrink, delta_prime / np.sqrt(energy))
    return eigvecs @ (direction * shrink)


def max_uncertainty_linear(
    state: State,
    delta_prime: float,
    dataset: Dataset,
    function_class: LinearClass,
) -> OracleAnswer:
    """Oracle for ``F = {theta^T phi : ||theta|| <= 1}`` via the eigendecomposition of the data."""
    if delta_prime < 0:
        raise ValueError(f"delta_prime must be non-negative, got {delta_prime}")

    feature_map = function_class.feature_map
    data = feature_map.rows(dataset.keys) if len(dataset) else np.zeros((0, feature_map.d))
    moment = second_moment(data)
    eigvals, eigvecs = np.linalg.eigh(moment)
    eigvals = np.clip(eigvals, 0.0, None)

    best_action, best_value = 0, -1.0
    best_direction = np.zeros(feature_map.d)
    per_action = []
    for key in function_class.state_keys(state):
        phi = feature_map.phi(key)
        direction = _linear_direction(eigvals, eigvecs, phi, delta_prime, function_class.norm_bound)
        value = abs(float(phi @ direction))
        per_action.append(value)
        if value > best_value:
            best_action, best_value, best_direction = key[2], value, direction

    return OracleAnswer(
        action=best_action,
        uncertainty=best_value,
        witnesses=(best_direction / 2.0, -best_direction / 2.0),
        per_action=tuple(per_action),
    )


def max_uncertainty(
    state: State,
    delta_prime: float,
    dataset: Dataset,
    function_class: FunctionClass,
) -> OracleAnswer:
    """Dispatch to the finite or linear oracle."""
    if isinstance(function_class, FiniteClass):
        return max_uncertainty_finite(state, delta_prime, dataset, function_class)
    return max_uncertainty_linear(state, delta_prime, dataset, function_class)


def witness_constraint(answer: OracleAnswer, dataset: Dataset, function_class: FunctionClass) -> float:
    """Re-evaluate ``sum_Y (f1 - f2)^2`` for the answer's witnesses."""
    if not len(dataset):
        return 0.0
    first, second = answer.witnesses
    if isinstance(function_class, FiniteClass):
        diff = function_class.values(first, dataset.keys) - function_class.values(second, dataset.keys)
    else:
        diff = function_class.values(np.asarray(first) - np.asarray(second), dataset.keys)
    return constraint_value(diff)

