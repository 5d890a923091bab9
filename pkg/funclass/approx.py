"""
Approximation error: the smallest sup-norm distance from a class to Q*.

Finite classes are scanned exhaustively. For linear classes the min-max
problem is solved by bisection on the tolerance, each step asking whether some
``||theta|| <= 1`` satisfies ``|Phi theta - q| <= delta`` componentwise. The
feasibility question is the quadratic program ``min ||theta||^2`` under those
box constraints, solved with SLSQP; the tolerance is feasible when the minimum
norm is at most one. The reported delta is the actual sup error of the best
witness found, so it is always an upper bound on the true value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize

from env import GroundTruth

from .classes import FiniteClass, FunctionClass, LinearClass

BISECTION_TOL = 1e-6
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ApproxErrorReport:
    """Result of :func:`compute_approx_error`.

    Attributes:
        delta: Sup-norm distance of the witness to Q*
        witness: Member index (finite) or theta vector (linear)
        upper_bound: True when delta is only guaranteed to bound the infimum from above
    """

    delta: float
    witness: Union[int, np.ndarray]
    upper_bound: bool

    def to_dict(self) -> dict:
        witness = int(self.witness) if isinstance(self.witness, (int, np.integer)) else self.witness
        return {"delta": self.delta, "witness": witness, "upper_bound": self.upper_bound}


def sup_error(values: np.ndarray, q: np.ndarray) -> float:
    return float(np.max(np.abs(values - q))) if q.size else 0.0


def _q_vector(function_class: FunctionClass, truth: GroundTruth) -> np.ndarray:
    missing = [key for key in function_class.keys if key not in truth.q_star]
    if missing or len(function_class.keys) != len(truth.q_star):
        raise ValueError("Function class and ground truth cover different state-action pairs")
    return np.array([truth.q_star[key] for key in function_class.keys], dtype=float)


def _min_norm_feasible(phi: np.ndarray, q: np.ndarray, delta: float, x0: np.ndarray) -> Optional[np.ndarray]:
    """Minimum-norm theta with ``|phi theta - q| <= delta``, or None if SLSQP fails."""
    constraints = [
        {"type": "ineq", "fun": lambda t: delta - (phi @ t - q), "jac": lambda t: -phi},
        {"type": "ineq", "fun": lambda t: delta + (phi @ t - q), "jac": lambda t: phi},
    ]
    result = minimize(
        lambda t: float(t @ t),
        x0,
        jac=lambda t: 2.0 * t,
        constraints=constraints,
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    if not np.all(np.isfinite(result.x)):
        return None
    return result.x


def _linear_approx_error(
    function_class: LinearClass,
    q: np.ndarray,
    tol: float,
    theta_hint: Optional[np.ndarray],
) -> ApproxErrorReport:
    phi = function_class.feature_map.features
    bound = function_class.norm_bound

    best_theta = np.zeros(function_class.d)
    hi = sup_error(phi @ best_theta, q)
    if theta_hint is not None:
        hint = np.asarray(theta_hint, dtype=float)
        hint = hint / max(1.0, float(np.linalg.norm(hint)) / bound)
        hint_err = sup_error(phi @ hint, q)
        if hint_err < hi:
            best_theta, hi = hint, hint_err

    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        theta = _min_norm_feasible(phi, q, mid, best_theta)
        feasible = (
            theta is not None
            and float(np.linalg.norm(theta)) <= bound + FEASIBILITY_SLACK
            and sup_error(phi @ theta, q) <= mid + FEASIBILITY_SLACK
        )
        if not feasible:
            lo = mid
            continue
        theta = theta / max(1.0, float(np.linalg.norm(theta)) / bound)
        err = sup_error(phi @ theta, q)
        if err < hi:
            best_theta, hi = theta, err
        else:
            # Rounding pushed the rescaled witness above the bracket
            lo = mid

    return ApproxErrorReport(delta=hi, witness=best_theta, upper_bound=True)


def compute_approx_error(
    function_class: FunctionClass,
    truth: GroundTruth,
    tol: float = BISECTION_TOL,
    theta_hint: Optional[np.ndarray] = None,
) -> ApproxErrorReport:
    """Approximation error ``inf_f sup_(s,a) |f(s,a) - Q*(s,a)|`` of a class.

    Args:
        function_class: Finite or linear class over the MDP's pairs
        truth: Ground truth of the same MDP
        tol: Bisection tolerance (linear classes only)
        theta_hint: Known good parameter vector used to seed the bracket

    Returns:
        ApproxErrorReport; exact for finite classes, an upper bound for linear ones
    """
    q = _q_vector(function_class, truth)
    if isinstance(function_class, FiniteClass):
        if q.size:
            errors = np.max(np.abs(function_class.tables - q[None, :]), axis=1)
        else:
            errors = np.zeros(function_class.size)
        best = int(np.argmin(errors))
        return ApproxErrorReport(delta=float(errors[best]), witness=best, upper_bound=False)
    return _linear_approx_error(function_class, q, tol, theta_hint)
