"""
Ridge-initialised covariance with a maintained Cholesky factor.

``C = ridge * I + sum phi phi^T`` and ``y = sum phi * label``. All products
with ``C^{-1}`` go through triangular solves on the lower factor ``L``
(``C = L L^T``); ``C^{-1}`` is never formed. Additions update ``L`` with the
rank-one Cholesky update and refactorize from ``C`` every ``refactor_every``
additions, or refactorize after every addition in ``dense`` mode.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular


def choldate(L: np.ndarray, x: np.ndarray) -> None:
    """In-place update of the lower factor ``L`` to the factor of ``L L^T + x x^T``."""
    x = np.array(x, dtype=float)
    n = L.shape[0]
    for k in range(n):
        r = math.sqrt(L[k, k] * L[k, k] + x[k] * x[k])
        c = r / L[k, k]
        s = x[k] / L[k, k]
        L[k, k] = r
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] + s * x[k + 1:]) / c
            x[k + 1:] = c * x[k + 1:] - s * L[k + 1:, k]


class CovarianceState:
    """Covariance ``C``, response vector ``y`` and the Cholesky factor of ``C``.

    Attributes:
        d: Feature dimension
        ridge: Initial diagonal ``rho^2 / 16``
        C: Current covariance matrix
        y_vec: Current response vector
        n_added: Number of data additions
        log_det: ``ln det C``, tracked through the determinant-lemma factors
    """

    def __init__(self, d: int, ridge: float, factorization: str = "rank_one", refactor_every: int = 64):
        if d < 1:
            raise ValueError(f"Dimension must be positive, got {d}")
        if ridge <= 0:
            raise ValueError(f"Ridge must be positive, got {ridge}")
        self.d = d
        self.ridge = ridge
        self.factorization = factorization
        self.refactor_every = refactor_every
        self.C = ridge * np.eye(d)
        self.y_vec = np.zeros(d)
        self.L = math.sqrt(ridge) * np.eye(d)
        self.n_added = 0
        self.log_det = d * math.log(ridge)

    @classmethod
    def for_gap(cls, d: int, rho: float, **kwargs) -> "CovarianceState":
        """Initial state ``C = (rho^2 / 16) I``."""
        return cls(d, rho**2 / 16.0, **kwargs)

    def _check(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.d,):
            raise ValueError(f"Feature vector has shape {phi.shape}, expected ({self.d},)")
        return phi

    def _whiten(self, v: np.ndarray) -> np.ndarray:
        return solve_triangular(self.L, v, lower=True)

    def gate_value(self, phi: np.ndarray) -> float:
        z = self._whiten(self._check(phi))
        return float(z @ z)

    def predict(self, phi: np.ndarray) -> float:
        phi = self._check(phi)
        return float(self._whiten(phi) @ self._whiten(self.y_vec))

    def add(self, phi: np.ndarray, label: float) -> float:
        """Add one datum; returns the determinant growth factor ``1 + phi^T C^{-1} phi``."""
        phi = self._check(phi)
        factor = 1.0 + self.gate_value(phi)
        self.C = self.C + np.outer(phi, phi)
        self.y_vec = self.y_vec + phi * label
        self.n_added += 1
        if self.factorization == "dense" or self.n_added % self.refactor_every == 0:
            self.L = cholesky(self.C, lower=True)
        else:
            choldate(self.L, phi)
        self.log_det += math.log(factor)
        return factor

    def solve(self, v: np.ndarray) -> np.ndarray:
        """``C^{-1} v`` from a fresh dense factorization (reference path)."""
        return cho_solve(cho_factor(self.C, lower=True), np.asarray(v, dtype=float))


# -----------------------------------------------------------------------------
# Operations
# -----------------------------------------------------------------------------


def uncertainty_gate(state: CovarianceState, phi: np.ndarray) -> tuple[float, bool]:
    """``(phi^T C^{-1} phi, value <= 1)``."""
    value = state.gate_value(phi)
    return value, value <= 1.0


def predict_q(state: CovarianceState, phi: np.ndarray) -> float:
    """Least-squares prediction ``phi^T C^{-1} y``."""
    return state.predict(phi)


def add_datum(state: CovarianceState, phi: np.ndarray, q_value: float) -> float:
    """Rank-one update of ``C`` and ``y`` in place; returns the determinant factor."""
    return state.add(phi, q_value)


def ridge_lemma_terms(M: np.ndarray, alpha: float, x: np.ndarray) -> tuple[float, float]:
    """Bias and variance terms of ridge regression at ``x``.

    Returns:
        ``(||(M (M + alpha I)^{-1} - I) x||^2, x^T (M + alpha I)^{-1} M (M + alpha I)^{-1} x)``;
        both are bounded by ``alpha`` and ``1`` whenever ``x^T (M + alpha I)^{-1} x <= 1``.
    """
    M = np.asarray(M, dtype=float)
    x = np.asarray(x, dtype=float)
    A = M + alpha * np.eye(M.shape[0])
    z = cho_solve(cho_factor(A, lower=True), x)
    bias = M @ z - x
    return float(bias @ bias), float(z @ M @ z)
