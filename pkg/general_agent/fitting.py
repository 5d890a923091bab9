"""
Least-squares fit over a function class.
"""

from __future__ import annotations

import numpy as np

from funclass import FiniteClass, FittedFunction, FunctionClass
from oracle import Dataset


def least_squares_fit(dataset: Dataset, function_class: FunctionClass) -> FittedFunction:
    """``argmin_f sum_Y (f(s_i, a_i) - y_i)^2``.

    Finite classes are enumerated (lowest index on ties). Linear classes use the
    minimum-norm least-squares solution, rescaled onto the unit ball if needed.
    An empty dataset selects the first member (the zero vector for linear classes).
    """
    labels = dataset.labels

    if isinstance(function_class, FiniteClass):
        if not len(dataset):
            return FittedFunction(function_class, index=0)
        predicted = function_class.tables[:, function_class.columns(dataset.keys)]
        residuals = np.sum((predicted - labels[None, :]) ** 2, axis=1)
        best = int(np.argmin(residuals))
        return FittedFunction(function_class, index=best, residual=float(residuals[best]))

    if not len(dataset):
        return FittedFunction(function_class, theta=np.zeros(function_class.d))
    design = function_class.feature_map.rows(dataset.keys)
    theta, *_ = np.linalg.lstsq(design, labels, rcond=None)
    norm = float(np.linalg.norm(theta))
    projected = norm > function_class.norm_bound
    if projected:
        theta = theta * (function_class.norm_bound / norm)
    residual = float(np.sum((design @ theta - labels) ** 2))
    return FittedFunction(function_class, theta=theta, projected=projected, residual=residual)
