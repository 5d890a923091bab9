"""
oracle - Maximum-uncertainty oracle over finite and linear function classes.

Usage:
    from oracle import Dataset, max_uncertainty

    dataset = Dataset()
    dataset.append((1, 0, 0), 0.4)
    answer = max_uncertainty((0, 0), delta_prime=0.1, dataset=dataset, function_class=cls)
    answer.action, answer.uncertainty
"""

from .dataset import LABEL_AGREEMENT_TOL, Dataset, DatasetConflictError
from .oracle import (
    FEASIBILITY_TOL,
    OracleAnswer,
    constraint_value,
    max_uncertainty,
    max_uncertainty_finite,
    max_uncertainty_linear,
    second_moment,
    witness_constraint,
)

__all__ = [
    "Dataset",
    "DatasetConflictError",
    "LABEL_AGREEMENT_TOL",
    "OracleAnswer",
    "FEASIBILITY_TOL",
    "max_uncertainty",
    "max_uncertainty_finite",
    "max_uncertainty_linear",
    "second_moment",
    "constraint_value",
    "witness_constraint",
]
