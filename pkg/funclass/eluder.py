"""
epsilon-dependence and Eluder dimension for finite classes.

A pair ``x`` is eps-independent of a predecessor set ``S`` when some pair of
class functions agrees on ``S`` in the sense ``sum_S (f1 - f2)^2 <= eps^2``
and still differs at ``x`` by more than ``eps``. The predicate only sees ``S``
as a set, so the longest independent sequence is found by dynamic programming
over subsets of the domain instead of enumerating orderings.

The Eluder dimension allows any ``eps' >= eps`` for the whole sequence. For a
fixed sequence the admissible ``eps'`` form a union of half-open intervals
whose right ends are pairwise differences ``|f1(x) - f2(x)|``, so it is enough
to try the largest float strictly below each such difference (and ``eps``).
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Sequence

import numpy as np

from env import StateAction

from .classes import FiniteClass

MAX_BRUTEFORCE_DOMAIN = 12


def _difference_rows(function_class: FiniteClass, domain: Sequence[StateAction]) -> np.ndarray:
    """Differences ``f_i - f_j`` for all unordered member pairs ``i < j`` on ``domain``."""
    values = function_class.tables[:, function_class.columns(domain)]
    m = function_class.size
    if m < 2:
        return np.zeros((0, len(domain)))
    left, right = zip(*combinations(range(m), 2))
    return values[list(left)] - values[list(right)]


def _thresholds(diffs: np.ndarray, eps: float) -> list[float]:
    magnitudes = np.unique(np.abs(diffs))
    candidates = {float(eps)}
    for r in magnitudes[magnitudes > eps]:
        below = float(np.nextafter(r, 0.0))
        if below >= eps:
            candidates.add(below)
    return sorted(candidates)


def is_eps_dependent(
    pair: StateAction,
    predecessors: Sequence[StateAction],
    function_class: FiniteClass,
    eps: float,
) -> bool:
    """True iff small disagreement on ``predecessors`` forces small disagreement at ``pair``."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    diffs = _difference_rows(function_class, [pair, *predecessors])
    if diffs.shape[0] == 0:
        return True
    agree = np.sum(diffs[:, 1:] ** 2, axis=1) <= eps**2
    return not bool(np.any(agree & (np.abs(diffs[:, 0]) > eps)))


def _independence_table(sumsq: np.ndarray, magnitudes: np.ndarray, eps: float) -> np.ndarray:
    """``table[S, x]``: x is eps-independent of the subset with bitmask S."""
    feasible = (sumsq <= eps**2).astype(np.int64)
    separating = (magnitudes > eps).astype(np.int64)
    return (feasible @ separating) > 0


def eluder_dim_bruteforce(
    function_class: FiniteClass,
    domain: Sequence[StateAction],
    eps: float,
) -> int:
    """Exact Eluder dimension of a finite class on a small domain.

    Raises:
        ValueError: if ``eps <= 0`` or the domain exceeds 12 pairs
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = len(domain)
    if n > MAX_BRUTEFORCE_DOMAIN:
        raise ValueError(f"Brute force is limited to {MAX_BRUTEFORCE_DOMAIN} pairs, got {n}")

    diffs = _difference_rows(function_class, domain)
    if n == 0 or diffs.shape[0] == 0:
        return 0

    subsets = np.arange(1 << n)
    membership = ((subsets[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    sumsq = membership @ (diffs**2).T
    magnitudes = np.abs(diffs)
    popcount = membership.sum(axis=1).astype(int)

    best = 0
    for threshold in _thresholds(diffs, eps):
        independent = _independence_table(sumsq, magnitudes, threshold)
        good = np.zeros(1 << n, dtype=bool)
        good[0] = True
        for size in range(n):
            layer = good & (popcount == size)
            if not layer.any():
                break
            for x in range(n):
                grow = layer & independent[:, x] & (membership[:, x] == 0)
                good[subsets[grow] | (1 << x)] = True
        best = max(best, int(popcount[good].max()))
        if best == n:
            break
    return best


def eluder_dim_greedy(
    function_class: FiniteClass,
    domain: Sequence[StateAction],
    eps: float,
) -> int:
    """Length of greedily extended independent sequences (lowest index first), best over thresholds."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    diffs = _difference_rows(function_class, domain)
    if len(domain) == 0 or diffs.shape[0] == 0:
        return 0

    magnitudes = np.abs(diffs)
    squares = diffs**2
    best = 0
    for threshold in _thresholds(diffs, eps):
        chosen = np.zeros(len(domain), dtype=bool)
        sumsq = np.zeros(diffs.shape[0])
        while True:
            feasible = sumsq <= threshold**2
            candidates = np.flatnonzero(~chosen & np.any(feasible[:, None] & (magnitudes > threshold), axis=0))
            if candidates.size == 0:
                break
            x = int(candidates[0])
            chosen[x] = True
            sumsq = sumsq + squares[:, x]
        best = max(best, int(chosen.sum()))
    return best


def linear_eluder_estimate(d: int, eps: float, constant: float = 1.0) -> int:
    """Configured asymptotic ``ceil(c * d * ln(1/eps))`` for linear classes, at least 1."""
    if d < 1 or eps <= 0:
        raise ValueError(f"Need d >= 1 and eps > 0, got d={d}, eps={eps}")
    return max(1, math.ceil(constant * d * math.log(1.0 / eps)))
