"""
Exakte Ground Truth per Rueckwaerts-Induktion.

Transitionen sind deterministisch, daher entfaellt der Erwartungswert ueber
Folgezustaende; stochastische Rewards gehen mit ihrem exakten Mittelwert ein.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .mdp import DeterministicMdp, State, StateAction, check_path_sums

# Q-Werte, die naeher als diese Toleranz an V* liegen, gelten als optimal.
OPTIMAL_TOL = 1e-12


@dataclass(frozen=True)
class GroundTruth:
    """Q*, V*, die Menge optimaler Aktionen pro Zustand und die Optimalitaetsluecke.

    Attributes:
        q_star: Q*(s, a) pro Paar ``(h, s, a)``
        v_star: V*(s) pro Zustand ``(h, s)``
        pi_star: Menge der optimalen Aktionen pro Zustand
        gap: kleinste Differenz V*(s) - Q*(s, a) ueber suboptimale Paare
            (``inf`` wenn alle Aktionen ueberall optimal sind)
        pairs: kanonische Paar-Reihenfolge des MDPs
    """

    q_star: dict[StateAction, float]
    v_star: dict[State, float]
    pi_star: dict[State, frozenset[int]]
    gap: float
    pairs: tuple[StateAction, ...]

    @property
    def q_array(self) -> np.ndarray:
        """Q* als Vektor in kanonischer Paar-Reihenfolge."""
        return np.array([self.q_star[key] for key in self.pairs], dtype=float)

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "q_star": [[*key, value] for key, value in self.q_star.items()],
            "v_star": [[*state, value] for state, value in self.v_star.items()],
            "pi_star": [[*state, sorted(actions)] for state, actions in self.pi_star.items()],
        }


def solve_dp(mdp: DeterministicMdp) -> GroundTruth:
    """Berechnet Q*, V*, pi* und die Luecke rho per Rueckwaerts-Induktion.

    Raises:
        InvalidMdpError: wenn eine Pfadsumme der Rewards [0, 1] verlaesst
    """
    check_path_sums(mdp)

    H = mdp.horizon
    q_star: dict[StateAction, float] = {}
    v_star: dict[State, float] = {}
    pi_star: dict[State, frozenset[int]] = {}
    gap = math.inf

    for h in range(H - 1, -1, -1):
        for s in range(mdp.levels[h]):
            q_values = []
            for a in range(mdp.actions[h][s]):
                q = mdp.rewards[h][s][a].mean
                if h < H - 1:
                    q += v_star[(h + 1, mdp.transitions[h][s][a])]
                q_star[(h, s, a)] = q
                q_values.append(q)

            v = max(q_values)
            v_star[(h, s)] = v
            pi_star[(h, s)] = frozenset(a for a, q in enumerate(q_values) if v - q <= OPTIMAL_TOL)
            for q in q_values:
                if v - q > OPTIMAL_TOL:
                    gap = min(gap, v - q)

    return GroundTruth(
        q_star=q_star,
        v_star=v_star,
        pi_star=pi_star,
        gap=gap,
        pairs=tuple(mdp.pairs()),
    )


def reachable_states(mdp: DeterministicMdp, policy: Mapping[State, int]) -> list[State]:
    """Zustaende auf dem (eindeutigen) Pfad der Policy ab dem Startzustand."""
    state = mdp.start
    path = [state]
    while not mdp.is_last_level(state):
        if state not in policy:
            break
        state = mdp.next_state(state, policy[state])
        path.append(state)
    return path


def policy_matches(truth: GroundTruth, policy: Mapping[State, int], mdp: DeterministicMdp) -> bool:
    """True wenn die Policy an jedem erreichten Zustand eine optimale Aktion waehlt."""
    for state in reachable_states(mdp, policy):
        if state not in policy or policy[state] not in truth.pi_star[state]:
            return False
    return True
