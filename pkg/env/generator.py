"""
Synthetische MDP-Instanzen mit vorgegebener Optimalitaetsluecke.

Alle Rewards liegen auf einem Gitter in Einheiten der Ziel-Luecke ``g``: ein
Reward ist ``k * g`` mit ganzzahligem ``k``. Damit sind alle Q*-Werte
Vielfache von ``g`` und jede positive Differenz V* - Q* ist mindestens ``g``.
Ein gepflanzter Zustand im letzten Level mit zwei Aktionen im Abstand von genau
einem Quantum sorgt dafuer, dass die Luecke exakt ``g`` ist.

Die Pfadsummen werden ueber Level-Quoten beschraenkt: Level ``h`` darf hoechstens
``quota[h]`` Quanten vergeben, die Quoten summieren sich zu
``K = floor(max_path_sum / g)``.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from .mdp import (
    PATH_SUM_TOL,
    DeterministicMdp,
    DeterministicReward,
    RewardSpec,
    TwoPointReward,
    path_reward_bounds,
)
from .solver import solve_dp

ActionSpec = Union[int, tuple[int, int]]

NOISE_FAMILIES = ("twopoint", "twopoint_random", "degenerate")

# Toleranz der Selbstpruefung gen_mdp -> solve_dp
GAP_SELF_CHECK_TOL = 1e-9


class InfeasibleParametersError(ValueError):
    """Parameterkombination ist mit den Reward-Normierungen nicht vereinbar."""


# -----------------------------------------------------------------------------
# Deterministische Instanzen
# -----------------------------------------------------------------------------


def _action_counts(rng: np.random.Generator, widths: Sequence[int], spec: ActionSpec) -> list[list[int]]:
    if isinstance(spec, (int, np.integer)):
        lo = hi = int(spec)
    else:
        lo, hi = (int(v) for v in spec)
    if lo < 1 or hi < lo:
        raise InfeasibleParametersError(f"Ungueltige Aktionsanzahl: {spec}")
    return [[int(rng.integers(lo, hi + 1)) for _ in range(width)] for width in widths]


def _transitions(rng: np.random.Generator, actions: list[int], next_width: int) -> list[list[int]]:
    """Zufaellige Transitionen; jeder Folgezustand bekommt nach Moeglichkeit eine Kante."""
    rows = [[int(rng.integers(0, next_width)) for _ in range(n_a)] for n_a in actions]
    flat = [(s, a) for s, n_a in enumerate(actions) for a in range(n_a)]
    order = rng.permutation(len(flat))
    for target, idx in enumerate(order[:next_width]):
        s, a = flat[idx]
        rows[s][a] = target
    return rows


def gen_mdp(
    seed: int,
    horizon: int,
    level_widths: Sequence[int],
    actions_per_state: ActionSpec,
    target_gap: float,
    *,
    max_path_sum: float = 1.0,
) -> DeterministicMdp:
    """Erzeugt ein MDP, dessen Luecke ``solve_dp(mdp).gap`` gleich ``target_gap`` ist.

    Args:
        seed: Seed fuer ``numpy.random.default_rng``
        horizon: Anzahl Levels H
        level_widths: Anzahl Zustaende pro Level (Laenge H)
        actions_per_state: feste Anzahl oder Bereich ``(lo, hi)`` (inklusive)
        target_gap: gewuenschte Luecke rho in (0, 1]
        max_path_sum: obere Schranke fuer jede Pfadsumme (Reserve fuer Rausch-Rewards)

    Returns:
        Deterministisches MDP mit Pfadsummen in [0, max_path_sum]

    Raises:
        InfeasibleParametersError: wenn die Parameter keine Instanz zulassen
    """
    if horizon < 1:
        raise InfeasibleParametersError(f"horizon muss >= 1 sein: {horizon}")
    if len(level_widths) != horizon or any(w < 1 for w in level_widths):
        raise InfeasibleParametersError(
            f"level_widths braucht {horizon} positive Eintraege: {list(level_widths)}"
        )
    if not (0.0 < max_path_sum <= 1.0):
        raise InfeasibleParametersError(f"max_path_sum muss in (0, 1] liegen: {max_path_sum}")
    if not (0.0 < target_gap <= 1.0):
        raise InfeasibleParametersError(f"target_gap muss in (0, 1] liegen: {target_gap}")

    quanta = math.floor(max_path_sum / target_gap + 1e-9)
    if quanta * target_gap > max_path_sum + PATH_SUM_TOL:
        quanta -= 1
    if quanta < 1:
        raise InfeasibleParametersError(
            f"target_gap={target_gap} passt nicht in Pfadsummen <= {max_path_sum}"
        )

    rng = np.random.default_rng(seed)
    widths = [int(w) for w in level_widths]
    actions = _action_counts(rng, widths, actions_per_state)

    # Gepflanzter Zustand im letzten Level braucht mindestens zwei Aktionen
    last = horizon - 1
    candidates = [s for s, n_a in enumerate(actions[last]) if n_a >= 2]
    if not candidates:
        max_actions = actions_per_state if isinstance(actions_per_state, int) else actions_per_state[1]
        if max_actions < 2:
            raise InfeasibleParametersError(
                "Mit nur einer Aktion pro Zustand gibt es keine Luecke (gap = inf)"
            )
        forced = int(rng.integers(0, widths[last]))
        actions[last][forced] = 2
        candidates = [forced]
    planted = int(candidates[int(rng.integers(0, len(candidates)))])

    # Quoten: K - 1 Quanten zufaellig verteilt, das letzte Level bekommt eins extra
    quota = rng.multinomial(quanta - 1, np.full(horizon, 1.0 / horizon)).astype(int)
    quota[last] += 1

    transitions: list[tuple[tuple[int, ...], ...]] = []
    for h in range(horizon):
        if h == last:
            transitions.append(tuple(() for _ in range(widths[h])))
        else:
            rows = _transitions(rng, actions[h], widths[h + 1])
            transitions.append(tuple(tuple(row) for row in rows))

    rewards: list[tuple[tuple[RewardSpec, ...], ...]] = []
    for h in range(horizon):
        level_rewards = []
        for s in range(widths[h]):
            n_a = actions[h][s]
            if h == last and s == planted:
                k_best = int(rng.integers(1, quota[h] + 1))
                ks = [int(rng.integers(0, k_best + 1)) for _ in range(n_a)]
                ks[0], ks[1] = k_best, k_best - 1
                ks = [ks[i] for i in rng.permutation(n_a)]
            else:
                ks = [int(rng.integers(0, quota[h] + 1)) for _ in range(n_a)]
            level_rewards.append(tuple(DeterministicReward(k * target_gap) for k in ks))
        rewards.append(tuple(level_rewards))

    mdp = DeterministicMdp(
        horizon=horizon,
        levels=tuple(widths),
        actions=tuple(tuple(row) for row in actions),
        transitions=tuple(transitions),
        rewards=tuple(rewards),
        initial_state=0,
    )

    gap = solve_dp(mdp).gap
    if abs(gap - target_gap) > GAP_SELF_CHECK_TOL:
        raise RuntimeError(f"Generierte Luecke {gap} weicht von target_gap={target_gap} ab")
    return mdp


# -----------------------------------------------------------------------------
# Stochastische Rewards
# -----------------------------------------------------------------------------


def two_point_around(mean: float, width: float) -> TwoPointReward:
    """Mittelwerterhaltende Zwei-Punkt-Verteilung auf ``{max(0, m-w), min(1, m+w)}``."""
    if not (0.0 <= mean <= 1.0):
        raise InfeasibleParametersError(f"Mittelwert {mean} liegt nicht im Support [0, 1]")
    lo = max(0.0, mean - width)
    hi = min(1.0, mean + width)
    if hi - lo <= 0.0:
        return TwoPointReward(mean, mean, 0.0)
    p_hi = (mean - lo) / (hi - lo)
    return TwoPointReward(lo, hi, min(1.0, max(0.0, p_hi)))


def gen_stochastic_rewards(
    mdp: DeterministicMdp,
    seed: int,
    noise_family: str = "twopoint",
    width: float = 0.1,
) -> DeterministicMdp:
    """Ersetzt jeden deterministischen Reward durch eine Verteilung mit gleichem Mittelwert.

    Familien:
        twopoint: feste Breite ``width`` an jedem Paar
        twopoint_random: Breite pro Paar gleichverteilt in [0, width] (aus ``seed``)
        degenerate: Zwei-Punkt-Verteilung mit lo = hi = r (kein Rauschen)

    Raises:
        ValueError: wenn das MDP bereits stochastische Rewards hat oder die Familie unbekannt ist
        InfeasibleParametersError: wenn ein Mittelwert ausserhalb [0, 1] liegt oder der
            verbreiterte Support eine Pfadsumme ueber 1 hebt
    """
    if noise_family not in NOISE_FAMILIES:
        raise ValueError(f"Unbekannte Rauschfamilie '{noise_family}', erlaubt: {NOISE_FAMILIES}")
    if not mdp.is_deterministic:
        raise ValueError("gen_stochastic_rewards erwartet ein MDP mit deterministischen Rewards")
    if width < 0:
        raise InfeasibleParametersError(f"width muss >= 0 sein: {width}")

    rng = np.random.default_rng(seed)
    rewards = []
    for level in mdp.rewards:
        level_rewards = []
        for row in level:
            specs = []
            for spec in row:
                if noise_family == "degenerate":
                    w = 0.0
                elif noise_family == "twopoint_random":
                    w = float(rng.uniform(0.0, width))
                else:
                    w = width
                specs.append(two_point_around(spec.mean, w))
            level_rewards.append(tuple(specs))
        rewards.append(tuple(level_rewards))

    noisy = DeterministicMdp(
        horizon=mdp.horizon,
        levels=mdp.levels,
        actions=mdp.actions,
        transitions=mdp.transitions,
        rewards=tuple(rewards),
        initial_state=mdp.initial_state,
    )
    lo, hi = path_reward_bounds(noisy)
    if hi > 1.0 + PATH_SUM_TOL:
        raise InfeasibleParametersError(
            f"Rausch-Support hebt die maximale Pfadsumme auf {hi:.6g} > 1; "
            f"gen_mdp mit kleinerem max_path_sum erzeugen"
        )
    return noisy
