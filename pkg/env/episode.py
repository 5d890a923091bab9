"""
Episodische Interaktion mit einem MDP inkl. Zaehler.

``EpisodicEnv`` ist das Handle, ueber das die Agenten mit der Umgebung
sprechen: Transitionen abfragen, Rewards lesen bzw. samplen, Episoden
abspielen. Jeder Zugriff wird im ``EpisodeAccount`` verbucht. Eine optionale
Deadline (monotone Uhr) bricht einen Trial kooperativ mit ``TrialTimeout`` ab.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .mdp import DeterministicMdp, State, StateAction


class TrialTimeout(RuntimeError):
    """Wall-Clock-Budget eines Trials ueberschritten."""


@dataclass
class EpisodeAccount:
    """Monotone Zaehler einer Interaktion.

    Attributes:
        episodes_started: Anzahl gestarteter Episoden (``reset``)
        env_steps: Anzahl ausgefuehrter Transitionen
        reward_samples_drawn: Anzahl gezogener Reward-Samples
    """

    episodes_started: int = 0
    env_steps: int = 0
    reward_samples_drawn: int = 0


class EpisodicEnv:
    """Umgebungs-Handle fuer ein festes MDP.

    Attributes:
        mdp: Das (unveraenderliche) MDP
        account: Zaehler dieses Handles (gehoert genau einem Trial)
        rng: Zufallsgenerator fuer stochastische Rewards
    """

    def __init__(
        self,
        mdp: DeterministicMdp,
        rng: Optional[np.random.Generator] = None,
        account: Optional[EpisodeAccount] = None,
        deadline: Optional[float] = None,
    ):
        """
        Args:
            mdp: Das MDP
            rng: Generator fuer Reward-Samples (Pflicht bei stochastischen Rewards)
            account: Bestehende Zaehler (sonst neu)
            deadline: Zeitpunkt ``time.monotonic()``, ab dem ``TrialTimeout`` geworfen wird
        """
        self.mdp = mdp
        self.rng = rng
        self.account = account if account is not None else EpisodeAccount()
        self.deadline = deadline
        self._current: Optional[State] = None

    # -------------------------------------------------------------------------
    # Zugriff fuer die Agenten
    # -------------------------------------------------------------------------

    @property
    def initial_state(self) -> State:
        return self.mdp.start

    @property
    def horizon(self) -> int:
        return self.mdp.horizon

    def n_actions(self, state: State) -> int:
        return self.mdp.n_actions(state)

    def is_last_level(self, state: State) -> bool:
        return self.mdp.is_last_level(state)

    def next_state(self, state: State, action: int) -> State:
        """Transition P(s, a); zaehlt einen Umgebungsschritt."""
        self.check_deadline()
        self.account.env_steps += 1
        return self.mdp.next_state(state, action)

    def reward(self, state: State, action: int) -> float:
        """Deterministischer Reward r(s, a).

        Raises:
            ValueError: wenn der Reward an (s, a) stochastisch ist
        """
        spec = self.mdp.reward_spec((*state, action))
        if not spec.is_deterministic:
            raise ValueError(
                f"Reward an {(*state, action)} ist stochastisch; sample_rewards() verwenden"
            )
        return spec.mean

    def sample_rewards(self, key: StateAction, n: int) -> np.ndarray:
        """Zieht ``n`` unabhaengige Reward-Samples an ``key``."""
        self.check_deadline()
        samples = self.mdp.reward_spec(key).sample(self.rng, n)
        self.account.reward_samples_drawn += n
        return samples

    def check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise TrialTimeout("Wall-Clock-Budget des Trials ueberschritten")

    # -------------------------------------------------------------------------
    # Episodische Schnittstelle
    # -------------------------------------------------------------------------

    def reset(self) -> State:
        """Startet eine neue Episode im Startzustand."""
        self.account.episodes_started += 1
        self._current = self.mdp.start
        return self._current

    def step(self, action: int) -> tuple[Optional[State], float, bool]:
        """Fuehrt ``action`` im aktuellen Zustand aus.

        Returns:
            (Folgezustand oder None am Episodenende, Reward, done)
        """
        if self._current is None:
            raise RuntimeError("step() vor reset() oder nach Episodenende")
        state = self._current
        if not (0 <= action < self.mdp.n_actions(state)):
            raise ValueError(f"Ungueltige Aktion {action} in Zustand {state}")

        reward = float(self.sample_rewards((*state, action), 1)[0])
        if self.mdp.is_last_level(state):
            self.check_deadline()
            self.account.env_steps += 1
            self._current = None
            return None, reward, True
        self._current = self.next_state(state, action)
        return self._current, reward, False


def rollout(
    mdp: DeterministicMdp,
    policy: Mapping[State, int],
    account: EpisodeAccount,
    rng: Optional[np.random.Generator] = None,
) -> tuple[list[tuple[State, int, float]], float]:
    """Spielt eine Episode mit ``policy`` ab.

    Returns:
        (Trajektorie als Liste von (Zustand, Aktion, Reward), Gesamt-Reward)

    Raises:
        ValueError: wenn die Policy an einem erreichten Zustand undefiniert ist
    """
    env = EpisodicEnv(mdp, rng=rng, account=account)
    state: Optional[State] = env.reset()
    trajectory: list[tuple[State, int, float]] = []
    done = False
    while not done:
        if state not in policy:
            raise ValueError(f"Policy undefiniert im erreichten Zustand {state}")
        action = policy[state]
        next_state, reward, done = env.step(action)
        trajectory.append((state, action, reward))
        state = next_state

    # Rueckwaerts summieren wie die Bellman-Rekursion (bitgleich zu V*)
    total = 0.0
    for _, _, reward in reversed(trajectory):
        total = reward + total
    return trajectory, total
