"""
Geschichtete deterministische episodische MDPs.

Zustaende werden pro Level dicht indiziert: ein Zustand ist ``(h, s)`` mit
``h in [0, H)`` und ``s in [0, levels[h])``, ein Zustand-Aktions-Paar ist
``(h, s, a)``. Die Level-Mengen sind damit per Konstruktion disjunkt, und jede
Transition fuehrt von Level ``h`` genau nach Level ``h + 1``.

Rewards sind entweder deterministisch (``DeterministicReward``) oder eine
beschraenkte Zwei-Punkt-Verteilung (``TwoPointReward``) mit Support in [0, 1].

Verwendung:
    from env import DeterministicMdp, DeterministicReward

    mdp = DeterministicMdp(
        horizon=1,
        levels=(1,),
        actions=((2,),),
        transitions=((),),
        rewards=(((DeterministicReward(0.9), DeterministicReward(0.1)),),),
    )
    mdp.pairs()   # [(0, 0, 0), (0, 0, 1)]
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Iterator, Union

import numpy as np

from .jsonio import dumps, read_json, write_json

State = tuple[int, int]
StateAction = tuple[int, int, int]

# Toleranz fuer Pfadsummen-Checks (Rundung bei Summen quantisierter Rewards)
PATH_SUM_TOL = 1e-12


class InvalidMdpError(ValueError):
    """MDP verletzt die strukturellen oder Reward-Invarianten."""


# -----------------------------------------------------------------------------
# Reward-Spezifikationen
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterministicReward:
    """Deterministischer Reward ``r(s, a) = value``."""

    value: float

    @property
    def mean(self) -> float:
        return self.value

    @property
    def support(self) -> tuple[float, float]:
        return (self.value, self.value)

    @property
    def is_deterministic(self) -> bool:
        return True

    def sample(self, rng: np.random.Generator | None, n: int) -> np.ndarray:
        return np.full(n, self.value, dtype=float)

    def scaled(self, c: float) -> "DeterministicReward":
        return DeterministicReward(self.value * c)

    def to_dict(self) -> dict:
        return {"det": self.value}


@dataclass(frozen=True)
class TwoPointReward:
    """Zwei-Punkt-Verteilung: ``hi`` mit Wahrscheinlichkeit ``p_hi``, sonst ``lo``.

    Attributes:
        lo: Unterer Support-Punkt (>= 0)
        hi: Oberer Support-Punkt (<= 1, >= lo)
        p_hi: Wahrscheinlichkeit fuer ``hi``
    """

    lo: float
    hi: float
    p_hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise InvalidMdpError(
                f"Zwei-Punkt-Support muss 0 <= lo <= hi <= 1 erfuellen: lo={self.lo}, hi={self.hi}"
            )
        if not (0.0 <= self.p_hi <= 1.0):
            raise InvalidMdpError(f"p_hi ausserhalb [0, 1]: {self.p_hi}")

    @property
    def mean(self) -> float:
        return self.lo + self.p_hi * (self.hi - self.lo)

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def is_deterministic(self) -> bool:
        return False

    def sample(self, rng: np.random.Generator | None, n: int) -> np.ndarray:
        if rng is None:
            raise ValueError("Stochastischer Reward braucht einen Zufallsgenerator (rng)")
        return np.where(rng.random(n) < self.p_hi, self.hi, self.lo)

    def scaled(self, c: float) -> "TwoPointReward":
        return TwoPointReward(self.lo * c, self.hi * c, self.p_hi)

    def to_dict(self) -> dict:
        return {"twopoint": {"lo": self.lo, "hi": self.hi, "p_hi": self.p_hi}}


RewardSpec = Union[DeterministicReward, TwoPointReward]


def reward_from_dict(raw: dict) -> RewardSpec:
    """Liest eine Reward-Spezifikation aus ``{"det": x}`` oder ``{"twopoint": {...}}``."""
    if "det" in raw:
        return DeterministicReward(float(raw["det"]))
    if "twopoint" in raw:
        tp = raw["twopoint"]
        return TwoPointReward(float(tp["lo"]), float(tp["hi"]), float(tp["p_hi"]))
    raise InvalidMdpError(f"Unbekannte Reward-Spezifikation: {raw}")


# -----------------------------------------------------------------------------
# MDP
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterministicMdp:
    """Geschichtetes deterministisches MDP mit Horizont H.

    Attributes:
        horizon: Anzahl Levels H
        levels: Anzahl Zustaende pro Level
        actions: Anzahl Aktionen pro Zustand, ``actions[h][s]``
        transitions: Folgezustand-Index in Level h+1, ``transitions[h][s][a]``
            (fuer das letzte Level leer)
        rewards: Reward-Spezifikation pro ``(h, s, a)``
        initial_state: Index des Startzustands in Level 0
    """

    horizon: int
    levels: tuple[int, ...]
    actions: tuple[tuple[int, ...], ...]
    transitions: tuple[tuple[tuple[int, ...], ...], ...]
    rewards: tuple[tuple[tuple[RewardSpec, ...], ...], ...]
    initial_state: int = 0

    def __post_init__(self):
        self._validate_structure()

    def _validate_structure(self) -> None:
        H = self.horizon
        if H < 1:
            raise InvalidMdpError(f"horizon muss >= 1 sein: {H}")
        if len(self.levels) != H or len(self.actions) != H or len(self.rewards) != H:
            raise InvalidMdpError("levels/actions/rewards muessen genau H Eintraege haben")
        if len(self.transitions) != H:
            raise InvalidMdpError("transitions muss genau H Eintraege haben (letztes Level leer)")
        if not (0 <= self.initial_state < self.levels[0]):
            raise InvalidMdpError(f"initial_state {self.initial_state} nicht in Level 0")

        for h in range(H):
            width = self.levels[h]
            if width < 1:
                raise InvalidMdpError(f"Level {h} hat keine Zustaende")
            if len(self.actions[h]) != width or len(self.rewards[h]) != width:
                raise InvalidMdpError(f"Level {h}: actions/rewards passen nicht zu levels[{h}]={width}")
            for s in range(width):
                n_a = self.actions[h][s]
                if n_a < 1:
                    raise InvalidMdpError(f"Zustand {(h, s)} hat keine Aktionen")
                if len(self.rewards[h][s]) != n_a:
                    raise InvalidMdpError(f"Zustand {(h, s)}: {len(self.rewards[h][s])} Rewards fuer {n_a} Aktionen")

            if h == H - 1:
                if any(len(row) for row in self.transitions[h]):
                    raise InvalidMdpError(f"Transitionen im letzten Level {h} verlassen den Horizont")
                continue

            if len(self.transitions[h]) != width:
                raise InvalidMdpError(f"Level {h}: transitions passen nicht zu levels[{h}]={width}")
            next_width = self.levels[h + 1]
            for s in range(width):
                row = self.transitions[h][s]
                if len(row) != self.actions[h][s]:
                    raise InvalidMdpError(f"Zustand {(h, s)}: Transition fehlt fuer mindestens eine Aktion")
                for a, nxt in enumerate(row):
                    if not (0 <= nxt < next_width):
                        raise InvalidMdpError(
                            f"Transition {(h, s, a)} -> {nxt} liegt nicht in Level {h + 1} "
                            f"(0..{next_width - 1})"
                        )

    # -------------------------------------------------------------------------
    # Zugriff
    # -------------------------------------------------------------------------

    @property
    def start(self) -> State:
        return (0, self.initial_state)

    def states(self) -> Iterator[State]:
        for h, width in enumerate(self.levels):
            for s in range(width):
                yield (h, s)

    def pairs(self) -> list[StateAction]:
        """Alle Zustand-Aktions-Paare in kanonischer Reihenfolge (Level, Zustand, Aktion)."""
        return list(self._pairs)

    @cached_property
    def _pairs(self) -> tuple[StateAction, ...]:
        return tuple(
            (h, s, a)
            for h, width in enumerate(self.levels)
            for s in range(width)
            for a in range(self.actions[h][s])
        )

    @cached_property
    def pair_index(self) -> dict[StateAction, int]:
        """Spaltenindex jedes Paares in der kanonischen Reihenfolge."""
        return {key: i for i, key in enumerate(self._pairs)}

    @property
    def n_pairs(self) -> int:
        return len(self._pairs)

    def n_actions(self, state: State) -> int:
        h, s = state
        return self.actions[h][s]

    def is_last_level(self, state: State) -> bool:
        return state[0] == self.horizon - 1

    def next_state(self, state: State, action: int) -> State:
        h, s = state
        if h >= self.horizon - 1:
            raise InvalidMdpError(f"Zustand {state} liegt im letzten Level, keine Transition")
        return (h + 1, self.transitions[h][s][action])

    def reward_spec(self, key: StateAction) -> RewardSpec:
        h, s, a = key
        return self.rewards[h][s][a]

    def mean_reward(self, key: StateAction) -> float:
        return self.reward_spec(key).mean

    @property
    def is_deterministic(self) -> bool:
        return all(spec.is_deterministic for level in self.rewards for row in level for spec in row)

    # -------------------------------------------------------------------------
    # Serialisierung
    # -------------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "horizon": self.horizon,
            "levels": list(self.levels),
            "actions": [list(row) for row in self.actions],
            "transitions": [[list(row) for row in level] for level in self.transitions],
            "rewards": [
                [[spec.to_dict() for spec in row] for row in level] for level in self.rewards
            ],
            "initial_state": self.initial_state,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "DeterministicMdp":
        missing = [k for k in ("horizon", "levels", "actions", "transitions", "rewards") if k not in raw]
        if missing:
            raise InvalidMdpError(f"MDP-Dokument unvollstaendig, fehlt: {missing}")
        return cls(
            horizon=int(raw["horizon"]),
            levels=tuple(int(w) for w in raw["levels"]),
            actions=tuple(tuple(int(n) for n in row) for row in raw["actions"]),
            transitions=tuple(
                tuple(tuple(int(n) for n in row) for row in level) for level in raw["transitions"]
            ),
            rewards=tuple(
                tuple(tuple(reward_from_dict(spec) for spec in row) for row in level)
                for level in raw["rewards"]
            ),
            initial_state=int(raw.get("initial_state", 0)),
        )

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def save(self, path: Union[str, Path]) -> Path:
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DeterministicMdp":
        return cls.from_dict(read_json(path))


# -----------------------------------------------------------------------------
# Hilfsfunktionen
# -----------------------------------------------------------------------------


def path_reward_bounds(mdp: DeterministicMdp) -> tuple[float, float]:
    """Minimale und maximale realisierbare Pfadsumme ab Level 0.

    Rueckwaerts-DP ueber die Support-Grenzen jedes Rewards; beruecksichtigt alle
    Zustaende in Level 0 (nicht nur den Startzustand).
    """
    H = mdp.horizon
    lo_next: list[float] = []
    hi_next: list[float] = []
    for h in range(H - 1, -1, -1):
        lo_cur, hi_cur = [], []
        for s in range(mdp.levels[h]):
            lows, highs = [], []
            for a in range(mdp.actions[h][s]):
                r_lo, r_hi = mdp.rewards[h][s][a].support
                if h < H - 1:
                    nxt = mdp.transitions[h][s][a]
                    r_lo += lo_next[nxt]
                    r_hi += hi_next[nxt]
                lows.append(r_lo)
                highs.append(r_hi)
            lo_cur.append(min(lows))
            hi_cur.append(max(highs))
        lo_next, hi_next = lo_cur, hi_cur
    return min(lo_next), max(hi_next)


def check_path_sums(mdp: DeterministicMdp) -> None:
    """Wirft InvalidMdpError wenn eine Pfadsumme [0, 1] verlaesst."""
    lo, hi = path_reward_bounds(mdp)
    if lo < -PATH_SUM_TOL or hi > 1.0 + PATH_SUM_TOL:
        raise InvalidMdpError(
            f"Pfadsummen der Rewards liegen in [{lo:.6g}, {hi:.6g}], erlaubt ist [0, 1]"
        )


def scale_rewards(mdp: DeterministicMdp, c: float) -> DeterministicMdp:
    """Multipliziert jeden Reward (bzw. Support) mit ``c in (0, 1]``."""
    if not (0.0 < c <= 1.0):
        raise ValueError(f"Skalierungsfaktor muss in (0, 1] liegen: {c}")
    return DeterministicMdp(
        horizon=mdp.horizon,
        levels=mdp.levels,
        actions=mdp.actions,
        transitions=mdp.transitions,
        rewards=tuple(
            tuple(tuple(spec.scaled(c) for spec in row) for row in level) for level in mdp.rewards
        ),
        initial_state=mdp.initial_state,
    )
