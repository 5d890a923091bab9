"""
Function classes over the state-action pairs of a layered MDP.

Both classes evaluate a *member* on a list of state-action keys through the
shared ``values(member, keys)`` interface. A linear member is a parameter
vector ``theta``, a finite member is an integer index into the table stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from env import DeterministicMdp, State, StateAction
from env.jsonio import read_json, write_json


# =============================================================================
# CONSTANTS
# =============================================================================

# Slack for the unit-norm checks on features and parameters
NORM_TOL = 1e-12


def _nested_to_flat(nested: list) -> tuple[list[StateAction], list[Any]]:
    """Flatten a ``[h][s][a]`` nested table into canonical keys and leaf values."""
    keys: list[StateAction] = []
    leaves: list[Any] = []
    for h, level in enumerate(nested):
        for s, row in enumerate(level):
            for a, leaf in enumerate(row):
                keys.append((h, s, a))
                leaves.append(leaf)
    return keys, leaves


def _flat_to_nested(keys: Sequence[StateAction], leaves: Sequence[Any]) -> list:
    nested: list = []
    for (h, s, a), leaf in zip(keys, leaves):
        while len(nested) <= h:
            nested.append([])
        while len(nested[h]) <= s:
            nested[h].append([])
        nested[h][s].append(leaf)
    return nested


def _index_of(keys: Sequence[StateAction]) -> dict[StateAction, int]:
    return {tuple(key): i for i, key in enumerate(keys)}


def _group_by_state(keys: Sequence[StateAction]) -> dict[State, tuple[StateAction, ...]]:
    grouped: dict[State, list[StateAction]] = {}
    for h, s, a in keys:
        grouped.setdefault((h, s), []).append((h, s, a))
    return {state: tuple(sorted(group)) for state, group in grouped.items()}


# =============================================================================
# FEATURE MAP / LINEAR CLASS
# =============================================================================


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Dense feature table ``phi(s, a)`` of dimension ``d``.

    Attributes:
        d: Feature dimension
        keys: State-action keys in canonical MDP order
        features: Array of shape ``(len(keys), d)``
    """

    d: int
    keys: tuple[StateAction, ...]
    features: np.ndarray
    pair_index: dict[StateAction, int] = field(init=False, repr=False, compare=False)
    by_state: dict[State, tuple[StateAction, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        if features.shape != (len(self.keys), self.d):
            raise ValueError(
                f"Feature table has shape {features.shape}, expected {(len(self.keys), self.d)}"
            )
        norms = np.linalg.norm(features, axis=1)
        if norms.size and norms.max() > 1.0 + NORM_TOL:
            worst = int(np.argmax(norms))
            raise ValueError(f"||phi{self.keys[worst]}|| = {norms[worst]:.6g} exceeds 1")
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "keys", tuple(tuple(k) for k in self.keys))
        object.__setattr__(self, "pair_index", _index_of(self.keys))
        object.__setattr__(self, "by_state", _group_by_state(self.keys))

    def phi(self, key: StateAction) -> np.ndarray:
        return self.features[self.pair_index[key]]

    def rows(self, keys: Sequence[StateAction]) -> np.ndarray:
        return self.features[[self.pair_index[tuple(k)] for k in keys]]

    def to_dict(self) -> dict:
        return {"d": self.d, "phi": _flat_to_nested(self.keys, self.features.tolist())}

    @classmethod
    def from_dict(cls, raw: dict) -> "FeatureMap":
        keys, leaves = _nested_to_flat(raw["phi"])
        d = int(raw["d"])
        features = np.asarray(leaves, dtype=float).reshape(len(keys), d)
        return cls(d=d, keys=tuple(keys), features=features)

    def save(self, path: Union[str, Path]) -> Path:
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FeatureMap":
        return cls.from_dict(read_json(path))

    def check_against(self, mdp: DeterministicMdp) -> None:
        """Raise if the table does not cover exactly the pairs of ``mdp``."""
        if list(self.keys) != mdp.pairs():
            raise ValueError("Feature map keys do not match the MDP's state-action pairs")


@dataclass(frozen=True)
class LinearClass:
    """``F = {f_theta(s, a) = theta^T phi(s, a) : ||theta|| <= norm_bound}``."""

    feature_map: FeatureMap
    norm_bound: float = 1.0

    @property
    def d(self) -> int:
        return self.feature_map.d

    @property
    def keys(self) -> tuple[StateAction, ...]:
        return self.feature_map.keys

    def state_keys(self, state: State) -> tuple[StateAction, ...]:
        return self.feature_map.by_state[state]

    def values(self, theta: np.ndarray, keys: Sequence[StateAction]) -> np.ndarray:
        return self.feature_map.rows(keys) @ np.asarray(theta, dtype=float)

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        """Values of ``f_theta`` on every key, in key order."""
        return self.feature_map.features @ np.asarray(theta, dtype=float)

    def contains(self, theta: np.ndarray) -> bool:
        return float(np.linalg.norm(theta)) <= self.norm_bound + NORM_TOL


# =============================================================================
# FINITE CLASS
# =============================================================================


@dataclass(frozen=True, eq=False)
class FiniteClass:
    """Explicit finite class: one value table per member.

    Attributes:
        keys: State-action keys in canonical MDP order
        tables: Array of shape ``(m, len(keys))``; row ``i`` is member ``i``
    """

    keys: tuple[StateAction, ...]
    tables: np.ndarray
    pair_index: dict[StateAction, int] = field(init=False, repr=False, compare=False)
    by_state: dict[State, tuple[StateAction, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tables = np.atleast_2d(np.asarray(self.tables, dtype=float))
        if tables.shape[0] == 0:
            raise ValueError("Finite class must contain at least one function")
        if tables.shape[1] != len(self.keys):
            raise ValueError(
                f"Every table must cover all {len(self.keys)} pairs, got {tables.shape[1]} columns"
            )
        tables.setflags(write=False)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "keys", tuple(tuple(k) for k in self.keys))
        object.__setattr__(self, "pair_index", _index_of(self.keys))
        object.__setattr__(self, "by_state", _group_by_state(self.keys))

    @property
    def size(self) -> int:
        return int(self.tables.shape[0])

    def state_keys(self, state: State) -> tuple[StateAction, ...]:
        """Keys ``(h, s, a)`` of every action at ``state``, by action index."""
        return self.by_state[state]

    def columns(self, keys: Sequence[StateAction]) -> list[int]:
        return [self.pair_index[tuple(k)] for k in keys]

    def values(self, index: int, keys: Sequence[StateAction]) -> np.ndarray:
        return self.tables[index, self.columns(keys)]

    def evaluate(self, index: int) -> np.ndarray:
        return self.tables[index]

    def with_function(self, table: np.ndarray) -> "FiniteClass":
        """Return a new class with ``table`` appended as the last member."""
        return FiniteClass(self.keys, np.vstack([self.tables, np.asarray(table, dtype=float)]))

    def to_list(self) -> list:
        return [_flat_to_nested(self.keys, row.tolist()) for row in self.tables]

    @classmethod
    def from_list(cls, raw: list) -> "FiniteClass":
        if not raw:
            raise ValueError("Finite class must contain at least one function")
        keys, _ = _nested_to_flat(raw[0])
        tables = []
        for nested in raw:
            other_keys, leaves = _nested_to_flat(nested)
            if other_keys != keys:
                raise ValueError("All tables of a finite class must share the same pairs")
            tables.append(leaves)
        return cls(keys=tuple(keys), tables=np.asarray(tables, dtype=float))

    def save(self, path: Union[str, Path]) -> Path:
        return write_json(self.to_list(), path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FiniteClass":
        return cls.from_list(read_json(path))

    def check_against(self, mdp: DeterministicMdp) -> None:
        if list(self.keys) != mdp.pairs():
            raise ValueError("Finite class keys do not match the MDP's state-action pairs")


FunctionClass = Union[LinearClass, FiniteClass]


# =============================================================================
# FITTED FUNCTION HANDLE
# =============================================================================


@dataclass(frozen=True, eq=False)
class FittedFunction:
    """A selected class member, as returned by least-squares fitting.

    Attributes:
        function_class: The class the member belongs to
        index: Member index (finite classes)
        theta: Parameter vector (linear classes)
        projected: True if the unconstrained solution was rescaled onto the unit ball
        residual: Sum of squared residuals on the fitted dataset
    """

    function_class: FunctionClass
    index: Optional[int] = None
    theta: Optional[np.ndarray] = None
    projected: bool = False
    residual: float = 0.0

    def values(self, keys: Sequence[StateAction]) -> np.ndarray:
        if isinstance(self.function_class, FiniteClass):
            return self.function_class.values(self.index, keys)
        return self.function_class.values(self.theta, keys)

    def value(self, key: StateAction) -> float:
        return float(self.values([key])[0])

    def describe(self) -> dict:
        if self.index is not None:
            return {"index": self.index, "residual": self.residual}
        return {"theta": self.theta, "projected": self.projected, "residual": self.residual}
