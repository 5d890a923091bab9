"""
Append-only dataset of labelled state-action pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from env import StateAction

# Repeated pairs must carry labels this close in the deterministic setting
LABEL_AGREEMENT_TOL = 1e-12


class DatasetConflictError(ValueError):
    """A repeated state-action pair arrived with a different label."""


@dataclass
class Dataset:
    """Ordered entries ``(state-action key, label)``.

    Attributes:
        strict_labels: Reject repeats whose labels disagree (deterministic rewards)
    """

    strict_labels: bool = True
    _keys: list[StateAction] = field(default_factory=list, repr=False)
    _labels: list[float] = field(default_factory=list, repr=False)
    _seen: dict[StateAction, float] = field(default_factory=dict, repr=False)

    def append(self, key: StateAction, label: float) -> None:
        key = tuple(key)
        if self.strict_labels and key in self._seen:
            previous = self._seen[key]
            if abs(previous - label) > LABEL_AGREEMENT_TOL:
                raise DatasetConflictError(
                    f"Pair {key} already labelled {previous!r}, new label {label!r}"
                )
        self._seen.setdefault(key, float(label))
        self._keys.append(key)
        self._labels.append(float(label))

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self) -> Iterator[tuple[StateAction, float]]:
        return iter(zip(self._keys, self._labels))

    def __contains__(self, key: StateAction) -> bool:
        return tuple(key) in self._seen

    @property
    def keys(self) -> list[StateAction]:
        return list(self._keys)

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(self._labels, dtype=float)

    def snapshot(self) -> "Dataset":
        copy = Dataset(strict_labels=self.strict_labels)
        copy._keys = list(self._keys)
        copy._labels = list(self._labels)
        copy._seen = dict(self._seen)
        return copy

    def to_list(self) -> list:
        return [[*key, label] for key, label in self]
