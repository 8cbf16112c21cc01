"""
Labeled State Repository - integer labels for post-jump states
Exact stores compare Gaussian-rational matrices entrywise; approximate stores
match by trace distance to each label's representative
"""
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.algebra.exact_matrix import ExactMatrix
from src.config.analysis_config import TOL_MATCH


class LabeledStateStore:
    """
    Repository assigning labels 1, 2, ... in first-seen order

    Exact mode keys a dict by the reduced ExactMatrix (hash of the canonical
    key, collisions settled by full equality). Approximate mode scans the
    representatives and reuses the first label within tol_match.
    """

    def __init__(self, exact: bool = True, tol_match: float = TOL_MATCH):
        self.exact = exact
        self.tol_match = tol_match
        self._labels: Dict[ExactMatrix, int] = {}
        self._states: List = []
        self._visits: List[int] = []
        self._stack: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self._states)

    def find(self, state) -> Optional[int]:
        """Label of a stored state, or None"""
        if self.exact:
            return self._labels.get(state)
        if not self._states:
            return None
        array = np.asarray(state, dtype=complex)
        if self._stack is None or len(self._stack) != len(self._states):
            self._stack = np.stack(self._states)
        # batched trace distances to every representative
        distances = 0.5 * np.linalg.svd(self._stack - array, compute_uv=False).sum(axis=1)
        hits = np.flatnonzero(distances <= self.tol_match)
        return int(hits[0]) + 1 if hits.size else None

    def get_or_create(self, state) -> Tuple[int, bool]:
        """(label, created) for a state, assigning the next label if it is new"""
        label = self.find(state)
        if label is not None:
            return label, False
        if self.exact:
            if not isinstance(state, ExactMatrix):
                raise TypeError("Exact stores hold ExactMatrix states")
            self._labels[state] = len(self._states) + 1
            self._states.append(state)
        else:
            self._states.append(np.array(state, dtype=complex))
        self._visits.append(0)
        return len(self._states), True

    def record_visit(self, state) -> int:
        label, _ = self.get_or_create(state)
        self._visits[label - 1] += 1
        return label

    def get_by_label(self, label: int):
        if not 1 <= label <= len(self._states):
            raise KeyError(f"No state with label {label}")
        return self._states[label - 1]

    def visits(self, label: int) -> int:
        return self._visits[label - 1]

    def list_all(self) -> List[Tuple[int, object]]:
        return [(i + 1, state) for i, state in enumerate(self._states)]

    @classmethod
    def merge(cls, stores: Iterable["LabeledStateStore"], series: Iterable[List[int]]) -> Tuple["LabeledStateStore", List[List[int]]]:
        """
        Merge per-trajectory stores into one global store

        Trajectories are replayed in order, so global labels follow first
        appearance in trajectory 1, then trajectory 2, and so on.
        """
        stores = list(stores)
        series = list(series)
        merged = cls(exact=stores[0].exact if stores else True, tol_match=stores[0].tol_match if stores else TOL_MATCH)
        relabeled: List[List[int]] = []
        for store, labels in zip(stores, series):
            relabeled.append([merged.record_visit(store.get_by_label(label)) for label in labels])
        return merged, relabeled
