"""
Equal-population quantile classes
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.utils.errors import ConfigurationError, InsufficientDataError


@dataclass(frozen=True)
class QuantileBuckets:
    """N classes cut by N-1 strictly increasing edges; class k holds [edge[k-1], edge[k])"""

    edges: Tuple[float, ...]

    def __post_init__(self):
        if any(upper <= lower for lower, upper in zip(self.edges, self.edges[1:])):
            raise ConfigurationError(f"Bucket edges must be strictly increasing: {self.edges}")

    @property
    def n_classes(self) -> int:
        return len(self.edges) + 1

    def classify(self, value: float) -> int:
        return int(np.searchsorted(self.edges, value, side="right"))

    def classify_many(self, values: Sequence[float]) -> np.ndarray:
        return np.searchsorted(np.asarray(self.edges), np.asarray(values, dtype=float), side="right")

    def upper_edge(self, class_index: int) -> float:
        return self.edges[class_index] if class_index < len(self.edges) else float("inf")

    def highest_class_below(self, limit: float) -> int:
        """Largest class whose every member is below limit; -1 when none is"""
        eligible = [k for k in range(self.n_classes) if self.upper_edge(k) <= limit]
        return max(eligible, default=-1)


def _check(values: np.ndarray, n_classes: int) -> None:
    if n_classes < 2:
        raise ConfigurationError(f"Need at least 2 classes, got {n_classes}")
    if values.size == 0:
        raise InsufficientDataError("Cannot fit buckets to an empty sample")
    distinct = np.unique(values).size
    if n_classes > distinct:
        raise InsufficientDataError(
            f"{n_classes} classes requested but only {distinct} distinct values"
        )


def rank_labels(values: Sequence[float], n_classes: int) -> np.ndarray:
    """Class of every sample by rank (value, then index), populations equal within one"""
    values = np.asarray(values, dtype=float)
    _check(values, n_classes)
    order = np.argsort(values, kind="stable")
    labels = np.empty(values.size, dtype=int)
    for class_index, group in enumerate(np.array_split(order, n_classes)):
        labels[group] = class_index
    return labels


def fit_buckets(values: Sequence[float], n_classes: int) -> QuantileBuckets:
    """
    Cut the sorted sample into n_classes groups of equal size (within one) and
    place each edge midway between neighbouring groups.

    Tied values straddling a cut yield an edge nudged just above the previous
    one so the edges stay strictly increasing.
    """
    values = np.asarray(values, dtype=float)
    _check(values, n_classes)
    groups = np.array_split(np.sort(values, kind="stable"), n_classes)

    edges = []
    for lower, upper in zip(groups, groups[1:]):
        edge = (lower[-1] + upper[0]) / 2.0
        if edges and edge <= edges[-1]:
            edge = float(np.nextafter(edges[-1], np.inf))
        edges.append(float(edge))
    return QuantileBuckets(edges=tuple(edges))
