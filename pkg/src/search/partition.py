"""
Good/bad bipartition of a node's samples and the linear boundary between them
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.cluster import KMeans
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC

from src.utils.errors import SplitRefusedError

KMEANS_MAX_ITER = 50
SVC_C = 10.0


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """Points with weights . x + bias >= 0 are on the good side"""

    weights: np.ndarray
    bias: float

    def decision(self, features: np.ndarray) -> np.ndarray:
        return np.atleast_2d(features) @ self.weights + self.bias

    def contains(self, features: np.ndarray) -> np.ndarray:
        return self.decision(features) >= 0

    def negated(self) -> "HalfSpace":
        return HalfSpace(-self.weights, -self.bias)


def _finite_values(values: np.ndarray) -> np.ndarray:
    """Replace -inf by a penalty below the worst finite value"""
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return np.zeros_like(values)
    spread = float(finite.max() - finite.min()) or 1.0
    return np.where(np.isfinite(values), values, finite.min() - spread)


def kmeans_bipartition(
    features: np.ndarray, values: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    2-means on standardized (features, value) rows.

    Returns (good, bad) index arrays; good is the cluster with the higher mean
    value. Raises SplitRefusedError for fewer than 2 points or all-identical rows.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    values = _finite_values(values)
    if features.shape[0] < 2:
        raise SplitRefusedError("Need at least 2 points to bipartition")

    rows = np.column_stack([features, values])
    if np.all(rows == rows[0]):
        raise SplitRefusedError("All points are identical")

    scaled = StandardScaler().fit_transform(rows)
    labels = KMeans(
        n_clusters=2,
        init="k-means++",
        n_init=1,
        max_iter=KMEANS_MAX_ITER,
        random_state=int(rng.integers(2**31 - 1)),
    ).fit_predict(scaled)

    first, second = np.flatnonzero(labels == 0), np.flatnonzero(labels == 1)
    if first.size == 0 or second.size == 0:
        raise SplitRefusedError("k-means collapsed to a single cluster")

    first_mean, second_mean = values[first].mean(), values[second].mean()
    if first_mean > second_mean or (
        first_mean == second_mean and np.argmax(values) in set(first.tolist())
    ):
        return first, second
    return second, first


def fit_boundary(good: np.ndarray, bad: np.ndarray, c: float = SVC_C) -> HalfSpace:
    """
    Linear maximum-margin separator (soft margin) between good and bad points,
    expressed in the original feature space.
    """
    good = np.atleast_2d(np.asarray(good, dtype=float))
    bad = np.atleast_2d(np.asarray(bad, dtype=float))
    if good.shape[0] == 0 or bad.shape[0] == 0:
        raise SplitRefusedError("Boundary needs both good and bad points")

    points = np.vstack([good, bad])
    labels = np.concatenate([np.ones(good.shape[0], dtype=int), np.zeros(bad.shape[0], dtype=int)])

    scaler = StandardScaler().fit(points)
    svc = SVC(kernel="linear", C=c).fit(scaler.transform(points), labels)

    # decision = w . (x - mean) / scale + b
    scaled_weights = svc.coef_[0] / scaler.scale_
    half_space = HalfSpace(
        weights=scaled_weights, bias=float(svc.intercept_[0] - scaled_weights @ scaler.mean_)
    )

    accuracy = float(np.mean(half_space.contains(points) == labels.astype(bool)))
    if accuracy < 0.5:
        half_space = half_space.negated()
    return half_space
