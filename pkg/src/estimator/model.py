"""
Two-head quantile-class estimator of workload latency and device power
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr
from sklearn.ensemble import HistGradientBoostingClassifier

from src.device.hardware import Device, default_device
from src.device.mapping import Mapping
from src.device.modes import OperatingMode
from src.estimator.buckets import QuantileBuckets, fit_buckets, rank_labels
from src.estimator.dataset import TrainingDataset
from src.estimator.encoding import encode, summarize
from src.utils.errors import ConfigurationError, InsufficientDataError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_CLASSES = 10
DEFAULT_SPLIT = 0.8
MIN_SAMPLES_PER_CLASS = 50


@dataclass(frozen=True)
class ClassPrediction:
    latency_class: int
    power_class: int


@dataclass(frozen=True)
class EstimatorMetrics:
    latency_accuracy: float
    power_accuracy: float
    latency_spearman: float
    power_spearman: float
    feasibility_safety: float
    n_train: int
    n_test: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class Estimator:
    """Trained heads plus the buckets that define their classes"""

    def __init__(
        self,
        latency_buckets: QuantileBuckets,
        power_buckets: QuantileBuckets,
        latency_head: HistGradientBoostingClassifier,
        power_head: HistGradientBoostingClassifier,
        device: Device,
        metrics: Optional[EstimatorMetrics] = None,
    ):
        self.latency_buckets = latency_buckets
        self.power_buckets = power_buckets
        self.latency_head = latency_head
        self.power_head = power_head
        self.device = device
        self.metrics = metrics

    @property
    def n_classes(self) -> int:
        return self.latency_buckets.n_classes

    def power_threshold_class(self, power_cap: float) -> int:
        return self.power_buckets.highest_class_below(power_cap)

    def predict_features(self, features: np.ndarray) -> List[ClassPrediction]:
        features = np.atleast_2d(features)
        latency = self.latency_head.predict(features)
        power = self.power_head.predict(features)
        return [ClassPrediction(int(lat), int(pw)) for lat, pw in zip(latency, power)]

    def predict_many(self, pairs: Sequence[Tuple[Mapping, OperatingMode]]) -> List[ClassPrediction]:
        predictions: List[Optional[ClassPrediction]] = [None] * len(pairs)
        rows, positions = [], []
        for position, (mapping, mode) in enumerate(pairs):
            if mapping.is_empty():
                predictions[position] = ClassPrediction(0, 0)
                continue
            rows.append(summarize(encode(mapping, mode, self.device), mode, self.device))
            positions.append(position)
        if rows:
            for position, prediction in zip(positions, self.predict_features(np.vstack(rows))):
                predictions[position] = prediction
        return [prediction for prediction in predictions if prediction is not None]

    def predict(self, mapping: Mapping, mode: OperatingMode) -> ClassPrediction:
        return self.predict_many([(mapping, mode)])[0]


def predict(estimator: Estimator, mapping: Mapping, mode: OperatingMode) -> ClassPrediction:
    """Class prediction; an empty workload is (0, 0)"""
    return estimator.predict(mapping, mode)


def _head(seed: int) -> HistGradientBoostingClassifier:
    return HistGradientBoostingClassifier(
        max_iter=150, learning_rate=0.1, max_leaf_nodes=31, early_stopping=False, random_state=seed
    )


def feasibility_safety(
    predicted_power_class: np.ndarray,
    measured_power: np.ndarray,
    buckets: QuantileBuckets,
    caps: Sequence[float],
) -> float:
    """
    Share of predictions passing the power filter whose measured power is
    really under the cap, pooled over caps. 1.0 when nothing passes.
    """
    passed = kept = 0
    for cap in caps:
        threshold = buckets.highest_class_below(cap)
        accepted = predicted_power_class <= threshold
        passed += int(accepted.sum())
        kept += int((measured_power[accepted] <= cap).sum())
    return kept / passed if passed else 1.0


def _spearman(predicted: np.ndarray, measured: np.ndarray) -> float:
    if np.unique(predicted).size < 2:
        return 0.0
    return float(spearmanr(predicted, measured).correlation)


def _caps_of(dataset: TrainingDataset) -> List[float]:
    cap_column = list(dataset.feature_names).index("power_cap_w")
    return sorted(float(cap) for cap in np.unique(dataset.features[:, cap_column]))


def evaluate(
    estimator: Estimator,
    dataset: TrainingDataset,
    indices: Optional[np.ndarray] = None,
    *,
    caps: Optional[Sequence[float]] = None,
    n_train: int = 0,
) -> EstimatorMetrics:
    """Per-head accuracy, Spearman rank fidelity and feasibility safety on the given rows"""
    rows = np.arange(len(dataset)) if indices is None else np.asarray(indices)
    if rows.size == 0:
        raise InsufficientDataError("No samples to evaluate on")

    features = dataset.features[rows]
    latencies, powers = dataset.latencies[rows], dataset.powers[rows]
    predicted_latency = estimator.latency_head.predict(features)
    predicted_power = estimator.power_head.predict(features)
    caps = _caps_of(dataset) if caps is None else caps
    buckets = estimator.latency_buckets, estimator.power_buckets
    return EstimatorMetrics(
        latency_accuracy=float(np.mean(predicted_latency == buckets[0].classify_many(latencies))),
        power_accuracy=float(np.mean(predicted_power == buckets[1].classify_many(powers))),
        latency_spearman=_spearman(predicted_latency, latencies),
        power_spearman=_spearman(predicted_power, powers),
        feasibility_safety=feasibility_safety(predicted_power, powers, buckets[1], caps),
        n_train=n_train,
        n_test=int(rows.size),
    )


def train(
    dataset: TrainingDataset,
    n_classes: int = DEFAULT_CLASSES,
    split_fraction: float = DEFAULT_SPLIT,
    *,
    seed: int = 0,
    device: Optional[Device] = None,
    min_per_class: int = MIN_SAMPLES_PER_CLASS,
    caps: Optional[Sequence[float]] = None,
) -> Estimator:
    """
    Fit one classifier per target on the training split and score both on the
    held-out split.

    Buckets are fitted on the training targets; training labels come from rank
    so class populations are equal within one sample.
    """
    if not 0 < split_fraction < 1:
        raise ConfigurationError(f"split_fraction must be in (0, 1), got {split_fraction}")

    device = device or default_device()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    cut = int(round(split_fraction * len(dataset)))
    train_idx, test_idx = order[:cut], order[cut:]
    if train_idx.size < n_classes * min_per_class:
        raise InsufficientDataError(
            f"{train_idx.size} training samples cannot give {min_per_class} per class "
            f"for {n_classes} classes"
        )
    if test_idx.size == 0:
        raise InsufficientDataError("Held-out split is empty")

    features = dataset.features
    latencies, powers = dataset.latencies, dataset.powers

    latency_buckets = fit_buckets(latencies[train_idx], n_classes)
    power_buckets = fit_buckets(powers[train_idx], n_classes)
    latency_labels = rank_labels(latencies[train_idx], n_classes)
    power_labels = rank_labels(powers[train_idx], n_classes)

    logger.info(f"Training {n_classes}-class heads on {train_idx.size} samples")
    latency_head = _head(seed).fit(features[train_idx], latency_labels)
    power_head = _head(seed).fit(features[train_idx], power_labels)

    estimator = Estimator(latency_buckets, power_buckets, latency_head, power_head, device)
    metrics = evaluate(estimator, dataset, test_idx, caps=caps, n_train=int(train_idx.size))
    estimator.metrics = metrics
    logger.info(
        f"Held-out metrics: latency acc {metrics.latency_accuracy:.3f} rho {metrics.latency_spearman:.3f}, "
        f"power acc {metrics.power_accuracy:.3f} rho {metrics.power_spearman:.3f}, "
        f"feasibility safety {metrics.feasibility_safety:.3f}"
    )
    return estimator
