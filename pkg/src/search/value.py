"""
Weighted latency/power value of a candidate with the power filter
"""
from dataclasses import dataclass
from typing import Optional

from src.estimator.model import ClassPrediction
from src.utils.errors import ConfigurationError

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ValueWeights:
    """
    w_latency and w_power weigh the two objectives. power_threshold_class is
    the class image of the power cap for estimator scores; power_cap (W) is the
    cap itself for measured scores. None disables the filter.
    """

    w_latency: float = 1.0
    w_power: float = 0.25
    power_threshold_class: Optional[int] = None
    power_cap: Optional[float] = None
    n_classes: int = 10

    def __post_init__(self):
        if self.w_latency < 0 or self.w_power < 0:
            raise ConfigurationError("Value weights must be non-negative")
        if self.w_latency == 0 and self.w_power == 0:
            raise ConfigurationError("Value weights must not both be zero")
        if self.n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")


def value(prediction: ClassPrediction, weights: ValueWeights) -> float:
    """
    w_latency * (N - 1 - latency_class) - w_power * power_class, so larger is
    better on both axes; -inf when the power class is above the threshold class.
    """
    threshold = weights.power_threshold_class
    if threshold is not None and prediction.power_class > threshold:
        return NEG_INF
    return (
        weights.w_latency * (weights.n_classes - 1 - prediction.latency_class)
        - weights.w_power * prediction.power_class
    )


def is_feasible(score: float) -> bool:
    return score > NEG_INF
