"""
Candidate scoring backed by the oracle or by a trained estimator
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence

from src.device.hardware import Device, default_device
from src.device.oracle import EvaluationResult, oracle_evaluate
from src.estimator.model import ClassPrediction, Estimator
from src.search.space import SearchPoint
from src.search.value import NEG_INF, ValueWeights, value

# scale of the measured score: 100 ms of mean latency weighs like 2.6 W
LATENCY_UNIT_MS = 100.0
POWER_UNIT_W = 2.6


@dataclass(frozen=True)
class Evaluation:
    point: SearchPoint
    value: float
    power: float  # tie-break; watts for the oracle, power class for the estimator
    result: Optional[EvaluationResult] = None
    prediction: Optional[ClassPrediction] = None


class Evaluator(ABC):
    name = "evaluator"

    def __init__(self):
        self.calls = 0

    def evaluate(self, points: Sequence[SearchPoint], weights: ValueWeights) -> List[Evaluation]:
        self.calls += len(points)
        return self._evaluate(points, weights)

    @abstractmethod
    def _evaluate(self, points: Sequence[SearchPoint], weights: ValueWeights) -> List[Evaluation]:
        pass


class OracleEvaluator(Evaluator):
    """-w_latency * latency / unit - w_power * power / unit, -inf above the cap"""

    name = "oracle"

    def __init__(
        self,
        device: Optional[Device] = None,
        latency_unit: float = LATENCY_UNIT_MS,
        power_unit: float = POWER_UNIT_W,
    ):
        super().__init__()
        self.device = device or default_device()
        self.latency_unit = latency_unit
        self.power_unit = power_unit

    def _evaluate(self, points: Sequence[SearchPoint], weights: ValueWeights) -> List[Evaluation]:
        evaluations = []
        for point in points:
            result = oracle_evaluate(point.mapping, point.mode, self.device)
            if weights.power_cap is not None and not result.within_cap(weights.power_cap):
                score = NEG_INF
            else:
                score = -(
                    weights.w_latency * result.mean_latency / self.latency_unit
                    + weights.w_power * result.total_power / self.power_unit
                )
            evaluations.append(Evaluation(point, score, result.total_power, result=result))
        return evaluations


class EstimatorEvaluator(Evaluator):
    """Class predictions scored by the value function"""

    name = "estimator"

    def __init__(self, estimator: Estimator):
        super().__init__()
        self.estimator = estimator

    def class_weights(self, weights: ValueWeights) -> ValueWeights:
        """Fill in the class count and the threshold class implied by the power cap"""
        threshold = weights.power_threshold_class
        if threshold is None and weights.power_cap is not None:
            threshold = self.estimator.power_threshold_class(weights.power_cap)
        return ValueWeights(
            w_latency=weights.w_latency,
            w_power=weights.w_power,
            power_threshold_class=threshold,
            power_cap=weights.power_cap,
            n_classes=self.estimator.n_classes,
        )

    def _evaluate(self, points: Sequence[SearchPoint], weights: ValueWeights) -> List[Evaluation]:
        weights = self.class_weights(weights)
        predictions = self.estimator.predict_many([(p.mapping, p.mode) for p in points])
        return [
            Evaluation(point, value(prediction, weights), float(prediction.power_class), prediction=prediction)
            for point, prediction in zip(points, predictions)
        ]
