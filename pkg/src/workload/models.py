"""
DNN models, mixed-quality families, services and workload schedules
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.utils.errors import ConfigurationError


@dataclass(frozen=True)
class LayerProfile:
    """Compute profile of one partitionable layer"""

    layer_id: int
    compute_cost: float  # MFLOPs
    activation_size: float  # MB sent when a partition boundary follows this layer

    def __post_init__(self):
        if self.compute_cost <= 0:
            raise ConfigurationError(f"Layer {self.layer_id}: compute_cost must be positive")
        if self.activation_size < 0:
            raise ConfigurationError(f"Layer {self.layer_id}: activation_size must be >= 0")


@dataclass(frozen=True)
class DnnModel:
    name: str
    layers: Tuple[LayerProfile, ...]
    accuracy: float
    quality_level: int = 1
    family_id: str = ""

    def __post_init__(self):
        if not self.layers:
            raise ConfigurationError(f"Model {self.name} has no layers")
        for expected, layer in enumerate(self.layers):
            if layer.layer_id != expected:
                raise ConfigurationError(
                    f"Model {self.name}: layer ids must be consecutive from 0, "
                    f"got {layer.layer_id} at position {expected}"
                )
        if not 0 <= self.accuracy <= 100:
            raise ConfigurationError(f"Model {self.name}: accuracy {self.accuracy} outside [0, 100]")
        if self.quality_level < 1:
            raise ConfigurationError(f"Model {self.name}: quality_level must be >= 1")

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    @cached_property
    def cost_prefix(self) -> np.ndarray:
        """prefix[i] = total cost of layers [0, i)"""
        costs = np.array([layer.compute_cost for layer in self.layers], dtype=float)
        return np.concatenate(([0.0], np.cumsum(costs)))

    @cached_property
    def activations(self) -> np.ndarray:
        return np.array([layer.activation_size for layer in self.layers], dtype=float)

    @property
    def total_cost(self) -> float:
        return float(self.cost_prefix[-1])

    def segment_cost(self, start: int, end: int) -> float:
        return float(self.cost_prefix[end] - self.cost_prefix[start])


@dataclass(frozen=True)
class ModelFamily:
    """Quality levels of one architecture, level 1 first"""

    family_id: str
    variants: Tuple[DnnModel, ...]

    def __post_init__(self):
        if not self.variants:
            raise ConfigurationError(f"Family {self.family_id} has no variants")
        levels = [variant.quality_level for variant in self.variants]
        if levels != list(range(1, len(self.variants) + 1)):
            raise ConfigurationError(
                f"Family {self.family_id}: quality levels must be 1..m without gaps, got {levels}"
            )
        for upper, lower in zip(self.variants, self.variants[1:]):
            if not lower.total_cost < upper.total_cost:
                raise ConfigurationError(
                    f"Family {self.family_id}: level {lower.quality_level} is not cheaper "
                    f"than level {upper.quality_level}"
                )
            if lower.accuracy > upper.accuracy:
                raise ConfigurationError(
                    f"Family {self.family_id}: level {lower.quality_level} is more accurate "
                    f"than level {upper.quality_level}"
                )

    @property
    def depth(self) -> int:
        return len(self.variants)

    def level(self, quality_level: int) -> DnnModel:
        if not 1 <= quality_level <= self.depth:
            raise ConfigurationError(
                f"Family {self.family_id} has no quality level {quality_level}"
            )
        return self.variants[quality_level - 1]

    def accuracy_drop(self, quality_level: int) -> float:
        """Accuracy lost by level k relative to the default model"""
        return self.variants[0].accuracy - self.level(quality_level).accuracy


@dataclass(frozen=True)
class ServiceSpec:
    service_id: str
    family: ModelFamily
    latency_threshold: float  # ms (L_max)
    accuracy_tolerance: float  # percentage points (epsilon)
    arrival_time: float  # simulation seconds
    departure_time: float

    def __post_init__(self):
        if self.latency_threshold <= 0:
            raise ConfigurationError(f"Service {self.service_id}: latency_threshold must be > 0")
        if self.accuracy_tolerance < 0:
            raise ConfigurationError(f"Service {self.service_id}: accuracy_tolerance must be >= 0")
        if not self.departure_time > self.arrival_time:
            raise ConfigurationError(
                f"Service {self.service_id}: departure_time must follow arrival_time"
            )

    def allowed_level(self, quality_level: int) -> bool:
        """A level is usable while its accuracy drop stays within tolerance"""
        if quality_level > self.family.depth:
            return False
        return self.family.accuracy_drop(quality_level) <= self.accuracy_tolerance + 1e-9

    def max_level(self) -> int:
        level = 1
        while self.allowed_level(level + 1):
            level += 1
        return level


@dataclass(frozen=True)
class WorkloadSchedule:
    services: Tuple[ServiceSpec, ...]
    seed: int
    max_concurrent: Optional[int] = None
    metadata: Dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ids = [service.service_id for service in self.services]
        if len(ids) != len(set(ids)):
            raise ConfigurationError("Workload schedule contains duplicate service ids")
        if self.max_concurrent is not None and self.peak_concurrency() > self.max_concurrent:
            raise ConfigurationError(
                f"Workload schedule exceeds its concurrency cap of {self.max_concurrent}"
            )

    def peak_concurrency(self) -> int:
        # departures sort before arrivals at the same instant
        edges: List[Tuple[float, int]] = []
        for service in self.services:
            edges.append((service.arrival_time, 1))
            edges.append((service.departure_time, -1))
        edges.sort()
        running = peak = 0
        for _, delta in edges:
            running += delta
            peak = max(peak, running)
        return peak

    def end_time(self) -> float:
        return max((service.departure_time for service in self.services), default=0.0)
