"""
Deterministic latency/power oracle standing in for on-device measurement
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

from src.device.hardware import Device, default_device
from src.device.mapping import Mapping
from src.device.modes import OperatingMode

# power comparisons against a cap tolerate float rounding of the calibration
POWER_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EvaluationResult:
    latencies: Dict[str, float] = field(default_factory=dict)  # ms per service
    total_power: float = 0.0  # W
    utilization: Dict[str, float] = field(default_factory=dict)  # per component, [0, 1]
    mode_id: int = 0

    @property
    def mean_latency(self) -> float:
        if not self.latencies:
            return 0.0
        return sum(self.latencies.values()) / len(self.latencies)

    @property
    def max_latency(self) -> float:
        return max(self.latencies.values(), default=0.0)

    def within_cap(self, power_cap: float) -> bool:
        return self.total_power <= power_cap + POWER_TOLERANCE

    def latency_ratios(self, thresholds: Dict[str, float]) -> Dict[str, float]:
        """latency / threshold for every service with a threshold"""
        return {
            service_id: latency / thresholds[service_id]
            for service_id, latency in self.latencies.items()
            if service_id in thresholds
        }


def oracle_evaluate(
    mapping: Mapping, mode: OperatingMode, device: Optional[Device] = None
) -> EvaluationResult:
    """
    Measure a mapping under a mode.

    Every running service issues one inference per frame interval. A
    component's offered load U is its busy time per frame interval; each
    partition on it is slowed by max(1, U). Crossing to another component
    after a layer costs that layer's activation size over the memory bandwidth.
    Power is the mode's static floor plus each component's full-load dynamic
    power times min(1, U).
    """
    device = device or default_device()

    busy = {component_id: 0.0 for component_id in device.component_ids}
    segments = []
    for placement in mapping.placements:
        service_segments = []
        for start, end, component_id in placement.partitions():
            service_time = placement.model.segment_cost(start, end) / device.throughput(
                component_id, mode
            )
            busy[component_id] += service_time
            service_segments.append((end, component_id, service_time))
        segments.append((placement, service_segments))

    load = {component_id: busy[component_id] / device.frame_interval for component_id in busy}
    bandwidth = device.bandwidth(mode)

    latencies = {}
    for placement, service_segments in segments:
        latency = 0.0
        for i, (end, component_id, service_time) in enumerate(service_segments):
            latency += service_time * max(1.0, load[component_id])
            if i + 1 < len(service_segments) and service_segments[i + 1][1] != component_id:
                latency += placement.model.activations[end - 1] / bandwidth
        latencies[placement.service_id] = latency

    utilization = {component_id: min(1.0, value) for component_id, value in load.items()}
    power = device.static_power(mode) + sum(
        device.dynamic_power(component_id, mode) * utilization[component_id]
        for component_id in device.component_ids
    )
    return EvaluationResult(
        latencies=latencies, total_power=power, utilization=utilization, mode_id=mode.mode_id
    )
