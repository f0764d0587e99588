"""
Simulation events, the future-event list and the mutable system state
"""
import heapq
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, List, Optional, Tuple

from src.carbon.accounting import EmissionsLedger
from src.device.mapping import Mapping
from src.device.modes import OperatingMode
from src.device.oracle import EvaluationResult
from src.workload.models import ServiceSpec

# measured latency above threshold by less than this is not a violation
LATENCY_TOLERANCE = 1e-9


class EventKind(IntEnum):
    """Value order is the tie-break order at equal times"""

    CI_UPDATE = 0
    DEPARTURE = 1
    ARRIVAL = 2
    MONITOR = 3


@dataclass(frozen=True, order=True)
class SimEvent:
    time: float
    kind: EventKind
    sequence: int
    service_id: Optional[str] = field(default=None, compare=False)


class EventQueue:
    """Future-event list ordered by (time, kind, insertion order)"""

    def __init__(self):
        self._queue: List[SimEvent] = []
        self._sequence = 0

    def schedule(self, time: float, kind: EventKind, service_id: Optional[str] = None) -> SimEvent:
        event = SimEvent(float(time), kind, self._sequence, service_id)
        self._sequence += 1
        heapq.heappush(self._queue, event)
        return event

    def pop(self) -> SimEvent:
        return heapq.heappop(self._queue)

    def peek_time(self) -> Optional[float]:
        return self._queue[0].time if self._queue else None

    def __len__(self) -> int:
        return len(self._queue)


@dataclass(frozen=True)
class BreachRecord:
    time: float
    kind: str  # power | latency | admission
    service_ids: Tuple[str, ...]
    detail: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "time": self.time,
            "kind": self.kind,
            "service_ids": list(self.service_ids),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"time": self.time, "kind": self.kind, **self.detail}


@dataclass(frozen=True)
class IntervalRecord:
    """System state held constant over [start, end)"""

    start: float
    end: float
    power: float
    ci: float
    cap_mode_id: int
    mode_id: int
    latencies: Dict[str, float]
    levels: Dict[str, int]
    power_breach: bool = False
    latency_violation: bool = False

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class SystemState:
    """
    cap_mode is the CI-derived power threshold; mode is the operating mode
    the search deployed under it.
    """

    cap_mode: OperatingMode
    mode: OperatingMode
    mapping: Mapping = field(default_factory=Mapping)
    services: Dict[str, ServiceSpec] = field(default_factory=dict)
    levels: Dict[str, int] = field(default_factory=dict)
    last_applied_ci: Optional[float] = None
    measurement: EvaluationResult = field(default_factory=EvaluationResult)
    ledger: EmissionsLedger = field(default_factory=EmissionsLedger)

    @property
    def power_cap(self) -> float:
        return self.cap_mode.power_cap

    def thresholds(self) -> Dict[str, float]:
        return {sid: spec.latency_threshold for sid, spec in self.services.items()}

    def violations(self) -> Dict[str, float]:
        """latency / threshold of every service over its threshold"""
        ratios = self.measurement.latency_ratios(self.thresholds())
        return {sid: ratio for sid, ratio in ratios.items() if ratio > 1.0 + LATENCY_TOLERANCE}

    def power_ok(self) -> bool:
        return self.measurement.within_cap(self.power_cap)

    def model_of(self, service_id: str):
        spec = self.services[service_id]
        return spec.family.level(self.levels[service_id])
