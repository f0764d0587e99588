"""
Compute components and the device description used by the oracle
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from src.device.modes import OperatingMode
from src.extractors.yaml_extractor import YamlExtractor
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger
from src.validators.config_validator import DeviceValidator

logger = setup_logger(__name__)


class ComponentKind(str, Enum):
    CPU = "cpu"
    GPU = "gpu"


@dataclass(frozen=True)
class ComputeComponent:
    component_id: str
    kind: ComponentKind
    peak_throughput: float  # GFLOP/s at reference_frequency with all cores
    reference_frequency: float  # GHz
    per_core: bool = False
    dynamic_share: float = 0.0  # fraction of the device's dynamic power budget

    def __post_init__(self):
        if self.peak_throughput <= 0:
            raise ConfigurationError(f"{self.component_id}: peak_throughput must be positive")
        if self.reference_frequency <= 0:
            raise ConfigurationError(f"{self.component_id}: reference_frequency must be positive")

    def frequency(self, mode: OperatingMode) -> float:
        return mode.cpu_freq if self.kind is ComponentKind.CPU else mode.gpu_freq

    def core_factor(self, mode: OperatingMode, max_cores: int) -> float:
        return mode.active_cores / max_cores if self.per_core else 1.0


@dataclass(frozen=True)
class Device:
    """
    Heterogeneous edge server.

    Throughput of a component in a mode is peak * (f / f_ref) * (cores / max_cores
    for per-core clusters). Dynamic power at full use scales with (f / f_ref)**3
    and the active core share, normalised so an all-busy device at the reference
    frequencies draws reference_power.
    """

    components: Tuple[ComputeComponent, ...]
    max_cores: int = 8
    memory_bandwidth: float = 30.0  # GB/s at reference_mem_freq
    reference_mem_freq: float = 2.1  # GHz
    frame_interval: float = 1000.0  # ms between inferences of one service
    static_fraction: float = 0.2
    reference_power: float = 30.0  # W

    def __post_init__(self):
        ids = self.component_ids
        if not ids:
            raise ConfigurationError("Device has no compute components")
        if len(ids) != len(set(ids)):
            raise ConfigurationError(f"Duplicate component ids: {ids}")
        if not 0 <= self.static_fraction < 1:
            raise ConfigurationError("static_fraction must be in [0, 1)")

    @property
    def component_ids(self) -> Tuple[str, ...]:
        return tuple(component.component_id for component in self.components)

    def component(self, component_id: str) -> ComputeComponent:
        for component in self.components:
            if component.component_id == component_id:
                return component
        raise ConfigurationError(
            f"Unknown compute component '{component_id}'; device has {list(self.component_ids)}"
        )

    def index_of(self, component_id: str) -> int:
        return self.component_ids.index(component_id)

    def throughput(self, component_id: str, mode: OperatingMode) -> float:
        """Effective GFLOP/s, so MFLOPs / throughput is milliseconds"""
        component = self.component(component_id)
        return (
            component.peak_throughput
            * (component.frequency(mode) / component.reference_frequency)
            * component.core_factor(mode, self.max_cores)
        )

    def bandwidth(self, mode: OperatingMode) -> float:
        """GB/s, so MB / bandwidth is milliseconds"""
        return self.memory_bandwidth * mode.mem_freq / self.reference_mem_freq

    def static_power(self, mode: OperatingMode) -> float:
        return self.static_fraction * mode.power_cap

    def dynamic_power(self, component_id: str, mode: OperatingMode) -> float:
        """Power drawn by a fully busy component in this mode"""
        component = self.component(component_id)
        budget = (1.0 - self.static_fraction) * self.reference_power
        ratio = component.frequency(mode) / component.reference_frequency
        return component.dynamic_share * budget * ratio**3 * component.core_factor(mode, self.max_cores)

    def full_load_power(self, mode: OperatingMode) -> float:
        return self.static_power(mode) + sum(
            self.dynamic_power(component_id, mode) for component_id in self.component_ids
        )


@lru_cache(maxsize=1)
def default_device() -> Device:
    return Device(
        components=(
            ComputeComponent("cpu0", ComponentKind.CPU, 12.0, 2.2, per_core=True, dynamic_share=4 / 15),
            ComputeComponent("cpu1", ComponentKind.CPU, 12.0, 2.2, per_core=True, dynamic_share=4 / 15),
            ComputeComponent("gpu", ComponentKind.GPU, 60.0, 1.3, per_core=False, dynamic_share=7 / 15),
        )
    )


def device_from_config(config: Dict[str, Any]) -> Device:
    DeviceValidator().check_config(config)
    rows = config["components"]
    total_weight = sum(float(row["dynamic_weight"]) for row in rows)
    components = tuple(
        ComputeComponent(
            component_id=str(row["id"]),
            kind=ComponentKind(row["kind"]),
            peak_throughput=float(row["peak_gflops"]),
            reference_frequency=float(row["reference_freq_ghz"]),
            per_core=bool(row.get("per_core", False)),
            dynamic_share=float(row["dynamic_weight"]) / total_weight,
        )
        for row in rows
    )
    return Device(
        components=components,
        max_cores=int(config["max_cores"]),
        memory_bandwidth=float(config["memory_bandwidth_gbps"]),
        reference_mem_freq=float(config["reference_mem_freq_ghz"]),
        frame_interval=float(config["frame_interval_ms"]),
        static_fraction=float(config["static_fraction"]),
        reference_power=float(config["reference_power_w"]),
    )


def load_device(path: Optional[Union[str, Path]] = None) -> Device:
    if path is None:
        return default_device()
    device = device_from_config(YamlExtractor(path, source_name="device").run())
    logger.info(f"Loaded device with components {list(device.component_ids)} from {path}")
    return device
