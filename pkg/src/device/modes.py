"""
Operating-mode lookup table
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from src.extractors.yaml_extractor import YamlExtractor
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger
from src.validators.mode_validator import ModeValidator

logger = setup_logger(__name__)


@dataclass(frozen=True)
class OperatingMode:
    """Hardware configuration tuple with its power cap"""

    mode_id: int
    active_cores: int
    cpu_freq: float  # GHz
    gpu_freq: float  # GHz
    mem_freq: float  # GHz
    power_cap: float  # W

    def __post_init__(self):
        if self.active_cores < 1:
            raise ConfigurationError(f"Mode {self.mode_id}: active_cores must be >= 1")
        if min(self.cpu_freq, self.gpu_freq, self.mem_freq) <= 0:
            raise ConfigurationError(f"Mode {self.mode_id}: frequencies must be positive")
        if self.power_cap <= 0:
            raise ConfigurationError(f"Mode {self.mode_id}: power_cap must be positive")

    def to_record(self) -> Dict[str, Any]:
        return {
            "mode": self.mode_id,
            "cores": self.active_cores,
            "f_cpu_ghz": self.cpu_freq,
            "f_gpu_ghz": self.gpu_freq,
            "f_mem_ghz": self.mem_freq,
            "p_max_w": self.power_cap,
        }


# Built-in table: cores, clocks and power cap per mode
DEFAULT_MODE_TABLE: List[Dict[str, Any]] = [
    {"mode": 1, "cores": 8, "f_cpu_ghz": 2.2, "f_gpu_ghz": 1.3, "f_mem_ghz": 2.1, "p_max_w": 30.0},
    {"mode": 2, "cores": 6, "f_cpu_ghz": 2.2, "f_gpu_ghz": 1.3, "f_mem_ghz": 2.1, "p_max_w": 26.0},
    {"mode": 3, "cores": 4, "f_cpu_ghz": 2.2, "f_gpu_ghz": 1.3, "f_mem_ghz": 2.1, "p_max_w": 22.0},
    {"mode": 4, "cores": 8, "f_cpu_ghz": 1.8, "f_gpu_ghz": 0.828, "f_mem_ghz": 2.1, "p_max_w": 16.0},
    {"mode": 5, "cores": 6, "f_cpu_ghz": 1.8, "f_gpu_ghz": 0.828, "f_mem_ghz": 2.1, "p_max_w": 13.0},
    {"mode": 6, "cores": 4, "f_cpu_ghz": 1.8, "f_gpu_ghz": 0.828, "f_mem_ghz": 2.1, "p_max_w": 11.0},
    {"mode": 7, "cores": 8, "f_cpu_ghz": 1.2, "f_gpu_ghz": 0.675, "f_mem_ghz": 1.2, "p_max_w": 8.0},
    {"mode": 8, "cores": 6, "f_cpu_ghz": 1.2, "f_gpu_ghz": 0.675, "f_mem_ghz": 1.2, "p_max_w": 6.0},
]


def load_mode_lut(config: Dict[str, Any]) -> List[OperatingMode]:
    """
    Validate a {"modes": [...]} mapping and build the LUT.

    Returns modes sorted by descending power cap, so index 0 is mode 1.
    Raises ConfigurationError for fewer than 2 modes, duplicate ids or power
    caps that do not strictly decrease with the mode id.
    """
    rows = config.get("modes") if isinstance(config, dict) else None
    if not isinstance(rows, list):
        raise ConfigurationError("Mode config needs a 'modes' list")

    ModeValidator().check(rows)
    modes = [
        OperatingMode(
            mode_id=int(row["mode"]),
            active_cores=int(row["cores"]),
            cpu_freq=float(row["f_cpu_ghz"]),
            gpu_freq=float(row["f_gpu_ghz"]),
            mem_freq=float(row["f_mem_ghz"]),
            power_cap=float(row["p_max_w"]),
        )
        for row in rows
    ]
    return sorted(modes, key=lambda mode: -mode.power_cap)


def default_mode_lut() -> List[OperatingMode]:
    return load_mode_lut({"modes": DEFAULT_MODE_TABLE})


def load_mode_file(path: Optional[Union[str, Path]] = None) -> List[OperatingMode]:
    """Read operating_modes.yaml; the built-in table when no path is given"""
    if path is None:
        return default_mode_lut()

    lut = load_mode_lut(YamlExtractor(path, source_name="modes").run())
    logger.info(f"Loaded {len(lut)} operating modes from {path}")
    return lut


def mode_by_id(lut: Sequence[OperatingMode], mode_id: int) -> OperatingMode:
    for mode in lut:
        if mode.mode_id == mode_id:
            return mode
    raise ConfigurationError(f"Mode {mode_id} is not in the LUT {[m.mode_id for m in lut]}")

