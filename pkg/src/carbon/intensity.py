"""
Grid carbon intensity: energy-mix blending and CI traces
"""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.utils.errors import ConfigurationError, TraceCoverageError

# gCO2/kWh per generation source
STANDARD_EMISSION_FACTORS: Dict[str, float] = {
    "coal": 820.0,
    "oil": 650.0,
    "natural_gas": 490.0,
    "hydro": 24.0,
    "nuclear": 12.0,
    "wind": 11.0,
}


@dataclass(frozen=True)
class EnergySource:
    name: str
    energy: float  # kWh
    emission_factor: float  # gCO2/kWh

    def __post_init__(self):
        if self.energy < 0:
            raise ConfigurationError(f"{self.name}: energy must be >= 0")
        if self.emission_factor < 0:
            raise ConfigurationError(f"{self.name}: emission_factor must be >= 0")


def mix_ci(sources: Sequence[EnergySource]) -> float:
    """Energy-weighted mean emission factor of a generation mix"""
    total = sum(source.energy for source in sources)
    if total <= 0:
        raise ConfigurationError("Energy mix has zero total energy")
    return sum(source.energy * source.emission_factor for source in sources) / total


@dataclass(frozen=True)
class CiSample:
    timestamp: float  # seconds since scenario start
    ci: float  # gCO2/kWh


@dataclass(frozen=True, eq=False)
class CiTrace:
    """Piecewise-constant CI: each sample holds until the next one"""

    timestamps: np.ndarray
    values: np.ndarray
    name: str = field(default="trace")

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if timestamps.ndim != 1 or timestamps.shape != values.shape:
            raise ConfigurationError("CI trace needs matching 1-d timestamp and value arrays")
        if timestamps.size == 0:
            raise ConfigurationError("CI trace has no samples")
        if np.any(np.diff(timestamps) <= 0):
            raise ConfigurationError("CI trace timestamps must be strictly increasing")
        if np.any(values < 0):
            raise ConfigurationError("CI values must be >= 0")
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_samples(cls, samples: Sequence[CiSample], name: str = "trace") -> "CiTrace":
        return cls(
            np.array([sample.timestamp for sample in samples], dtype=float),
            np.array([sample.ci for sample in samples], dtype=float),
            name=name,
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame, name: str = "trace") -> "CiTrace":
        return cls(
            df["timestamp_seconds"].to_numpy(dtype=float),
            df["ci_gco2_per_kwh"].to_numpy(dtype=float),
            name=name,
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"timestamp_seconds": self.timestamps, "ci_gco2_per_kwh": self.values}
        )

    def samples(self) -> List[CiSample]:
        return [CiSample(float(t), float(v)) for t, v in zip(self.timestamps, self.values)]

    @property
    def start_time(self) -> float:
        return float(self.timestamps[0])

    @property
    def end_time(self) -> float:
        return float(self.timestamps[-1])

    def covers(self, start: float, end: float) -> bool:
        return self.start_time <= start and end <= self.end_time

    def ci_at(self, time: float) -> float:
        if time < self.start_time:
            raise TraceCoverageError(f"{self.name} starts at {self.start_time}s, asked for {time}s")
        index = int(np.searchsorted(self.timestamps, time, side="right")) - 1
        return float(self.values[index])

    def window(self, start: float, end: float) -> "CiTrace":
        """Samples in effect during [start, end], the first re-stamped at start"""
        if not self.covers(start, end):
            raise TraceCoverageError(
                f"{self.name} covers [{self.start_time}, {self.end_time}]s, "
                f"window [{start}, {end}]s requested"
            )
        inside = (self.timestamps > start) & (self.timestamps <= end)
        timestamps = np.concatenate(([start], self.timestamps[inside]))
        values = np.concatenate(([self.ci_at(start)], self.values[inside]))
        return CiTrace(timestamps, values, name=self.name)
