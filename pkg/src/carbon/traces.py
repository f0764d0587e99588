"""
Synthetic week-style CI traces
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from src.carbon.intensity import CiTrace
from src.extractors.trace_extractor import TraceExtractor
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger
from src.validators.trace_validator import TraceValidator

logger = setup_logger(__name__)

SECONDS_PER_DAY = 86400.0
TRACE_STEP_S = 900.0


@dataclass(frozen=True)
class TraceProfile:
    """CI band, diurnal swing and noise of one week-style trace"""

    name: str
    low: float
    high: float
    amplitude: float  # diurnal swing as a multiple of the band half-width
    noise: float  # noise std as a fraction of the band half-width
    default_days: int = 5


TRACE_PROFILES: Dict[str, TraceProfile] = {
    # high variability
    "week1": TraceProfile("week1", 200.0, 500.0, amplitude=1.15, noise=0.10),
    # low variability: narrow band, gentle swing
    "week2": TraceProfile("week2", 450.0, 550.0, amplitude=1.05, noise=0.15),
    # high variability
    "week3": TraceProfile("week3", 250.0, 600.0, amplitude=1.15, noise=0.10),
}


def trace_profile(name: str) -> TraceProfile:
    if name not in TRACE_PROFILES:
        raise ConfigurationError(f"Unknown trace profile '{name}'; known: {sorted(TRACE_PROFILES)}")
    return TRACE_PROFILES[name]


def generate_trace(
    profile: TraceProfile, days: int, seed: int, step: float = TRACE_STEP_S
) -> CiTrace:
    """
    Diurnal sinusoid plus seeded noise, clipped to the profile's band.

    Emits days + 1 days of samples (both ends included) so the day-ahead
    forecast stays covered through the last simulated day. CI bottoms out
    around midday and peaks around midnight; the swing is wider than the band
    so both bounds are reached every day.
    """
    if days < 1:
        raise ConfigurationError("days must be >= 1")

    rng = np.random.default_rng(seed)
    total_days = days + 1
    timestamps = np.arange(0.0, total_days * SECONDS_PER_DAY + step / 2, step)
    mid = (profile.low + profile.high) / 2
    half = (profile.high - profile.low) / 2

    day_index = np.minimum((timestamps // SECONDS_PER_DAY).astype(int), total_days - 1)
    daily_swing = profile.amplitude * rng.uniform(1.0, 1.1, size=total_days)
    daily_phase = rng.normal(0.0, 0.03, size=total_days)

    fraction_of_day = timestamps / SECONDS_PER_DAY
    shape = np.cos(2 * np.pi * (fraction_of_day + daily_phase[day_index]))
    noise = rng.normal(0.0, profile.noise * half, size=timestamps.size)
    values = np.clip(mid + half * daily_swing[day_index] * shape + noise, profile.low, profile.high)

    logger.info(
        f"Generated {profile.name} trace: {timestamps.size} samples over {total_days} days, "
        f"CI in [{values.min():.1f}, {values.max():.1f}]"
    )
    return CiTrace(timestamps, np.round(values, 2), name=profile.name)


def load_trace(path: Union[str, Path]) -> CiTrace:
    """Read and validate a trace CSV (timestamp_seconds, ci_gco2_per_kwh)"""
    records = TraceExtractor(path).run()
    valid = TraceValidator().check(records)
    frame = pd.DataFrame(valid, columns=["timestamp_seconds", "ci_gco2_per_kwh"])
    return CiTrace.from_frame(frame, name=Path(path).stem)


def extend_trace(trace: CiTrace, end: float) -> CiTrace:
    """Hold the last value out to end so day-ahead forecasts stay covered"""
    if trace.end_time >= end:
        return trace
    return CiTrace(
        np.append(trace.timestamps, end), np.append(trace.values, trace.values[-1]), name=trace.name
    )
