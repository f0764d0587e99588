"""
Turns simulated intervals into per-day report rows and policy comparisons
"""
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.carbon.accounting import JOULES_PER_KWH
from src.carbon.traces import SECONDS_PER_DAY
from src.runtime.state import BreachRecord, IntervalRecord
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger

DAILY_COLUMNS = [
    "day",
    "energy_kwh",
    "emissions_g",
    "mean_power_w",
    "mean_latency_ms",
    "cdp_g_s",
    "requests",
    "power_breach_s",
    "latency_violation_s",
    "breaches",
]
COMPARED_METRICS = {
    "mean_power_w": "power",
    "mean_latency_ms": "latency",
    "emissions_g": "emissions",
    "cdp_g_s": "cdp",
}


class ReportTransformer:
    def __init__(self, frame_interval_ms: float = 1000.0, max_level: int = 3):
        self.frame_interval_ms = frame_interval_ms
        self.max_level = max_level
        self.logger = setup_logger("transformer.report")

    def transform_record(self, interval: IntervalRecord) -> Dict[str, float]:
        """One interval as a flat row; requests count one inference per frame per service"""
        per_service = interval.duration * 1000.0 / self.frame_interval_ms
        energy = interval.power * interval.duration / JOULES_PER_KWH
        row = {
            "start": interval.start,
            "end": interval.end,
            "day": int(interval.start // SECONDS_PER_DAY),
            "duration_s": interval.duration,
            "power_w": interval.power,
            "ci": interval.ci,
            "energy_kwh": energy,
            "emissions_g": energy * interval.ci,
            "requests": per_service * len(interval.latencies),
            "latency_ms_total": per_service * sum(interval.latencies.values()),
            "cap_mode_id": interval.cap_mode_id,
            "mode_id": interval.mode_id,
            "power_breach_s": interval.duration if interval.power_breach else 0.0,
            "latency_violation_s": interval.duration if interval.latency_violation else 0.0,
        }
        for level in range(1, self.max_level + 1):
            count = sum(1 for value in interval.levels.values() if value == level)
            row[f"level_{level}_requests"] = per_service * count
        return row

    def intervals_to_frame(self, intervals: Sequence[IntervalRecord]) -> pd.DataFrame:
        rows = [self.transform_record(interval) for interval in intervals if interval.duration > 0]
        return pd.DataFrame(rows)

    def level_columns(self) -> List[str]:
        return [f"level_{level}_share" for level in range(1, self.max_level + 1)]

    def daily_rows(
        self, frame: pd.DataFrame, breaches: Sequence[BreachRecord], days: int
    ) -> pd.DataFrame:
        """Per-day energy, emissions, mean power and latency, CDP and quality shares"""
        level_requests = [f"level_{level}_requests" for level in range(1, self.max_level + 1)]
        summed = [
            "duration_s",
            "energy_kwh",
            "emissions_g",
            "requests",
            "latency_ms_total",
            "power_breach_s",
            "latency_violation_s",
        ] + level_requests

        if frame.empty:
            daily = pd.DataFrame(0.0, index=range(days), columns=summed)
        else:
            daily = frame.groupby("day")[summed].sum().reindex(range(days), fill_value=0.0)

        requests = daily["requests"].to_numpy()
        safe_requests = np.where(requests > 0, requests, 1.0)
        duration = daily["duration_s"].to_numpy()
        safe_duration = np.where(duration > 0, duration, 1.0)

        result = pd.DataFrame({"day": np.arange(days)})
        result["energy_kwh"] = daily["energy_kwh"].to_numpy()
        result["emissions_g"] = daily["emissions_g"].to_numpy()
        result["mean_power_w"] = np.where(
            duration > 0, result["energy_kwh"].to_numpy() * JOULES_PER_KWH / safe_duration, 0.0
        )
        result["mean_latency_ms"] = np.where(
            requests > 0, daily["latency_ms_total"].to_numpy() / safe_requests, 0.0
        )
        result["cdp_g_s"] = result["emissions_g"] * result["mean_latency_ms"] / 1000.0
        result["requests"] = requests
        result["power_breach_s"] = daily["power_breach_s"].to_numpy()
        result["latency_violation_s"] = daily["latency_violation_s"].to_numpy()

        breach_days = pd.Series([int(b.time // SECONDS_PER_DAY) for b in breaches], dtype=int)
        result["breaches"] = (
            breach_days.value_counts().reindex(range(days), fill_value=0).to_numpy().astype(int)
        )
        for level, column in zip(level_requests, self.level_columns()):
            result[column] = np.where(requests > 0, daily[level].to_numpy() / safe_requests, 0.0)

        self.logger.debug(f"Built {days} daily rows from {len(frame)} intervals")
        return result[DAILY_COLUMNS + self.level_columns()]

    def level_distribution(self, frame: pd.DataFrame) -> Dict[str, float]:
        """Share of all served requests per quality level"""
        total = float(frame["requests"].sum()) if not frame.empty else 0.0
        shares = {}
        for level in range(1, self.max_level + 1):
            served = float(frame[f"level_{level}_requests"].sum()) if not frame.empty else 0.0
            shares[str(level)] = served / total if total > 0 else 0.0
        return shares

    def mode_residency(self, frame: pd.DataFrame) -> Dict[str, Dict[str, float]]:
        """Seconds spent under each cap mode and each operating mode"""
        if frame.empty:
            return {"cap_mode": {}, "operating_mode": {}}
        return {
            "cap_mode": {
                str(k): float(v) for k, v in frame.groupby("cap_mode_id")["duration_s"].sum().items()
            },
            "operating_mode": {
                str(k): float(v) for k, v in frame.groupby("mode_id")["duration_s"].sum().items()
            },
        }


def normalize_comparison(daily_by_policy: Dict[str, pd.DataFrame]) -> pd.DataFrame:
    """
    Per-day power, latency, emissions and CDP of every policy divided by the
    first policy's. A zero baseline day yields NaN.
    """
    if len(daily_by_policy) < 2:
        raise ConfigurationError("A comparison needs at least two policies")

    labels = list(daily_by_policy)
    baseline = daily_by_policy[labels[0]]
    for label in labels[1:]:
        if len(daily_by_policy[label]) != len(baseline):
            raise ConfigurationError(
                f"Policy {label} covers {len(daily_by_policy[label])} days, "
                f"{labels[0]} covers {len(baseline)}"
            )

    frames = []
    for label in labels:
        daily = daily_by_policy[label]
        frame = pd.DataFrame({"day": daily["day"].to_numpy(), "policy": label})
        for column, name in COMPARED_METRICS.items():
            base = baseline[column].to_numpy(dtype=float)
            values = daily[column].to_numpy(dtype=float)
            frame[name] = values
            with np.errstate(divide="ignore", invalid="ignore"):
                frame[f"{name}_normalized"] = np.where(base > 0, values / base, np.nan)
        frames.append(frame)
    combined = pd.concat(frames, ignore_index=True)
    return combined.sort_values("day", kind="stable").reset_index(drop=True)
