"""
CI -> power-cap mode selection and the hysteresis gate
"""
from typing import Optional, Sequence

from src.carbon.forecast import CiForecast
from src.device.modes import OperatingMode
from src.utils.errors import ConfigurationError

HYSTERESIS_FRACTION = 0.10
# 0.1 * 300 is 30.000000000000004 in binary floating point
_GATE_TOLERANCE = 1e-9


def normalized_position(ci: float, forecast: CiForecast) -> float:
    """Where ci sits in the day's forecast range, clamped to [0, 1]"""
    if forecast.span <= 0:
        return 0.0
    position = (ci - forecast.ci_min_day) / forecast.span
    return min(1.0, max(0.0, position))


def ci_to_mode(ci: float, forecast: CiForecast, mode_lut: Sequence[OperatingMode]) -> OperatingMode:
    """
    Split [0, 1] into len(lut) equal bins mapped to modes in descending power
    cap order; the day's cleanest CI gets the highest cap. A flat forecast
    keeps the highest cap.
    """
    if not mode_lut:
        raise ConfigurationError("Mode LUT is empty")
    ordered = sorted(mode_lut, key=lambda mode: -mode.power_cap)
    position = normalized_position(ci, forecast)
    index = min(int(position * len(ordered)), len(ordered) - 1)
    return ordered[index]


def hysteresis_gate(
    last_applied_ci: Optional[float],
    new_ci: float,
    forecast: CiForecast,
    fraction: float = HYSTERESIS_FRACTION,
) -> bool:
    """Apply a new cap only when CI moved by at least fraction of the forecast range"""
    if last_applied_ci is None:
        return True
    if forecast.span <= 0:
        return False
    return abs(new_ci - last_applied_ci) + _GATE_TOLERANCE >= fraction * forecast.span
