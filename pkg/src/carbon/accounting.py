"""
Energy, emissions and carbon-delay accounting
"""
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from src.carbon.intensity import CiTrace
from src.utils.errors import ConfigurationError

JOULES_PER_KWH = 3.6e6


@dataclass(frozen=True)
class EmissionsLedger:
    energy_kwh: float = 0.0
    emissions_g: float = 0.0
    requests: float = 0.0  # inferences served
    latency_ms_total: float = 0.0  # sum of latency over served inferences

    @property
    def mean_latency_ms(self) -> float:
        return self.latency_ms_total / self.requests if self.requests > 0 else 0.0

    def merge(self, other: "EmissionsLedger") -> "EmissionsLedger":
        return EmissionsLedger(
            energy_kwh=self.energy_kwh + other.energy_kwh,
            emissions_g=self.emissions_g + other.emissions_g,
            requests=self.requests + other.requests,
            latency_ms_total=self.latency_ms_total + other.latency_ms_total,
        )


def accrue(power: float, duration: float, ci: float, ledger: EmissionsLedger) -> EmissionsLedger:
    """Add power (W) held for duration (s) at ci (gCO2/kWh)"""
    if power < 0 or duration < 0:
        raise ConfigurationError("power and duration must be >= 0")
    if duration == 0:
        return ledger
    energy = power * duration / JOULES_PER_KWH
    return replace(
        ledger,
        energy_kwh=ledger.energy_kwh + energy,
        emissions_g=ledger.emissions_g + energy * ci,
    )


def accrue_requests(
    latencies_ms: Sequence[float], duration: float, frame_interval_ms: float, ledger: EmissionsLedger
) -> EmissionsLedger:
    """Each running service serves duration / frame_interval inferences at its latency"""
    if duration <= 0 or not latencies_ms:
        return ledger
    per_service = duration * 1000.0 / frame_interval_ms
    return replace(
        ledger,
        requests=ledger.requests + per_service * len(latencies_ms),
        latency_ms_total=ledger.latency_ms_total + per_service * float(sum(latencies_ms)),
    )


def cdp(ledger: Union[EmissionsLedger, float], mean_latency_ms: Optional[float] = None) -> float:
    """
    Carbon-delay product: gCO2 x seconds. A ledger supplies its emissions and,
    unless one is given, its request-weighted mean latency.
    """
    if isinstance(ledger, EmissionsLedger):
        emissions = ledger.emissions_g
        if mean_latency_ms is None:
            mean_latency_ms = ledger.mean_latency_ms
    else:
        emissions = float(ledger)
    if mean_latency_ms is None:
        raise ConfigurationError("cdp needs a mean latency when given bare emissions")
    return emissions * mean_latency_ms / 1000.0


def integrate_emissions(
    intervals: Sequence[Tuple[float, float, float]], trace: CiTrace, step: float = 10.0
) -> float:
    """
    Independent emissions estimate: trapezoidal integral of power x CI on a
    fine grid over (start, end, power) intervals.
    """
    total = 0.0
    for start, end, power in intervals:
        if end <= start:
            continue
        points = max(2, int(np.ceil((end - start) / step)) + 1)
        grid = np.linspace(start, end, points)
        # CI holds until the next sample, so the end point reads the value still in effect
        grid[-1] = np.nextafter(end, start)
        index = np.searchsorted(trace.timestamps, grid, side="right") - 1
        grid_ci = trace.values[np.clip(index, 0, None)]
        total += trapezoid(power * grid_ci, grid) / JOULES_PER_KWH
    return total
