"""
24-hour CI forecasts over a trace
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.carbon.intensity import CiTrace
from src.utils.errors import ConfigurationError

FORECAST_HORIZON_S = 86400.0


@dataclass(frozen=True, eq=False)
class CiForecast:
    issued_at: float
    horizon: CiTrace
    ci_min_day: float
    ci_max_day: float
    source: str = field(default="perfect")

    def __post_init__(self):
        if self.ci_min_day > self.ci_max_day:
            raise ConfigurationError("Forecast minimum exceeds its maximum")

    @property
    def span(self) -> float:
        return self.ci_max_day - self.ci_min_day

    @classmethod
    def from_horizon(cls, issued_at: float, horizon: CiTrace, source: str) -> "CiForecast":
        return cls(
            issued_at=issued_at,
            horizon=horizon,
            ci_min_day=float(horizon.values.min()),
            ci_max_day=float(horizon.values.max()),
            source=source,
        )


class Forecaster(ABC):
    """Turns a trace and the current time into a day-ahead forecast"""

    name = "forecaster"

    def __init__(self, horizon_s: float = FORECAST_HORIZON_S):
        self.horizon_s = horizon_s

    @abstractmethod
    def forecast(self, trace: CiTrace, now: float) -> CiForecast:
        pass


class PerfectForecaster(Forecaster):
    """Reads the future straight from the trace"""

    name = "perfect"

    def forecast(self, trace: CiTrace, now: float) -> CiForecast:
        return CiForecast.from_horizon(now, trace.window(now, now + self.horizon_s), self.name)


class NoisyForecaster(Forecaster):
    """Perfect foresight with seeded multiplicative noise on every horizon sample"""

    name = "noisy"

    def __init__(self, noise: float = 0.05, seed: int = 0, horizon_s: float = FORECAST_HORIZON_S):
        super().__init__(horizon_s)
        if noise < 0:
            raise ConfigurationError("Forecast noise must be >= 0")
        self.noise = noise
        self.seed = seed

    def forecast(self, trace: CiTrace, now: float) -> CiForecast:
        horizon = trace.window(now, now + self.horizon_s)
        # noise depends only on (seed, issue time) so forecasts are reproducible
        rng = np.random.default_rng([self.seed, int(now)])
        factors = 1.0 + rng.normal(0.0, self.noise, size=horizon.values.size)
        noisy = np.clip(horizon.values * factors, 0.0, None)
        return CiForecast.from_horizon(now, CiTrace(horizon.timestamps, noisy, horizon.name), self.name)


def forecast(trace: CiTrace, now: float, forecaster: Optional[Forecaster] = None) -> CiForecast:
    """Day-ahead forecast at now; TraceCoverageError when the trace ends too early"""
    return (forecaster or PerfectForecaster()).forecast(trace, now)
