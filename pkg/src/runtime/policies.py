"""
Runtime policies: the carbon-aware manager and its baselines
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence

from src.carbon.forecast import CiForecast
from src.carbon.policy import ci_to_mode
from src.device.modes import OperatingMode, mode_by_id
from src.search.value import ValueWeights
from src.utils.errors import ConfigurationError


class PolicyKind(str, Enum):
    CARBON_AWARE = "carbon-aware"
    GREEDY_THROUGHPUT = "greedy-throughput"
    POWER_MIN = "power-min"
    STATIC = "static"


DEFAULT_WEIGHTS = {
    PolicyKind.CARBON_AWARE: ValueWeights(w_latency=1.0, w_power=0.25),
    PolicyKind.GREEDY_THROUGHPUT: ValueWeights(w_latency=1.0, w_power=0.0),
    PolicyKind.POWER_MIN: ValueWeights(w_latency=0.1, w_power=1.0),
    PolicyKind.STATIC: ValueWeights(w_latency=1.0, w_power=0.0),
}


@dataclass(frozen=True)
class Policy:
    """
    What the manager may change: the power cap (ci_aware), the searched
    modes, the value weights and whether quality levels move.
    """

    kind: PolicyKind
    weights: ValueWeights
    static_mode_id: Optional[int] = None
    upgrades: bool = True
    threshold_label: str = ""

    @property
    def ci_aware(self) -> bool:
        return self.kind is PolicyKind.CARBON_AWARE

    @property
    def mixed_quality(self) -> bool:
        return self.kind is PolicyKind.CARBON_AWARE

    @property
    def escalates_cap(self) -> bool:
        """Climb to the next higher cap when nothing fits the current one"""
        return self.kind is PolicyKind.POWER_MIN

    @property
    def label(self) -> str:
        if self.kind is PolicyKind.STATIC:
            return f"static:{self.static_mode_id}"
        if self.kind is PolicyKind.CARBON_AWARE and self.threshold_label:
            return f"{self.kind.value}-{self.threshold_label}"
        return self.kind.value

    def initial_cap_mode(self, mode_lut: Sequence[OperatingMode]) -> OperatingMode:
        ordered = sorted(mode_lut, key=lambda mode: -mode.power_cap)
        if self.kind is PolicyKind.STATIC:
            return mode_by_id(mode_lut, self.static_mode_id)
        if self.kind is PolicyKind.POWER_MIN:
            return ordered[-1]
        return ordered[0]

    def cap_mode(
        self, ci: float, forecast: CiForecast, mode_lut: Sequence[OperatingMode]
    ) -> OperatingMode:
        if self.ci_aware:
            return ci_to_mode(ci, forecast, mode_lut)
        return self.initial_cap_mode(mode_lut)

    def search_modes(
        self, cap_mode: OperatingMode, mode_lut: Sequence[OperatingMode]
    ) -> List[OperatingMode]:
        """Operating modes a search under this cap may deploy"""
        if self.ci_aware:
            return sorted(mode_lut, key=lambda mode: -mode.power_cap)
        return [cap_mode]

    def cap_candidates(self, mode_lut: Sequence[OperatingMode]) -> List[OperatingMode]:
        """Caps tried in order when the first yields nothing feasible"""
        if self.escalates_cap:
            return sorted(mode_lut, key=lambda mode: mode.power_cap)
        return [self.initial_cap_mode(mode_lut)]


def parse_policy(
    name: str,
    weights: Optional[ValueWeights] = None,
    *,
    upgrades: bool = True,
    threshold_label: str = "",
) -> Policy:
    """
    carbon-aware | greedy-throughput | power-min | static:<mode id>.
    Explicit weights apply to the carbon-aware policy only; baselines keep
    their own objective.
    """
    name = name.strip().lower()
    if name.startswith("static:"):
        try:
            mode_id = int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"Static policy needs an integer mode id, got '{name}'")
        return Policy(PolicyKind.STATIC, DEFAULT_WEIGHTS[PolicyKind.STATIC], mode_id, upgrades=False)

    try:
        kind = PolicyKind(name)
    except ValueError:
        known = [kind.value for kind in PolicyKind if kind is not PolicyKind.STATIC] + ["static:<m>"]
        raise ConfigurationError(f"Unknown policy '{name}'; known policies: {known}")

    if kind is PolicyKind.STATIC:
        raise ConfigurationError("Static policy needs a mode id, e.g. static:1")
    if kind is PolicyKind.CARBON_AWARE:
        return Policy(
            kind,
            weights or DEFAULT_WEIGHTS[kind],
            upgrades=upgrades,
            threshold_label=threshold_label,
        )
    return Policy(kind, DEFAULT_WEIGHTS[kind], upgrades=False)


def with_cap(weights: ValueWeights, cap_mode: OperatingMode) -> ValueWeights:
    return replace(weights, power_cap=cap_mode.power_cap)
