"""
Scenario files: trace, workload, thresholds, policy and search settings
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.carbon.forecast import FORECAST_HORIZON_S
from src.carbon.intensity import CiTrace
from src.carbon.traces import SECONDS_PER_DAY, extend_trace, generate_trace, load_trace, trace_profile
from src.device.hardware import Device, load_device
from src.device.modes import OperatingMode, load_mode_file
from src.extractors.yaml_extractor import YamlExtractor
from src.runtime.policies import DEFAULT_WEIGHTS, PolicyKind
from src.search.lamcts import SearchBudget
from src.search.value import ValueWeights
from src.utils.errors import ConfigurationError, TraceCoverageError
from src.utils.logger import setup_logger
from src.validators.config_validator import ScenarioValidator
from src.workload.generator import (
    INTENSITY_PRESETS,
    ServiceCatalog,
    generate_schedule,
    load_catalog,
)
from src.workload.models import WorkloadSchedule

logger = setup_logger(__name__)

THRESHOLDS_MS = {"relaxed": 2000.0, "strict": 500.0}
DEFAULT_MONITOR_PERIOD_S = 60.0
DEFAULT_MAX_PARTITIONS = 2


@dataclass(frozen=True)
class Scenario:
    name: str
    days: int
    seed: int
    intensity: str
    latency_threshold: float  # ms
    threshold_label: str = ""
    trace_profile: Optional[str] = None
    trace_path: Optional[Path] = None
    policy: str = "carbon-aware"
    weights: Optional[ValueWeights] = None
    budget: SearchBudget = field(default_factory=SearchBudget)
    max_partitions: int = DEFAULT_MAX_PARTITIONS
    monitor_period: float = DEFAULT_MONITOR_PERIOD_S
    upgrades: bool = True
    evaluator: str = "oracle"
    estimator_path: Optional[Path] = None
    quantiles: Optional[int] = None  # class count the loaded estimator must predict
    modes_path: Optional[Path] = None
    device_path: Optional[Path] = None
    catalog_path: Optional[Path] = None

    @property
    def duration(self) -> float:
        return self.days * SECONDS_PER_DAY

    def with_threshold(self, label: str) -> "Scenario":
        if label not in THRESHOLDS_MS:
            raise ConfigurationError(f"Unknown threshold preset '{label}'")
        return replace(self, latency_threshold=THRESHOLDS_MS[label], threshold_label=label)

    def with_quantiles(self, n_classes: int) -> "Scenario":
        if n_classes < 2:
            raise ConfigurationError(f"quantiles must be >= 2, got {n_classes}")
        if self.evaluator != "estimator":
            raise ConfigurationError("quantiles only apply to scenarios searched with the estimator")
        return replace(self, quantiles=n_classes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "days": self.days,
            "seed": self.seed,
            "intensity": self.intensity,
            "latency_threshold_ms": self.latency_threshold,
            "threshold": self.threshold_label,
            "trace": self.trace_profile or (self.trace_path.name if self.trace_path else None),
            "max_partitions": self.max_partitions,
            "monitor_period_s": self.monitor_period,
            "upgrades": self.upgrades,
            "evaluator": self.evaluator,
            "quantiles": self.quantiles,
            "search": {
                "max_evaluations": self.budget.max_evaluations,
                "batch_size": self.budget.batch_size,
                "leaf_size": self.budget.leaf_size,
                "exploration": self.budget.exploration,
            },
        }


def _resolve(base: Path, value: Optional[str]) -> Optional[Path]:
    if not value:
        return None
    path = Path(value)
    if path.is_absolute():
        return path
    candidate = base / path
    return candidate if candidate.exists() else path


def scenario_from_config(config: Dict[str, Any], base_dir: Union[str, Path] = ".") -> Scenario:
    """Validate a scenario mapping; relative paths resolve against base_dir"""
    ScenarioValidator().check_config(config)
    base = Path(base_dir)

    intensity = str(config["workload"]["intensity"])
    if intensity not in INTENSITY_PRESETS:
        raise ConfigurationError(
            f"Unknown workload intensity '{intensity}'; known: {sorted(INTENSITY_PRESETS)}"
        )

    label = config.get("threshold") or ""
    latency_threshold = float(config.get("latency_threshold_ms") or THRESHOLDS_MS[label])

    weights = None
    if config.get("weights"):
        defaults = DEFAULT_WEIGHTS[PolicyKind.CARBON_AWARE]
        weights = ValueWeights(
            w_latency=float(config["weights"].get("latency", defaults.w_latency)),
            w_power=float(config["weights"].get("power", defaults.w_power)),
        )

    search = config.get("search") or {}
    budget = SearchBudget(
        max_evaluations=int(search.get("max_evaluations", SearchBudget.max_evaluations)),
        batch_size=int(search.get("batch_size", SearchBudget.batch_size)),
        leaf_size=int(search.get("leaf_size", SearchBudget.leaf_size)),
        exploration=float(search.get("exploration", SearchBudget.exploration)),
    )

    trace = config["trace"]
    scenario = Scenario(
        name=str(config["name"]),
        days=int(config["days"]),
        seed=int(config.get("seed", 0)),
        intensity=intensity,
        latency_threshold=latency_threshold,
        threshold_label=label,
        trace_profile=trace.get("profile"),
        trace_path=_resolve(base, trace.get("path")),
        policy=str(config.get("policy", "carbon-aware")),
        weights=weights,
        budget=budget,
        max_partitions=int(search.get("max_partitions", DEFAULT_MAX_PARTITIONS)),
        monitor_period=float(config.get("monitor_period_s", DEFAULT_MONITOR_PERIOD_S)),
        upgrades=bool(config.get("upgrades", True)),
        evaluator=str(config.get("evaluator", "oracle")),
        estimator_path=_resolve(base, config.get("estimator_path")),
        modes_path=_resolve(base, config.get("modes_path")),
        device_path=_resolve(base, config.get("device_path")),
        catalog_path=_resolve(base, config.get("catalog_path")),
    )
    if config.get("quantiles") is not None:
        scenario = scenario.with_quantiles(int(config["quantiles"]))
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    config = YamlExtractor(path, source_name="scenario").run()
    scenario = scenario_from_config(config, base_dir=path.parent)
    logger.info(f"Loaded scenario {scenario.name} ({scenario.days} days) from {path}")
    return scenario


@dataclass(frozen=True)
class ScenarioInputs:
    """Everything a run needs, materialized from a scenario"""

    scenario: Scenario
    trace: CiTrace
    schedule: WorkloadSchedule
    modes: List[OperatingMode]
    device: Device
    catalog: ServiceCatalog


def build_trace(scenario: Scenario) -> CiTrace:
    """
    Generated or file trace; the file must cover the simulated days and is
    held at its last value for the final day-ahead forecast.
    """
    if scenario.trace_path is not None:
        trace = load_trace(scenario.trace_path)
        if not trace.covers(0.0, scenario.duration):
            raise TraceCoverageError(
                f"Trace {scenario.trace_path} covers [{trace.start_time}, {trace.end_time}]s; "
                f"scenario needs [0, {scenario.duration}]s"
            )
        return extend_trace(trace, scenario.duration + FORECAST_HORIZON_S)
    return generate_trace(trace_profile(scenario.trace_profile), scenario.days, scenario.seed)


def prepare(scenario: Scenario) -> ScenarioInputs:
    """Load every referenced input; raises before any simulation starts"""
    modes = load_mode_file(scenario.modes_path)
    device = load_device(scenario.device_path)
    catalog = load_catalog(scenario.catalog_path)
    trace = build_trace(scenario)
    schedule = generate_schedule(
        catalog,
        INTENSITY_PRESETS[scenario.intensity],
        scenario.days,
        scenario.seed,
        scenario.latency_threshold,
    )
    return ScenarioInputs(scenario, trace, schedule, modes, device, catalog)
