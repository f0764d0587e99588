"""
Discrete-event scenario runs and policy comparisons
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.carbon.accounting import JOULES_PER_KWH, accrue, accrue_requests, cdp, integrate_emissions
from src.carbon.forecast import Forecaster, forecast
from src.carbon.traces import SECONDS_PER_DAY
from src.device.modes import mode_by_id
from src.loaders.artifact_loader import load_estimator
from src.runtime.manager import RuntimeManager
from src.runtime.policies import Policy, PolicyKind, parse_policy
from src.runtime.scenario import Scenario, ScenarioInputs, prepare
from src.runtime.state import (
    BreachRecord,
    EventKind,
    EventQueue,
    EventRecord,
    IntervalRecord,
    SimEvent,
)
from src.search.evaluators import EstimatorEvaluator, Evaluator, OracleEvaluator
from src.transformers.report_transformer import ReportTransformer, normalize_comparison
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger
from src.workload.models import ServiceSpec

logger = setup_logger(__name__)


@dataclass
class SimulationReport:
    scenario: Dict[str, Any]
    policy: str
    seed: int
    totals: Dict[str, float]
    level_distribution: Dict[str, float]
    mode_residency: Dict[str, Dict[str, float]]
    breaches: List[BreachRecord] = field(default_factory=list)
    events: List[EventRecord] = field(default_factory=list)
    daily: pd.DataFrame = field(default_factory=pd.DataFrame, repr=False)
    search_trace: pd.DataFrame = field(default_factory=pd.DataFrame, repr=False)

    @property
    def has_breaches(self) -> bool:
        return bool(self.breaches)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "policy": self.policy,
            "seed": self.seed,
            "totals": self.totals,
            "level_distribution": self.level_distribution,
            "mode_residency": self.mode_residency,
            "breaches": [breach.to_dict() for breach in self.breaches],
            "events": [event.to_dict() for event in self.events],
            "daily": self.daily.to_dict(orient="records"),
        }


def build_evaluator(scenario: Scenario, inputs: ScenarioInputs) -> Evaluator:
    if scenario.evaluator == "estimator":
        estimator = load_estimator(scenario.estimator_path)
        if scenario.quantiles is not None and estimator.n_classes != scenario.quantiles:
            raise ConfigurationError(
                f"{scenario.estimator_path} predicts {estimator.n_classes} classes, "
                f"scenario asks for {scenario.quantiles}"
            )
        return EstimatorEvaluator(estimator)
    return OracleEvaluator(inputs.device)


class Simulator:
    """
    Future-event list over CI samples, arrivals, departures and monitor
    ticks. Power, CI and latencies are constant between consecutive events,
    so each gap is accrued as one interval (split at day boundaries).
    """

    def __init__(
        self,
        inputs: ScenarioInputs,
        policy: Policy,
        seed: int,
        *,
        evaluator: Optional[Evaluator] = None,
        forecaster: Optional[Forecaster] = None,
    ):
        self.inputs = inputs
        self.scenario = inputs.scenario
        self.policy = policy
        self.seed = seed
        self.forecaster = forecaster
        self.evaluator = evaluator or build_evaluator(self.scenario, inputs)
        self.manager = RuntimeManager(
            policy,
            inputs.modes,
            inputs.device,
            self.evaluator,
            self.scenario.budget,
            np.random.default_rng(seed),
            max_partitions=self.scenario.max_partitions,
        )
        self.intervals: List[IntervalRecord] = []
        self.logger = setup_logger("runtime.simulator")

    def _schedule(self) -> EventQueue:
        queue = EventQueue()
        end = self.scenario.duration
        for timestamp in self.inputs.trace.timestamps:
            if 0.0 <= timestamp < end:
                queue.schedule(timestamp, EventKind.CI_UPDATE)
        for service in self.inputs.schedule.services:
            if service.arrival_time >= end:
                continue
            queue.schedule(service.arrival_time, EventKind.ARRIVAL, service.service_id)
            if service.departure_time < end:
                queue.schedule(service.departure_time, EventKind.DEPARTURE, service.service_id)
        for tick in np.arange(self.scenario.monitor_period, end, self.scenario.monitor_period):
            queue.schedule(float(tick), EventKind.MONITOR)
        return queue

    def _accrue(self, start: float, end: float) -> None:
        state = self.manager.state
        frame_interval = self.inputs.device.frame_interval
        while start < end:
            day_end = (np.floor(start / SECONDS_PER_DAY) + 1) * SECONDS_PER_DAY
            stop = min(end, float(day_end))
            ci = self.inputs.trace.ci_at(start)
            latencies = dict(state.measurement.latencies)
            self.intervals.append(
                IntervalRecord(
                    start=start,
                    end=stop,
                    power=state.measurement.total_power,
                    ci=ci,
                    cap_mode_id=state.cap_mode.mode_id,
                    mode_id=state.mode.mode_id,
                    latencies=latencies,
                    levels=dict(state.levels),
                    power_breach=not state.power_ok(),
                    latency_violation=bool(state.violations()),
                )
            )
            ledger = accrue(state.measurement.total_power, stop - start, ci, state.ledger)
            state.ledger = accrue_requests(list(latencies.values()), stop - start, frame_interval, ledger)
            start = stop

    def _dispatch(self, event: SimEvent, services: Dict[str, ServiceSpec]) -> None:
        manager = self.manager
        if event.kind is EventKind.CI_UPDATE:
            ci = self.inputs.trace.ci_at(event.time)
            manager.on_ci_update(event.time, ci, forecast(self.inputs.trace, event.time, self.forecaster))
        elif event.kind is EventKind.DEPARTURE:
            manager.on_departure(event.time, event.service_id)
        elif event.kind is EventKind.ARRIVAL:
            manager.on_arrival(event.time, services[event.service_id])
        else:
            manager.on_monitor(event.time)

    def run(self) -> SimulationReport:
        services = {service.service_id: service for service in self.inputs.schedule.services}
        queue = self._schedule()
        self.logger.info(
            f"Running {self.scenario.name} with {self.policy.label}: {len(services)} services, "
            f"{len(queue)} events over {self.scenario.days} days"
        )

        now = 0.0
        while queue:
            event = queue.pop()
            self._accrue(now, event.time)
            now = event.time
            self._dispatch(event, services)
        self._accrue(now, self.scenario.duration)

        report = self._report()
        self.logger.info(
            f"Finished {self.scenario.name} with {self.policy.label}: "
            f"{report.totals['emissions_g']:.2f} gCO2, mean latency "
            f"{report.totals['mean_latency_ms']:.1f} ms, {len(report.breaches)} breaches"
        )
        return report

    def _report(self) -> SimulationReport:
        max_level = max(
            (family.depth for family in self.inputs.catalog.families.values()), default=1
        )
        transformer = ReportTransformer(self.inputs.device.frame_interval, max_level)
        frame = transformer.intervals_to_frame(self.intervals)
        daily = transformer.daily_rows(frame, self.manager.breaches, self.scenario.days)

        ledger = self.manager.state.ledger
        duration = self.scenario.duration
        crosscheck = integrate_emissions(
            [(i.start, i.end, i.power) for i in self.intervals], self.inputs.trace
        )
        totals = {
            "energy_kwh": ledger.energy_kwh,
            "emissions_g": ledger.emissions_g,
            "emissions_crosscheck_g": crosscheck,
            "mean_power_w": ledger.energy_kwh * JOULES_PER_KWH / duration if duration > 0 else 0.0,
            "mean_latency_ms": ledger.mean_latency_ms,
            "cdp_g_s": cdp(ledger),
            "requests": ledger.requests,
            "power_breach_s": float(frame["power_breach_s"].sum()) if not frame.empty else 0.0,
            "latency_violation_s": float(frame["latency_violation_s"].sum()) if not frame.empty else 0.0,
            "breaches": len(self.manager.breaches),
            "evaluations": self.evaluator.calls,
        }
        scenario = self.scenario.to_dict()
        scenario["policy"] = self.policy.label
        return SimulationReport(
            scenario=scenario,
            policy=self.policy.label,
            seed=self.seed,
            totals=totals,
            level_distribution=transformer.level_distribution(frame),
            mode_residency=transformer.mode_residency(frame),
            breaches=list(self.manager.breaches),
            events=list(self.manager.events),
            daily=daily,
            search_trace=pd.DataFrame(
                self.manager.search_trace, columns=["time", "reason", "evaluations", "best_value"]
            ),
        )


def policy_for(scenario: Scenario, name: Optional[str] = None) -> Policy:
    return parse_policy(
        name or scenario.policy,
        scenario.weights,
        upgrades=scenario.upgrades,
        threshold_label=scenario.threshold_label,
    )


def run_scenario(
    scenario: Scenario,
    policy: Optional[str] = None,
    seed: Optional[int] = None,
    *,
    inputs: Optional[ScenarioInputs] = None,
    evaluator: Optional[Evaluator] = None,
    forecaster: Optional[Forecaster] = None,
) -> SimulationReport:
    """
    Simulate one scenario under one policy. The seed drives the search; the
    scenario's own seed fixes its trace and workload. Inputs are loaded and
    validated before the first event.
    """
    seed = scenario.seed if seed is None else seed
    resolved = policy_for(scenario, policy)
    inputs = inputs or prepare(scenario)
    if resolved.kind is PolicyKind.STATIC:
        mode_by_id(inputs.modes, resolved.static_mode_id)
    return Simulator(inputs, resolved, seed, evaluator=evaluator, forecaster=forecaster).run()


def compare_policies(
    scenario: Scenario, policies: Sequence[str], seed: Optional[int] = None
) -> Dict[str, Any]:
    """
    Run every policy on the same inputs; the comparison frame normalizes each
    day's metrics to the first policy.
    """
    if len(policies) < 2:
        raise ConfigurationError("compare needs at least two policies")

    inputs = prepare(scenario)
    reports: Dict[str, SimulationReport] = {}
    for name in policies:
        report = run_scenario(scenario, name, seed, inputs=inputs)
        reports[report.policy] = report
    if len(reports) < len(policies):
        raise ConfigurationError(f"Policies {list(policies)} are not distinct")

    comparison = normalize_comparison({label: report.daily for label, report in reports.items()})
    return {"reports": reports, "comparison": comparison}
