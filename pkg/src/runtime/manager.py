"""
Runtime manager: reacts to CI updates, arrivals, departures and monitor ticks
"""
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.carbon.forecast import CiForecast
from src.carbon.policy import hysteresis_gate
from src.device.hardware import Device
from src.device.mapping import Mapping, Placement, Workload
from src.device.modes import OperatingMode
from src.device.oracle import EvaluationResult, oracle_evaluate
from src.runtime.policies import Policy, with_cap
from src.runtime.state import BreachRecord, EventRecord, SystemState
from src.search.evaluators import Evaluator
from src.search.lamcts import SearchBudget, SearchResult, exhaustive_search, lamcts_search
from src.search.space import SearchPoint, SearchSpace
from src.search.tailored import RegionMask, build_pruned_space, profile_split_configurations, tailored_search
from src.utils.errors import NoFeasibleMappingError, RuntimeStateError
from src.utils.logger import setup_logger
from src.workload.models import DnnModel, ServiceSpec

Deployment = Tuple[SearchPoint, EvaluationResult]


class RuntimeManager:
    """
    Keeps the deployed (mapping, mode) feasible under the current power cap
    and resolves latency violations by stepping services down their model
    families one at a time.
    """

    def __init__(
        self,
        policy: Policy,
        modes: Sequence[OperatingMode],
        device: Device,
        evaluator: Evaluator,
        budget: SearchBudget,
        rng: np.random.Generator,
        *,
        max_partitions: int = 2,
    ):
        self.policy = policy
        self.modes = sorted(modes, key=lambda mode: -mode.power_cap)
        self.device = device
        self.components = device.component_ids
        self.evaluator = evaluator
        self.budget = budget
        self.rng = rng
        self.max_partitions = max_partitions
        self.logger = setup_logger("runtime.manager")

        cap_mode = policy.initial_cap_mode(self.modes)
        self.state = SystemState(cap_mode=cap_mode, mode=cap_mode)
        self.state.measurement = oracle_evaluate(Mapping(), cap_mode, device)

        self.breaches: List[BreachRecord] = []
        self.events: List[EventRecord] = []
        self.search_trace: List[Dict[str, Any]] = []
        self.rejected: Set[str] = set()
        self._masks: Dict[Tuple[str, int], RegionMask] = {}
        self._settled: Optional[Tuple] = None

    # --- bookkeeping -------------------------------------------------------

    def _record(self, now: float, kind: str, **detail) -> None:
        self.events.append(EventRecord(now, kind, detail))

    def _breach(self, now: float, kind: str, service_ids: Sequence[str], detail: str) -> None:
        record = BreachRecord(now, kind, tuple(sorted(service_ids)), detail)
        self.breaches.append(record)
        self._record(now, "breach", breach=kind, services=list(record.service_ids), detail=detail)
        self.logger.warning(f"SLA breach at t={now:.0f}s ({kind}): {detail}")

    def _deploy(self, mapping: Mapping, mode: OperatingMode, measurement: EvaluationResult) -> None:
        self.state.mapping = mapping
        self.state.mode = mode
        self.state.measurement = measurement

    def _measure(self, mapping: Mapping, mode: OperatingMode) -> EvaluationResult:
        return oracle_evaluate(mapping, mode, self.device)

    def workload(self) -> Workload:
        return {sid: self.state.model_of(sid) for sid in self.state.services}

    def can_downgrade(self, service_id: str) -> bool:
        spec = self.state.services[service_id]
        return spec.allowed_level(self.state.levels[service_id] + 1)

    # --- search ------------------------------------------------------------

    def _verify(self, result: SearchResult, cap_mode: OperatingMode) -> Deployment:
        """First ranked candidate whose measured power fits the cap"""
        for evaluation in result.ranked:
            measurement = evaluation.result or self._measure(
                evaluation.point.mapping, evaluation.point.mode
            )
            if measurement.within_cap(cap_mode.power_cap):
                return evaluation.point, measurement
        raise NoFeasibleMappingError(
            f"No candidate measured under the {cap_mode.power_cap} W cap",
            evaluations=result.evaluations,
        )

    def _warm_points(
        self, workload: Workload, modes: Sequence[OperatingMode], new_service: Optional[str] = None
    ) -> List[SearchPoint]:
        """The incumbent under the current and cap modes; a new service goes unsplit on each component"""
        base = Mapping(
            tuple(
                self.state.mapping.placement_of(sid).with_model(model)
                for sid, model in workload.items()
                if sid in self.state.mapping.service_ids
            )
        )
        mappings = [base]
        if new_service is not None:
            model = workload[new_service]
            mappings = [
                base.replace(Placement(new_service, model, (), (component,)))
                for component in self.components
            ]

        ids = {mode.mode_id for mode in modes}
        warm_modes = [m for m in (self.state.mode, self.state.cap_mode) if m.mode_id in ids]
        points = []
        for mapping in mappings:
            if set(mapping.service_ids) != set(workload):
                continue
            ordered = Mapping(tuple(mapping.placement_of(sid) for sid in workload))
            points.extend(SearchPoint(ordered, mode) for mode in dict.fromkeys(warm_modes))
        return points

    def joint_search(
        self,
        now: float,
        workload: Workload,
        cap_mode: OperatingMode,
        reason: str,
        new_service: Optional[str] = None,
    ) -> Deployment:
        """Search the joint mapping x mode space of the whole workload under cap_mode"""
        modes = self.policy.search_modes(cap_mode, self.modes)
        space = SearchSpace(workload, self.components, modes, self.max_partitions)
        weights = with_cap(self.policy.weights, cap_mode)

        if space.size() <= self.budget.max_evaluations:
            result = exhaustive_search(list(space.enumerate(cap=space.size())), self.evaluator, weights)
        else:
            warm = self._warm_points(workload, modes, new_service)
            result = lamcts_search(space, self.evaluator, weights, self.budget, self.rng, warm)

        for evaluations, best_value in result.trace:
            self.search_trace.append(
                {"time": now, "reason": reason, "evaluations": evaluations, "best_value": best_value}
            )
        self.logger.debug(
            f"{reason} search at t={now:.0f}s: {result.evaluations} evaluations, value {result.value:.4f}"
        )
        return self._verify(result, cap_mode)

    def _mask(self, service_id: str, model: DnnModel, mode: OperatingMode) -> RegionMask:
        key = (model.name, mode.mode_id)
        if key not in self._masks:
            observations = profile_split_configurations(
                service_id,
                model,
                mode,
                [self.state.mapping, Mapping()],
                self.components,
                self.max_partitions,
                self.device,
            )
            self._masks[key] = build_pruned_space(model, observations)
        return self._masks[key]

    def single_service_search(self, service_id: str, model: DnnModel) -> Deployment:
        """Place one swapped model with the mode and every other placement fixed"""
        mode = self.state.mode
        result = tailored_search(
            self.state.mapping,
            service_id,
            model,
            self._mask(service_id, model, mode),
            self.evaluator,
            with_cap(self.policy.weights, self.state.cap_mode),
            self.budget,
            self.rng,
            mode=mode,
            components=self.components,
            max_partitions=self.max_partitions,
        )
        return self._verify(result, self.state.cap_mode)

    def search_under_cap(
        self, now: float, workload: Workload, reason: str, new_service: Optional[str] = None
    ) -> Deployment:
        """
        Joint search under the current cap. A cap-escalating policy starts
        from the lowest cap and moves up one cap at a time until a mapping
        fits; the cap that admitted it becomes the current one.
        """
        if not self.policy.escalates_cap:
            return self.joint_search(now, workload, self.state.cap_mode, reason, new_service)

        error: Optional[NoFeasibleMappingError] = None
        for cap_mode in self.policy.cap_candidates(self.modes):
            try:
                deployment = self.joint_search(now, workload, cap_mode, reason, new_service)
            except NoFeasibleMappingError as e:
                error = e
                continue
            previous = self.state.cap_mode
            if cap_mode.mode_id != previous.mode_id:
                self.state.cap_mode = cap_mode
                self._record(now, "cap", cap_mode=cap_mode.mode_id, previous_cap_mode=previous.mode_id)
                self.logger.info(
                    f"t={now:.0f}s {reason}: power cap {previous.power_cap} W -> {cap_mode.power_cap} W "
                    f"(mode {cap_mode.mode_id})"
                )
            return deployment
        raise error

    def _research(self, now: float, reason: str, keep_latency: bool = False) -> bool:
        """
        Re-search the current workload under the current cap, escalating to
        quality downgrades when nothing fits. With keep_latency the result is
        only deployed if it adds no latency violation.
        """
        workload = self.workload()
        try:
            point, measurement = self.search_under_cap(now, workload, reason)
        except NoFeasibleMappingError:
            return self._escalate_power(now, reason)

        if keep_latency:
            before = set(self.state.violations())
            after = {
                sid
                for sid, ratio in measurement.latency_ratios(self.state.thresholds()).items()
                if ratio > 1.0 + 1e-9
            }
            if not after <= before:
                self.logger.debug(f"{reason} re-search discarded: it adds latency violations")
                return False
        self._deploy(point.mapping, point.mode, measurement)
        return True

    def _downgrade_until_feasible(
        self, now: float, reason: str, new_service: Optional[str] = None
    ) -> Optional[Deployment]:
        """
        Step the most compute-intensive service down one level at a time
        until a joint search fits the cap. Levels are restored when the
        families run out.
        """
        levels = dict(self.state.levels)
        while self.policy.mixed_quality:
            candidates = [sid for sid in self.state.services if self.can_downgrade(sid)]
            if not candidates:
                break
            target = max(candidates, key=lambda sid: (self.state.model_of(sid).total_cost, sid))
            self.state.levels[target] += 1
            try:
                deployment = self.joint_search(
                    now, self.workload(), self.state.cap_mode, reason, new_service
                )
            except NoFeasibleMappingError:
                continue
            changed = {
                sid: level for sid, level in self.state.levels.items()
                if sid in levels and levels[sid] != level
            }
            self._record(now, "power-downgrade", levels=changed)
            return deployment
        self.state.levels = levels
        return None

    def _escalate_power(self, now: float, reason: str) -> bool:
        """Downgrade the most compute-intensive services until a joint search fits the cap"""
        deployment = self._downgrade_until_feasible(now, reason)
        if deployment is not None:
            point, measurement = deployment
            self._deploy(point.mapping, point.mode, measurement)
            return True

        # the incumbent still runs its previous models
        if not self.state.measurement.within_cap(self.state.power_cap):
            self._breach(
                now,
                "power",
                list(self.state.services),
                f"no mapping fits the {self.state.power_cap} W cap after {reason}",
            )
        return False

    # --- event handlers ----------------------------------------------------

    def on_ci_update(self, now: float, ci: float, forecast: CiForecast) -> bool:
        """Apply a new cap when the gate passes; returns whether the cap was applied"""
        if not self.policy.ci_aware:
            return False
        if not hysteresis_gate(self.state.last_applied_ci, ci, forecast):
            return False

        previous = self.state.cap_mode
        new_cap = self.policy.cap_mode(ci, forecast, self.modes)
        self.state.last_applied_ci = ci
        self._record(now, "threshold", ci=ci, cap_mode=new_cap.mode_id, previous_cap_mode=previous.mode_id)
        if new_cap.mode_id == previous.mode_id:
            return True

        self.state.cap_mode = new_cap
        self.logger.info(
            f"t={now:.0f}s CI {ci:.1f}: power cap {previous.power_cap} W -> {new_cap.power_cap} W "
            f"(mode {new_cap.mode_id})"
        )
        if not self.state.services:
            self._research(now, "idle")
            return True

        if new_cap.power_cap < previous.power_cap:
            if not self.state.power_ok():
                self._research(now, "cap-decrease")
            if self.state.violations():
                self.cascade(now)
        else:
            self._research(now, "cap-increase", keep_latency=True)
            self.upgrade(now)
        return True

    def on_arrival(self, now: float, spec: ServiceSpec) -> None:
        service_id = spec.service_id
        if service_id in self.state.services:
            raise RuntimeStateError(f"Service {service_id} is already active")

        self.state.services[service_id] = spec
        self.state.levels[service_id] = 1
        try:
            deployment = self.search_under_cap(now, self.workload(), "arrival", new_service=service_id)
        except NoFeasibleMappingError:
            # admission at level 1 failed; the heaviest services give way first
            deployment = self._downgrade_until_feasible(now, "arrival", new_service=service_id)

        if deployment is None:
            del self.state.services[service_id]
            del self.state.levels[service_id]
            self.rejected.add(service_id)
            self._breach(now, "admission", [service_id], f"no feasible mapping admits {service_id}")
            return

        point, measurement = deployment
        level = self.state.levels[service_id]
        self._deploy(point.mapping, point.mode, measurement)
        self._record(now, "arrival", service=service_id, level=level, mode=point.mode.mode_id)
        self.logger.info(
            f"t={now:.0f}s admitted {service_id} ({spec.family.family_id} level {level}), "
            f"{len(self.state.services)} running"
        )
        if self.policy.mixed_quality and self.state.violations():
            self.cascade(now)

    def on_departure(self, now: float, service_id: str) -> None:
        if service_id in self.rejected:
            return
        if service_id not in self.state.services:
            raise RuntimeStateError(f"Service {service_id} is not active")

        del self.state.services[service_id]
        del self.state.levels[service_id]
        mapping = self.state.mapping.without(service_id)
        self._deploy(mapping, self.state.mode, self._measure(mapping, self.state.mode))
        self._record(now, "departure", service=service_id)

        if mapping.is_empty():
            self._research(now, "idle")
        elif self.policy.escalates_cap:
            self._research(now, "departure")
        else:
            self.upgrade(now)

    def on_monitor(self, now: float) -> None:
        """Re-measure; retry the cascade once per deployed configuration"""
        self.state.measurement = self._measure(self.state.mapping, self.state.mode)
        key = (self.state.mode.mode_id, self.state.mapping.key())
        if self.policy.mixed_quality and self.state.violations() and key != self._settled:
            self.cascade(now)

    # --- mixed quality -----------------------------------------------------

    def cascade_target(self, violations: Dict[str, float], blocked: Set[str]) -> Optional[str]:
        """Worst violator by latency/threshold, else the most compute-intensive service"""
        worst = max(violations, key=lambda sid: (violations[sid], sid))
        if worst not in blocked and self.can_downgrade(worst):
            return worst
        candidates = [
            sid for sid in self.state.services if sid not in blocked and self.can_downgrade(sid)
        ]
        if not candidates:
            return None
        return max(candidates, key=lambda sid: (self.state.model_of(sid).total_cost, sid))

    def cascade(self, now: float) -> int:
        """
        Step one service down one quality level at a time until no service
        violates its latency threshold. Returns the number of steps taken.
        """
        bound = sum(spec.family.depth - 1 for spec in self.state.services.values())
        blocked: Set[str] = set()
        steps = 0
        while True:
            violations = self.state.violations()
            if not violations:
                break
            target = self.cascade_target(violations, blocked) if steps < bound else None
            if target is None:
                self._breach(
                    now,
                    "latency",
                    list(violations),
                    f"{len(violations)} services over threshold with quality levels exhausted",
                )
                break

            level = self.state.levels[target] + 1
            model = self.state.services[target].family.level(level)
            try:
                point, measurement = self.single_service_search(target, model)
            except NoFeasibleMappingError:
                blocked.add(target)
                continue

            self.state.levels[target] = level
            self._deploy(point.mapping, point.mode, measurement)
            steps += 1
            self._record(
                now,
                "downgrade",
                service=target,
                level=level,
                ratio=violations.get(target, 0.0),
            )
            self.logger.info(f"t={now:.0f}s cascade: {target} -> {model.name} (level {level})")

        self._settled = (self.state.mode.mode_id, self.state.mapping.key())
        return steps

    def upgrade(self, now: float) -> int:
        """Restore degraded services toward level 1, most degraded first, while nothing breaks"""
        if not (self.policy.mixed_quality and self.policy.upgrades):
            return 0
        restored = 0
        degraded = sorted(
            (sid for sid, level in self.state.levels.items() if level > 1),
            key=lambda sid: (-self.state.levels[sid], sid),
        )
        for service_id in degraded:
            while self.state.levels[service_id] > 1:
                level = self.state.levels[service_id] - 1
                model = self.state.services[service_id].family.level(level)
                try:
                    point, measurement = self.single_service_search(service_id, model)
                except NoFeasibleMappingError:
                    break
                ratios = measurement.latency_ratios(self.state.thresholds())
                if any(ratio > 1.0 + 1e-9 for ratio in ratios.values()):
                    break
                self.state.levels[service_id] = level
                self._deploy(point.mapping, point.mode, measurement)
                restored += 1
                self._record(now, "upgrade", service=service_id, level=level)
        if restored:
            self.logger.info(f"t={now:.0f}s restored {restored} quality levels")
        return restored
