"""
Variant-switch search restricted to one service, with a pruned split space
"""
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from src.device.hardware import Device
from src.device.mapping import Mapping, Placement, enumerate_placements
from src.device.modes import OperatingMode
from src.device.oracle import oracle_evaluate
from src.search.evaluators import Evaluator
from src.search.lamcts import SearchBudget, SearchResult, exhaustive_search, lamcts_search
from src.search.space import SearchSpace
from src.search.value import ValueWeights
from src.utils.errors import NoFeasibleMappingError
from src.utils.logger import setup_logger
from src.workload.models import DnnModel

logger = setup_logger("search.tailored")

# split configurations slower than this multiple of the best are pruned
PRUNE_RATIO = 1.3
PRUNE_TOLERANCE = 1e-12

SplitConfig = Tuple[Tuple[int, ...], Tuple[str, ...]]


@dataclass(frozen=True)
class SplitObservation:
    boundaries: Tuple[int, ...]
    components: Tuple[str, ...]
    latency: float  # ms of the profiled service under one co-load

    @property
    def config(self) -> SplitConfig:
        return self.boundaries, self.components


@dataclass(frozen=True)
class RegionMask:
    """Split configurations excluded for one model"""

    model_name: str
    excluded: FrozenSet[SplitConfig] = frozenset()
    best_latency: Optional[float] = None
    profiled: int = 0

    def allows(self, placement: Placement) -> bool:
        return placement.split_config() not in self.excluded

    def __len__(self) -> int:
        return len(self.excluded)


def profile_split_configurations(
    service_id: str,
    model: DnnModel,
    mode: OperatingMode,
    co_loads: Sequence[Mapping],
    components: Sequence[str],
    max_partitions: int,
    device: Optional[Device] = None,
) -> List[SplitObservation]:
    """Latency of every split configuration of the model next to each co-load"""
    co_loads = list(co_loads) or [Mapping()]
    observations = []
    for co_load in co_loads:
        others = co_load.without(service_id)
        for placement in enumerate_placements(service_id, model, components, max_partitions):
            result = oracle_evaluate(others.replace(placement), mode, device)
            observations.append(
                SplitObservation(placement.boundaries, placement.components, result.latencies[service_id])
            )
    return observations


def build_pruned_space(
    model: DnnModel, observations: Sequence[SplitObservation], ratio: float = PRUNE_RATIO
) -> RegionMask:
    """
    Exclude configurations whose mean latency across co-loads exceeds ratio
    times the best configuration's. No observations exclude nothing.
    """
    if not observations:
        return RegionMask(model.name)

    samples: Dict[SplitConfig, List[float]] = defaultdict(list)
    for observation in observations:
        samples[observation.config].append(observation.latency)
    means = {config: float(np.mean(latencies)) for config, latencies in samples.items()}
    best = min(means.values())
    limit = ratio * best * (1 + PRUNE_TOLERANCE)
    excluded = frozenset(config for config, latency in means.items() if latency > limit)

    logger.debug(
        f"Pruned {len(excluded)}/{len(means)} split configurations of {model.name} "
        f"(best {best:.2f} ms)"
    )
    return RegionMask(model.name, excluded, best, len(means))


def tailored_search(
    current: Mapping,
    service_id: str,
    model: DnnModel,
    mask: Optional[RegionMask],
    evaluator: Evaluator,
    weights: ValueWeights,
    budget: SearchBudget,
    rng: np.random.Generator,
    *,
    mode: OperatingMode,
    components: Sequence[str],
    max_partitions: int,
) -> SearchResult:
    """
    Best placement of the given model for one service with every other
    placement and the mode held fixed. Falls back to the unpruned space when
    nothing in the pruned one is feasible.
    """
    workload = current.workload()
    workload[service_id] = model
    others = current.without(service_id)

    every = list(enumerate_placements(service_id, model, components, max_partitions))
    pruned = [p for p in every if mask.allows(p)] if mask is not None else every
    if not pruned:
        pruned = every

    attempts = [("pruned", pruned)]
    if len(pruned) < len(every):
        attempts.append(("unpruned", every))

    evaluations = 0
    for label, options in attempts:
        space = SearchSpace(
            workload, components, [mode], max_partitions, fixed=others, choices={service_id: options}
        )
        try:
            if len(options) <= budget.max_evaluations:
                return exhaustive_search(list(space.enumerate(cap=len(options))), evaluator, weights)
            return lamcts_search(space, evaluator, weights, replace(budget, sampler="auto"), rng)
        except NoFeasibleMappingError as e:
            evaluations += e.evaluations
            logger.warning(f"No feasible {label} placement of {model.name} for {service_id}")

    raise NoFeasibleMappingError(
        f"No feasible placement of {model.name} for {service_id}", evaluations=evaluations
    )
