"""
Joint mapping x operating-mode design space
"""
import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.device.mapping import (
    Mapping,
    Placement,
    Workload,
    count_placements,
    enumerate_placements,
    random_placement,
)
from src.device.modes import OperatingMode
from src.utils.config import get_settings
from src.utils.errors import ConfigurationError, EnumerationLimitError


@dataclass(frozen=True)
class SearchPoint:
    mapping: Mapping
    mode: OperatingMode

    def key(self) -> Tuple:
        return (self.mode.mode_id, self.mapping.key())


class SearchSpace:
    """
    Placements of every service crossed with a set of modes.

    Services listed in fixed keep their placement. Services with an entry in
    choices are restricted to those placements; the rest range over every
    split configuration up to max_partitions.
    """

    def __init__(
        self,
        workload: Workload,
        components: Sequence[str],
        modes: Sequence[OperatingMode],
        max_partitions: int = 2,
        *,
        fixed: Optional[Mapping] = None,
        choices: Optional[Dict[str, Sequence[Placement]]] = None,
    ):
        if not modes:
            raise ConfigurationError("Search space needs at least one mode")
        if max_partitions < 1:
            raise ConfigurationError("max_partitions must be >= 1")
        self.workload = dict(workload)
        self.components = tuple(components)
        self.modes = tuple(modes)
        self.max_partitions = max_partitions
        self.fixed = {p.service_id: p for p in fixed.placements} if fixed else {}
        self.choices = {sid: tuple(options) for sid, options in (choices or {}).items()}
        for service_id, options in self.choices.items():
            if not options:
                raise ConfigurationError(f"Service {service_id} has no placement choices")
        self.service_ids = tuple(self.workload)
        self.variable_ids = tuple(sid for sid in self.service_ids if sid not in self.fixed)
        self._mode_rank = {mode.mode_id: i for i, mode in enumerate(self.modes)}

    def options_count(self, service_id: str) -> int:
        if service_id in self.choices:
            return len(self.choices[service_id])
        model = self.workload[service_id]
        return count_placements(model.layer_count, len(self.components), self.max_partitions)

    def size(self) -> int:
        total = len(self.modes)
        for service_id in self.variable_ids:
            total *= self.options_count(service_id)
        return total

    def _options(self, service_id: str) -> List[Placement]:
        if service_id in self.choices:
            return list(self.choices[service_id])
        return list(
            enumerate_placements(
                service_id, self.workload[service_id], self.components, self.max_partitions
            )
        )

    def _assemble(self, variable: Dict[str, Placement], mode: OperatingMode) -> SearchPoint:
        placements = tuple(
            self.fixed[sid] if sid in self.fixed else variable[sid] for sid in self.service_ids
        )
        return SearchPoint(Mapping(placements), mode)

    def enumerate(self, cap: Optional[int] = None) -> Iterator[SearchPoint]:
        cap = cap if cap is not None else get_settings().enumeration_cap
        size = self.size()
        if size > cap:
            raise EnumerationLimitError(f"Search space of {size} exceeds the enumeration cap of {cap}")
        per_service = [self._options(sid) for sid in self.variable_ids]
        for mode in self.modes:
            for combination in itertools.product(*per_service):
                yield self._assemble(dict(zip(self.variable_ids, combination)), mode)

    def _draw_placement(self, service_id: str, rng: np.random.Generator) -> Placement:
        if service_id in self.choices:
            options = self.choices[service_id]
            return options[int(rng.integers(len(options)))]
        return random_placement(
            service_id, self.workload[service_id], self.components, self.max_partitions, rng
        )

    def sample(self, rng: np.random.Generator) -> SearchPoint:
        variable = {sid: self._draw_placement(sid, rng) for sid in self.variable_ids}
        return self._assemble(variable, self.modes[int(rng.integers(len(self.modes)))])

    def mutate(self, point: SearchPoint, rng: np.random.Generator) -> SearchPoint:
        """Redraw one variable service's placement, or step to a neighbouring mode"""
        move_mode = len(self.modes) > 1 and (not self.variable_ids or rng.random() < 0.25)
        if move_mode:
            rank = self._mode_rank[point.mode.mode_id]
            if rank == 0:
                step = 1
            elif rank == len(self.modes) - 1:
                step = -1
            else:
                step = int(rng.choice([-1, 1]))
            return SearchPoint(point.mapping, self.modes[rank + step])
        if not self.variable_ids:
            return point
        service_id = self.variable_ids[int(rng.integers(len(self.variable_ids)))]
        return SearchPoint(point.mapping.replace(self._draw_placement(service_id, rng)), point.mode)

    def contains(self, point: SearchPoint) -> bool:
        if point.mode.mode_id not in self._mode_rank:
            return False
        if point.mapping.service_ids != self.service_ids:
            return False
        for placement in point.mapping.placements:
            if placement.service_id in self.fixed:
                if placement != self.fixed[placement.service_id]:
                    return False
            elif placement.service_id in self.choices:
                if placement not in self.choices[placement.service_id]:
                    return False
            elif placement.model != self.workload[placement.service_id]:
                return False
            elif placement.partition_count > self.max_partitions:
                return False
            elif not set(placement.components) <= set(self.components):
                return False
        return True

    def feature_names(self) -> List[str]:
        names = [f"{component}_compute_share" for component in self.components]
        names += [f"{sid}_partitions" for sid in self.variable_ids]
        return names + ["mode_rank"]

    def features(self, point: SearchPoint) -> np.ndarray:
        """
        Per-component share of assigned compute, partition count per variable
        service and the mode's rank in the space.
        """
        demand = dict.fromkeys(self.components, 0.0)
        for placement in point.mapping.placements:
            for start, end, component in placement.partitions():
                demand[component] += placement.model.segment_cost(start, end)
        total = sum(demand.values()) or 1.0
        row = [demand[component] / total for component in self.components]
        row += [point.mapping.placement_of(sid).partition_count for sid in self.variable_ids]
        row.append(self._mode_rank[point.mode.mode_id])
        return np.asarray(row, dtype=float)
