"""
Layer-partition mappings of running DNNs onto compute components
"""
import itertools
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.config import get_settings
from src.utils.errors import ConfigurationError, EnumerationLimitError
from src.workload.models import DnnModel

# service_id -> deployed model, in service order
Workload = Dict[str, DnnModel]


@dataclass(frozen=True)
class Placement:
    """
    Partitioning of one service's model.

    boundaries holds the first layer index of every partition after the first,
    so a model of L layers split at (4, 9) runs layers [0,4), [4,9), [9,L).
    """

    service_id: str
    model: DnnModel
    boundaries: Tuple[int, ...]
    components: Tuple[str, ...]

    def __post_init__(self):
        if len(self.components) != len(self.boundaries) + 1:
            raise ConfigurationError(
                f"{self.service_id}: {len(self.boundaries) + 1} partitions "
                f"but {len(self.components)} component assignments"
            )
        previous = 0
        for boundary in self.boundaries:
            if not previous < boundary < self.model.layer_count:
                raise ConfigurationError(
                    f"{self.service_id}: boundaries {self.boundaries} must be strictly "
                    f"increasing within 1..{self.model.layer_count - 1}"
                )
            previous = boundary

    @property
    def partition_count(self) -> int:
        return len(self.components)

    def partitions(self) -> List[Tuple[int, int, str]]:
        """(start, end, component) per partition, end exclusive"""
        edges = (0,) + self.boundaries + (self.model.layer_count,)
        return [
            (edges[i], edges[i + 1], component) for i, component in enumerate(self.components)
        ]

    def split_config(self) -> Tuple[Tuple[int, ...], Tuple[str, ...]]:
        return self.boundaries, self.components

    def with_model(self, model: DnnModel) -> "Placement":
        """Same assignment on another model when it has enough layers, else unsplit on the first component"""
        if self.boundaries and self.boundaries[-1] >= model.layer_count:
            return Placement(self.service_id, model, (), (self.components[0],))
        return Placement(self.service_id, model, self.boundaries, self.components)

    def key(self) -> Tuple:
        return (self.service_id, self.model.name, self.boundaries, self.components)


@dataclass(frozen=True)
class Mapping:
    placements: Tuple[Placement, ...] = ()

    def __post_init__(self):
        ids = [placement.service_id for placement in self.placements]
        if len(ids) != len(set(ids)):
            raise ConfigurationError(f"Mapping places a service twice: {ids}")

    @property
    def service_ids(self) -> Tuple[str, ...]:
        return tuple(placement.service_id for placement in self.placements)

    def is_empty(self) -> bool:
        return not self.placements

    def workload(self) -> Workload:
        return {placement.service_id: placement.model for placement in self.placements}

    def placement_of(self, service_id: str) -> Placement:
        for placement in self.placements:
            if placement.service_id == service_id:
                return placement
        raise KeyError(service_id)

    def replace(self, placement: Placement) -> "Mapping":
        """Swap in a placement for its service, or append it if the service is new"""
        if placement.service_id not in self.service_ids:
            return Mapping(self.placements + (placement,))
        return Mapping(
            tuple(
                placement if current.service_id == placement.service_id else current
                for current in self.placements
            )
        )

    def without(self, service_id: str) -> "Mapping":
        return Mapping(tuple(p for p in self.placements if p.service_id != service_id))

    def key(self) -> Tuple:
        return tuple(placement.key() for placement in self.placements)


def count_placements(layer_count: int, component_count: int, max_partitions: int) -> int:
    """Split configurations of one model: sum over p of C(L-1, p-1) * |C|**p"""
    top = min(max_partitions, layer_count)
    return sum(comb(layer_count - 1, p - 1) * component_count**p for p in range(1, top + 1))


def enumerate_placements(
    service_id: str, model: DnnModel, components: Sequence[str], max_partitions: int
) -> Iterator[Placement]:
    """Every placement of one model, fewest partitions first"""
    top = min(max_partitions, model.layer_count)
    for partition_count in range(1, top + 1):
        for boundaries in itertools.combinations(range(1, model.layer_count), partition_count - 1):
            for assignment in itertools.product(components, repeat=partition_count):
                yield Placement(service_id, model, tuple(boundaries), tuple(assignment))


def count_mappings(workload: Workload, components: Sequence[str], max_partitions: int) -> int:
    total = 1
    for model in workload.values():
        total *= count_placements(model.layer_count, len(components), max_partitions)
    return total


def enumerate_mappings(
    workload: Workload,
    components: Sequence[str],
    max_partitions: int,
    cap: Optional[int] = None,
) -> Iterator[Mapping]:
    """
    Yield every valid mapping of the workload exactly once.

    Refuses with EnumerationLimitError before yielding anything when the space
    exceeds cap (GREENEDGE_ENUMERATION_CAP by default).
    """
    cap = cap if cap is not None else get_settings().enumeration_cap
    size = count_mappings(workload, components, max_partitions)
    if size > cap:
        raise EnumerationLimitError(
            f"Mapping space of {size} exceeds the enumeration cap of {cap}"
        )

    per_service = [
        list(enumerate_placements(service_id, model, components, max_partitions))
        for service_id, model in workload.items()
    ]
    for combination in itertools.product(*per_service):
        yield Mapping(tuple(combination))


def random_placement(
    service_id: str,
    model: DnnModel,
    components: Sequence[str],
    max_partitions: int,
    rng: np.random.Generator,
) -> Placement:
    partition_count = int(rng.integers(1, min(max_partitions, model.layer_count) + 1))
    boundaries: Tuple[int, ...] = ()
    if partition_count > 1:
        cuts = rng.choice(np.arange(1, model.layer_count), partition_count - 1, replace=False)
        boundaries = tuple(sorted(int(cut) for cut in cuts))
    assignment = tuple(components[int(i)] for i in rng.integers(len(components), size=partition_count))
    return Placement(service_id, model, boundaries, assignment)


def random_mapping(
    workload: Workload,
    components: Sequence[str],
    max_partitions: int,
    rng: np.random.Generator,
) -> Mapping:
    return Mapping(
        tuple(
            random_placement(service_id, model, components, max_partitions, rng)
            for service_id, model in workload.items()
        )
    )
