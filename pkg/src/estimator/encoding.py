"""
Token encoding of a (mapping, mode) pair and its fixed-length summary
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.device.hardware import Device, default_device
from src.device.mapping import Mapping
from src.device.modes import OperatingMode

# layer descriptor (service ordinal, cost, activation), then component and its frequency
TOKEN_FIELDS = ("service_index", "compute_cost", "activation_size", "component_index", "frequency")
SERVICE, COST, ACTIVATION, COMPONENT, FREQUENCY = range(len(TOKEN_FIELDS))


@dataclass(frozen=True, eq=False)
class EncodedSequence:
    tokens: np.ndarray  # shape (total layers, len(TOKEN_FIELDS))
    mode_id: int

    def __len__(self) -> int:
        return int(self.tokens.shape[0])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EncodedSequence)
            and self.mode_id == other.mode_id
            and np.array_equal(self.tokens, other.tokens)
        )

    def __hash__(self) -> int:
        return hash((self.mode_id, self.tokens.tobytes()))


def encode(mapping: Mapping, mode: OperatingMode, device: Optional[Device] = None) -> EncodedSequence:
    """One token per layer, in service order then layer order"""
    device = device or default_device()
    blocks = []
    for service_index, placement in enumerate(mapping.placements):
        model = placement.model
        costs = np.diff(model.cost_prefix)
        for start, end, component_id in placement.partitions():
            block = np.empty((end - start, len(TOKEN_FIELDS)))
            block[:, SERVICE] = service_index
            block[:, COST] = costs[start:end]
            block[:, ACTIVATION] = model.activations[start:end]
            block[:, COMPONENT] = device.index_of(component_id)
            block[:, FREQUENCY] = device.component(component_id).frequency(mode)
            blocks.append(block)
    tokens = np.vstack(blocks) if blocks else np.empty((0, len(TOKEN_FIELDS)))
    return EncodedSequence(tokens=tokens, mode_id=mode.mode_id)


def feature_names(device: Optional[Device] = None) -> List[str]:
    device = device or default_device()
    names = []
    for component_id in device.component_ids:
        names += [
            f"{component_id}_demand_mflops",
            f"{component_id}_frequency_ghz",
            f"{component_id}_busy_ms",
            f"{component_id}_busy_per_service_ms",
            f"{component_id}_partitions",
            f"{component_id}_full_load_w",
        ]
    return names + [
        "crossing_volume_mb",
        "crossing_ms",
        "n_services",
        "n_layers",
        "active_cores",
        "mem_freq_ghz",
        "power_cap_w",
        "total_demand_mflops",
    ]


def summarize(
    sequence: EncodedSequence, mode: OperatingMode, device: Optional[Device] = None
) -> np.ndarray:
    """
    Fixed-length summary of a token sequence (see feature_names): per-component
    demand, frequency, busy time and partition count, plus crossing volume.

    A new partition starts at the first token of each service and wherever the
    component changes inside a service; the layer before such a change sends
    its activation across.
    """
    device = device or default_device()
    tokens = sequence.tokens
    n_components = len(device.component_ids)

    component = tokens[:, COMPONENT].astype(int)
    demand = np.bincount(component, weights=tokens[:, COST], minlength=n_components)

    same_service = tokens[1:, SERVICE] == tokens[:-1, SERVICE]
    changed = tokens[1:, COMPONENT] != tokens[:-1, COMPONENT]
    crossing = same_service & changed
    starts = np.concatenate(([len(tokens) > 0], ~same_service | changed))[: len(tokens)]
    partitions = np.bincount(component[starts], minlength=n_components)
    crossing_volume = float(tokens[:-1, ACTIVATION][crossing].sum()) if len(tokens) else 0.0

    n_services = len(np.unique(tokens[:, SERVICE]))
    features: List[float] = []
    for index, component_id in enumerate(device.component_ids):
        busy = demand[index] / device.throughput(component_id, mode)
        features += [
            demand[index],
            device.component(component_id).frequency(mode),
            busy,
            busy / n_services if n_services else 0.0,
            partitions[index],
            device.dynamic_power(component_id, mode),
        ]
    features += [
        crossing_volume,
        crossing_volume / device.bandwidth(mode),
        n_services,
        len(tokens),
        mode.active_cores,
        mode.mem_freq,
        mode.power_cap,
        float(demand.sum()),
    ]
    return np.asarray(features, dtype=float)


def mapping_features(mapping: Mapping, mode: OperatingMode, device: Optional[Device] = None) -> np.ndarray:
    return summarize(encode(mapping, mode, device), mode, device)
