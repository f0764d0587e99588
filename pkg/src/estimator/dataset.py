"""
Oracle-labelled training data: random workloads and mappings per operating mode
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.device.hardware import Device, default_device
from src.device.mapping import random_mapping
from src.device.modes import OperatingMode
from src.device.oracle import oracle_evaluate
from src.estimator.encoding import EncodedSequence, encode, feature_names, summarize
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger
from src.workload.generator import ServiceCatalog, default_catalog

logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class TrainingSample:
    sequence: EncodedSequence
    latency: float  # ms, mean over the workload's services
    power: float  # W
    mode_id: int


@dataclass(frozen=True, eq=False)
class TrainingDataset:
    samples: Tuple[TrainingSample, ...]
    features: np.ndarray  # one summary row per sample
    seed: Optional[int]
    per_mode_count: int
    feature_names: Tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def latencies(self) -> np.ndarray:
        return np.array([sample.latency for sample in self.samples])

    @property
    def powers(self) -> np.ndarray:
        return np.array([sample.power for sample in self.samples])

    @property
    def mode_ids(self) -> np.ndarray:
        return np.array([sample.mode_id for sample in self.samples])

    def counts_per_mode(self) -> Dict[int, int]:
        ids, counts = np.unique(self.mode_ids, return_counts=True)
        return {int(mode_id): int(count) for mode_id, count in zip(ids, counts)}

    def to_frame(self) -> pd.DataFrame:
        """Summary features plus labels, one row per sample"""
        df = pd.DataFrame(self.features, columns=list(self.feature_names))
        df.insert(0, "mode_id", self.mode_ids)
        df["n_tokens"] = [len(sample.sequence) for sample in self.samples]
        df["latency_ms"] = self.latencies
        df["power_w"] = self.powers
        return df


def generate_dataset(
    mode_lut: Sequence[OperatingMode],
    per_mode_count: int,
    rng: Union[int, np.random.Generator],
    *,
    catalog: Optional[ServiceCatalog] = None,
    device: Optional[Device] = None,
    dnn_range: Tuple[int, int] = (5, 10),
    max_partitions: int = 3,
) -> TrainingDataset:
    """
    For every mode draw per_mode_count workloads of dnn_range[0]..dnn_range[1]
    models (any quality level from the catalog), map each randomly and label it
    with the oracle's mean latency and total power.
    """
    if per_mode_count < 1:
        raise ConfigurationError(f"per_mode_count must be >= 1, got {per_mode_count}")

    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    generator = np.random.default_rng(rng)
    catalog = catalog or default_catalog()
    device = device or default_device()
    models = catalog.all_models()
    components = list(device.component_ids)

    samples: List[TrainingSample] = []
    rows: List[np.ndarray] = []
    for mode in mode_lut:
        for _ in range(per_mode_count):
            n_dnns = int(generator.integers(dnn_range[0], dnn_range[1] + 1))
            picks = generator.integers(len(models), size=n_dnns)
            workload = {f"s{i:02d}": models[int(pick)] for i, pick in enumerate(picks)}
            mapping = random_mapping(workload, components, max_partitions, generator)

            result = oracle_evaluate(mapping, mode, device)
            sequence = encode(mapping, mode, device)
            samples.append(
                TrainingSample(sequence, result.mean_latency, result.total_power, mode.mode_id)
            )
            rows.append(summarize(sequence, mode, device))
        logger.debug(f"Generated {per_mode_count} samples for mode {mode.mode_id}")

    logger.info(f"Generated dataset of {len(samples)} samples over {len(mode_lut)} modes")
    return TrainingDataset(
        samples=tuple(samples),
        features=np.vstack(rows),
        seed=seed,
        per_mode_count=per_mode_count,
        feature_names=tuple(feature_names(device)),
    )
