"""
Versioned joblib artifacts for training datasets and trained estimators
"""
from pathlib import Path
from typing import Any, List, Union

import joblib

from src.estimator.dataset import TrainingDataset
from src.estimator.model import Estimator
from src.loaders.base_loader import BaseLoader
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

FORMAT_VERSION = 1
DATASET_FORMAT = "greenedge.dataset"
ESTIMATOR_FORMAT = "greenedge.estimator"


class ArtifactLoader(BaseLoader):
    """Wraps a payload as {"format", "format_version", "payload"} and dumps it with joblib"""

    def __init__(self, artifact_format: str):
        super().__init__(artifact_format.split(".")[-1])
        self.artifact_format = artifact_format

    def load(self, data: Any, out_dir: Union[str, Path]) -> List[Path]:
        path = Path(out_dir)
        envelope = {
            "format": self.artifact_format,
            "format_version": FORMAT_VERSION,
            "payload": data,
        }
        with self.atomic_path(path) as tmp:
            joblib.dump(envelope, tmp, compress=3)
        self.logger.info(f"Saved {self.artifact_format} to {path}")
        return [path]

    def read(self, path: Union[str, Path]) -> Any:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Artifact not found: {path}")
        try:
            envelope = joblib.load(path)
        except Exception as e:
            raise ConfigurationError(f"Cannot read artifact {path}: {e}")

        if not isinstance(envelope, dict) or "payload" not in envelope:
            raise ConfigurationError(f"{path} is not a versioned artifact")
        if envelope.get("format") != self.artifact_format:
            raise ConfigurationError(
                f"{path} holds {envelope.get('format')!r}, expected {self.artifact_format!r}"
            )
        if envelope.get("format_version") != FORMAT_VERSION:
            raise ConfigurationError(
                f"{path} has format version {envelope.get('format_version')}, "
                f"this build reads version {FORMAT_VERSION}"
            )
        self.logger.debug(f"Loaded {self.artifact_format} from {path}")
        return envelope["payload"]


def save_dataset(dataset: TrainingDataset, path: Union[str, Path]) -> Path:
    return ArtifactLoader(DATASET_FORMAT).load(dataset, path)[0]


def load_dataset(path: Union[str, Path]) -> TrainingDataset:
    dataset = ArtifactLoader(DATASET_FORMAT).read(path)
    if not isinstance(dataset, TrainingDataset):
        raise ConfigurationError(f"{path} does not contain a training dataset")
    return dataset


def save_estimator(estimator: Estimator, path: Union[str, Path]) -> Path:
    return ArtifactLoader(ESTIMATOR_FORMAT).load(estimator, path)[0]


def load_estimator(path: Union[str, Path]) -> Estimator:
    estimator = ArtifactLoader(ESTIMATOR_FORMAT).read(path)
    if not isinstance(estimator, Estimator):
        raise ConfigurationError(f"{path} does not contain an estimator")
    logger.info(f"Loaded {estimator.n_classes}-class estimator from {path}")
    return estimator
