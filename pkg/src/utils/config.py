"""
Environment settings and YAML config loading
"""
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import yaml
from dotenv import load_dotenv

from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger

load_dotenv()
logger = setup_logger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Settings:
    """Process-wide settings read from the environment"""

    config_dir: Path
    output_dir: Path
    enumeration_cap: int


def get_settings() -> Settings:
    """Read GREENEDGE_* variables, falling back to repo defaults"""
    try:
        enumeration_cap = int(os.getenv("GREENEDGE_ENUMERATION_CAP", "100000"))
    except ValueError as e:
        raise ConfigurationError(f"GREENEDGE_ENUMERATION_CAP must be an integer: {e}")

    return Settings(
        config_dir=Path(os.getenv("GREENEDGE_CONFIG_DIR", "config")),
        output_dir=Path(os.getenv("GREENEDGE_OUTPUT_DIR", "output")),
        enumeration_cap=enumeration_cap,
    )


def config_path(name: str) -> Path:
    """Path of a file inside the configured config directory"""
    return get_settings().config_dir / name


def load_yaml(path: PathLike) -> Dict[str, Any]:
    """Load a YAML mapping, turning I/O and syntax problems into ConfigurationError"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logger.error(f"Failed to parse {path}: {e}")
        raise ConfigurationError(f"Invalid YAML in {path}: {e}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Expected a mapping at the top of {path}")
    return data
