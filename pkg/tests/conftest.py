"""
Shared fixtures: default hardware, small hand-built models and scenario configs
"""
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np
import pytest

from src.carbon.forecast import CiForecast
from src.carbon.intensity import CiTrace
from src.device.hardware import default_device
from src.device.modes import default_mode_lut, mode_by_id
from src.workload.generator import default_catalog
from src.workload.models import DnnModel, LayerProfile, ModelFamily, ServiceSpec

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "config"


def make_model(
    name: str,
    costs: Sequence[float],
    *,
    activation: float = 1.0,
    accuracy: float = 80.0,
    level: int = 1,
    family_id: str = "test",
) -> DnnModel:
    layers = tuple(
        LayerProfile(layer_id=i, compute_cost=float(cost), activation_size=activation)
        for i, cost in enumerate(costs)
    )
    return DnnModel(name, layers, accuracy, quality_level=level, family_id=family_id)


def make_family(
    family_id: str, level_one_costs: Sequence[float], factor: float = 0.7, drop: float = 1.0
) -> ModelFamily:
    """Three levels, each costing factor times the previous and drop points less accurate"""
    variants = tuple(
        make_model(
            f"{family_id}-L{level}",
            [cost * factor ** (level - 1) for cost in level_one_costs],
            accuracy=80.0 - drop * (level - 1),
            level=level,
            family_id=family_id,
        )
        for level in (1, 2, 3)
    )
    return ModelFamily(family_id, variants)


def make_service(
    service_id: str,
    family: ModelFamily,
    threshold: float = 2000.0,
    tolerance: float = 5.0,
    arrival: float = 0.0,
    departure: float = 3600.0,
) -> ServiceSpec:
    return ServiceSpec(service_id, family, threshold, tolerance, arrival, departure)


def make_forecast(values: Sequence[float], step: float = 900.0) -> CiForecast:
    timestamps = np.arange(len(values)) * step
    return CiForecast.from_horizon(0.0, CiTrace(timestamps, np.asarray(values, dtype=float)), "test")


def scenario_config(**overrides: Any) -> Dict[str, Any]:
    """A one-day relaxed scenario on the week1 profile with a small search budget"""
    config: Dict[str, Any] = {
        "name": "test-day",
        "days": 1,
        "seed": 11,
        "trace": {"profile": "week1"},
        "workload": {"intensity": "medium"},
        "threshold": "relaxed",
        "policy": "carbon-aware",
        "search": {"max_evaluations": 16, "batch_size": 8, "leaf_size": 20, "max_partitions": 2},
        "monitor_period_s": 3600,
    }
    config.update(overrides)
    return config


@pytest.fixture
def device():
    return default_device()


@pytest.fixture
def modes():
    return default_mode_lut()


@pytest.fixture
def mode_1(modes):
    return mode_by_id(modes, 1)


@pytest.fixture
def mode_8(modes):
    return mode_by_id(modes, 8)


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture
def small_model():
    return make_model("small", [300.0, 200.0, 100.0], activation=2.0)


@pytest.fixture
def heavy_family():
    """3000 MFLOPs at level 1: 50 ms on the GPU at full clock, 35 ms at level 2"""
    return make_family("heavy", [1000.0, 2000.0])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
