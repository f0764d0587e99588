"""
Synthetic model profiles, the service catalog and workload sampling
"""
import heapq
import math
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.extractors.yaml_extractor import YamlExtractor
from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger
from src.validators.config_validator import CatalogValidator
from src.workload.models import (
    DnnModel,
    LayerProfile,
    ModelFamily,
    ServiceSpec,
    WorkloadSchedule,
)

logger = setup_logger(__name__)

SECONDS_PER_DAY = 86400.0
SECONDS_PER_HOUR = 3600.0

COST_RANGE_MFLOPS = (10.0, 500.0)
ACTIVATION_RANGE_MB = (0.1, 8.0)
# mean of a log-uniform draw on COST_RANGE_MFLOPS
MEAN_LAYER_COST = (COST_RANGE_MFLOPS[1] - COST_RANGE_MFLOPS[0]) / math.log(
    COST_RANGE_MFLOPS[1] / COST_RANGE_MFLOPS[0]
)

RngLike = Union[int, np.random.Generator]


@dataclass(frozen=True)
class ProfileSettings:
    """Scenario-level knobs of the synthetic profiles"""

    cost_factor: float = 0.7
    accuracy_drop: float = 1.5
    accuracy_tolerance: float = 5.0


@dataclass(frozen=True)
class FamilyTemplate:
    """One row of the service table: variant names, depths and level-1 cost"""

    family_id: str
    variant_names: Tuple[str, ...]
    layer_counts: Tuple[int, ...]
    base_cost: float  # MFLOPs of the level-1 model
    base_accuracy: float


# Level-1 costs and accuracies follow the published torchvision figures of the
# named architectures; layer counts are block-level partitions ordered by depth.
SERVICE_TEMPLATES: Dict[str, FamilyTemplate] = {
    "Object Detection": FamilyTemplate(
        "mnasnet", ("MNASNet1_3", "MNASNet1_0", "MNASNet0_75"), (10, 10, 10), 530.0, 76.5
    ),
    "Object Classification": FamilyTemplate(
        "efficientnet",
        ("EfficientNet_v2_s", "EfficientNet_b1", "EfficientNet_b3"),
        (12, 9, 10),
        8370.0,
        84.2,
    ),
    "Object Tracking": FamilyTemplate(
        "resnet", ("ResNet152", "ResNet101", "ResNet50"), (16, 12, 8), 11510.0, 82.3
    ),
    "Depth Estimation": FamilyTemplate(
        "resnet", ("ResNet152", "ResNet101", "ResNet50"), (16, 12, 8), 11510.0, 82.3
    ),
    "Abnormal Behavior Detection": FamilyTemplate(
        "vgg", ("VGG19", "VGG16", "VGG13"), (13, 11, 9), 19630.0, 74.2
    ),
    "Facial Expression Recognition": FamilyTemplate(
        "densenet", ("DenseNet169", "DenseNet161", "DenseNet121"), (14, 12, 10), 3360.0, 75.6
    ),
}


def _log_uniform(rng: np.random.Generator, low: float, high: float, size: int) -> np.ndarray:
    return np.exp(rng.uniform(math.log(low), math.log(high), size=size))


def generate_synthetic_model(
    family_id: str,
    quality_level: int,
    layer_count: int,
    rng: np.random.Generator,
    *,
    base_cost: Optional[float] = None,
    base_accuracy: float = 80.0,
    cost_factor: float = 0.7,
    accuracy_drop: float = 1.5,
    name: Optional[str] = None,
) -> DnnModel:
    """
    Draw a layer profile whose total cost is base_cost * cost_factor**(level-1).

    Per-layer shapes are log-uniform in [10, 500] MFLOPs and rescaled to the
    level's total, so a template base_cost can push single layers outside that
    range while the spread between layers stays within 50x. Activation sizes
    are log-uniform in [0.1, 8] MB. Without an explicit base_cost the level-1
    total is layer_count times the mean layer cost.
    """
    if layer_count < 1:
        raise ConfigurationError(f"layer_count must be >= 1, got {layer_count}")
    if quality_level < 1:
        raise ConfigurationError(f"quality_level must be >= 1, got {quality_level}")

    level_one_total = base_cost if base_cost is not None else layer_count * MEAN_LAYER_COST
    target_total = level_one_total * cost_factor ** (quality_level - 1)

    shape = _log_uniform(rng, *COST_RANGE_MFLOPS, size=layer_count)
    costs = shape * (target_total / shape.sum())
    activations = _log_uniform(rng, *ACTIVATION_RANGE_MB, size=layer_count)

    layers = tuple(
        LayerProfile(layer_id=i, compute_cost=float(costs[i]), activation_size=float(activations[i]))
        for i in range(layer_count)
    )
    accuracy = max(0.0, base_accuracy - accuracy_drop * (quality_level - 1))
    return DnnModel(
        name=name or f"{family_id}-L{quality_level}",
        layers=layers,
        accuracy=accuracy,
        quality_level=quality_level,
        family_id=family_id,
    )


def build_family(template: FamilyTemplate, settings: ProfileSettings = ProfileSettings()) -> ModelFamily:
    # stable per-family stream so every service sharing an architecture gets the same profiles
    rng = np.random.default_rng(zlib.crc32(template.family_id.encode("utf-8")))
    variants = tuple(
        generate_synthetic_model(
            template.family_id,
            level,
            layer_count,
            rng,
            base_cost=template.base_cost,
            base_accuracy=template.base_accuracy,
            cost_factor=settings.cost_factor,
            accuracy_drop=settings.accuracy_drop,
            name=variant_name,
        )
        for level, (variant_name, layer_count) in enumerate(
            zip(template.variant_names, template.layer_counts), start=1
        )
    )
    return ModelFamily(family_id=template.family_id, variants=variants)


def family_from_service_table(
    service_name: str,
    settings: ProfileSettings = ProfileSettings(),
    templates: Optional[Dict[str, FamilyTemplate]] = None,
) -> ModelFamily:
    """3-level family of a catalog service, variant names attached to synthetic profiles"""
    templates = templates if templates is not None else SERVICE_TEMPLATES
    if service_name not in templates:
        raise ConfigurationError(
            f"Unknown service '{service_name}'; known services: {sorted(templates)}"
        )
    return build_family(templates[service_name], settings)


@dataclass(frozen=True)
class ServiceCatalog:
    """Service name -> mixed-quality family"""

    families: Dict[str, ModelFamily]
    accuracy_tolerance: float = 5.0

    def names(self) -> List[str]:
        return sorted(self.families)

    def all_models(self) -> List[DnnModel]:
        seen: Dict[str, DnnModel] = {}
        for name in self.names():
            for variant in self.families[name].variants:
                seen.setdefault(variant.name, variant)
        return [seen[key] for key in sorted(seen)]


def default_catalog(settings: ProfileSettings = ProfileSettings()) -> ServiceCatalog:
    families = {name: family_from_service_table(name, settings) for name in SERVICE_TEMPLATES}
    return ServiceCatalog(families=families, accuracy_tolerance=settings.accuracy_tolerance)


def catalog_from_config(config: dict) -> ServiceCatalog:
    """Build a catalog from the validated contents of services.yaml"""
    profile = config.get("profile", {})
    settings = ProfileSettings(
        cost_factor=float(profile.get("cost_factor", 0.7)),
        accuracy_drop=float(profile.get("accuracy_drop", 1.5)),
        accuracy_tolerance=float(profile.get("accuracy_tolerance", 5.0)),
    )
    templates = {}
    for service_name, row in config["services"].items():
        templates[service_name] = FamilyTemplate(
            family_id=str(row["family"]),
            variant_names=tuple(str(v) for v in row["variants"]),
            layer_counts=tuple(int(c) for c in row["layer_counts"]),
            base_cost=float(row["base_cost_mflops"]),
            base_accuracy=float(row["base_accuracy"]),
        )
    families = {name: build_family(template, settings) for name, template in templates.items()}
    return ServiceCatalog(families=families, accuracy_tolerance=settings.accuracy_tolerance)


def load_catalog(path: Optional[Path] = None) -> ServiceCatalog:
    """Load services.yaml through the YAML extractor and catalog validator"""
    if path is None:
        return default_catalog()

    config = YamlExtractor(path, source_name="catalog").run()
    CatalogValidator().check_config(config)
    catalog = catalog_from_config(config)
    logger.info(f"Loaded {len(catalog.families)} services from {path}")
    return catalog


def enforce_concurrency_cap(services: Iterable[ServiceSpec], cap: Optional[int]) -> List[ServiceSpec]:
    """Drop arrivals that would push concurrency above cap (departures free a slot first)"""
    ordered = sorted(services, key=lambda s: (s.arrival_time, s.service_id))
    if cap is None:
        return ordered

    admitted: List[ServiceSpec] = []
    running: List[float] = []
    for service in ordered:
        while running and running[0] <= service.arrival_time:
            heapq.heappop(running)
        if len(running) < cap:
            heapq.heappush(running, service.departure_time)
            admitted.append(service)
    return admitted


def _draw_services(
    catalog: ServiceCatalog,
    count: int,
    rng: np.random.Generator,
    window: Tuple[float, float],
    duration_range: Tuple[float, float],
    latency_threshold: float,
    id_prefix: str,
    horizon_end: Optional[float] = None,
) -> List[ServiceSpec]:
    names = catalog.names()
    start, end = window
    last_departure = horizon_end if horizon_end is not None else end
    services = []
    for i in range(count):
        name = names[int(rng.integers(len(names)))]
        arrival = float(rng.uniform(start, end))
        duration = float(rng.uniform(*duration_range))
        departure = min(arrival + duration, last_departure)
        if departure <= arrival:
            departure = arrival + 1.0
        services.append(
            ServiceSpec(
                service_id=f"{id_prefix}{i:02d}",
                family=catalog.families[name],
                latency_threshold=latency_threshold,
                accuracy_tolerance=catalog.accuracy_tolerance,
                arrival_time=arrival,
                departure_time=departure,
            )
        )
    return services


def sample_workload(
    service_catalog: ServiceCatalog,
    min_count: int,
    max_count: int,
    rng: RngLike,
    *,
    window: Tuple[float, float] = (0.0, SECONDS_PER_DAY),
    duration_range: Tuple[float, float] = (SECONDS_PER_HOUR, 4 * SECONDS_PER_HOUR),
    latency_threshold: float = 2000.0,
    max_concurrent: Optional[int] = None,
    id_prefix: str = "svc-",
    horizon_end: Optional[float] = None,
) -> WorkloadSchedule:
    """
    Draw between min_count and max_count services (uniform) from the catalog.

    Arrivals are uniform over the window and durations uniform over
    duration_range; a pure function of its arguments when rng is a seed.
    """
    if not service_catalog.families:
        raise ConfigurationError("Service catalog is empty")
    if min_count > max_count:
        raise ConfigurationError(f"min_count {min_count} exceeds max_count {max_count}")
    if min_count < 0:
        raise ConfigurationError("min_count must be >= 0")

    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    generator = np.random.default_rng(rng)
    count = int(generator.integers(min_count, max_count + 1))
    services = _draw_services(
        service_catalog,
        count,
        generator,
        window,
        duration_range,
        latency_threshold,
        id_prefix,
        horizon_end,
    )
    services = enforce_concurrency_cap(services, max_concurrent)
    return WorkloadSchedule(services=tuple(services), seed=seed, max_concurrent=max_concurrent)


@dataclass(frozen=True)
class WorkloadIntensity:
    """Per-day request volume of a scenario"""

    name: str
    min_per_day: int
    max_per_day: int
    min_duration_h: float
    max_duration_h: float
    max_concurrent: int


INTENSITY_PRESETS: Dict[str, WorkloadIntensity] = {
    "high": WorkloadIntensity("high", 20, 30, 6.0, 14.0, 15),
    "medium": WorkloadIntensity("medium", 10, 16, 4.0, 10.0, 10),
}


def generate_schedule(
    catalog: ServiceCatalog,
    intensity: WorkloadIntensity,
    days: int,
    seed: int,
    latency_threshold: float,
) -> WorkloadSchedule:
    """One sample_workload draw per simulated day, merged under the scenario's concurrency cap"""
    rng = np.random.default_rng(seed)
    candidates: List[ServiceSpec] = []
    for day in range(days):
        daily = sample_workload(
            catalog,
            intensity.min_per_day,
            intensity.max_per_day,
            rng,
            window=(day * SECONDS_PER_DAY, (day + 1) * SECONDS_PER_DAY),
            duration_range=(
                intensity.min_duration_h * SECONDS_PER_HOUR,
                intensity.max_duration_h * SECONDS_PER_HOUR,
            ),
            latency_threshold=latency_threshold,
            id_prefix=f"d{day}-s",
            horizon_end=days * SECONDS_PER_DAY,
        )
        candidates.extend(daily.services)

    admitted = enforce_concurrency_cap(candidates, intensity.max_concurrent)
    logger.info(
        f"Generated {len(admitted)} services over {days} days "
        f"({len(candidates) - len(admitted)} dropped by the concurrency cap of {intensity.max_concurrent})"
    )
    return WorkloadSchedule(
        services=tuple(admitted),
        seed=seed,
        max_concurrent=intensity.max_concurrent,
        metadata={"intensity": intensity.name},
    )


def services_by_id(services: Sequence[ServiceSpec]) -> Dict[str, ServiceSpec]:
    return {service.service_id: service for service in services}
