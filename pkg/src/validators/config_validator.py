"""
Validators for the YAML configs: service catalog, device and scenarios
"""
from typing import Any, Dict, List, Tuple

from src.utils.errors import ConfigurationError
from src.validators.base_validator import BaseValidator, require_number

COMPONENT_KINDS = ("cpu", "gpu")
THRESHOLD_PRESETS = ("relaxed", "strict")
TRACE_PROFILE_NAMES = ("week1", "week2", "week3")
EVALUATOR_KINDS = ("oracle", "estimator")


def _require_mapping(config: Any, what: str) -> Dict[str, Any]:
    if not isinstance(config, dict):
        raise ConfigurationError(f"{what} must be a mapping, got {type(config).__name__}")
    return config


class CatalogValidator(BaseValidator):
    """One record per service row of services.yaml"""

    def __init__(self):
        super().__init__("catalog")

    def validate_record(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        errors: List[str] = []
        name = record.get("service", "?")

        if not record.get("family"):
            errors.append(f"{name}: missing family")
        variants = record.get("variants")
        layer_counts = record.get("layer_counts")
        if not isinstance(variants, list) or not variants:
            errors.append(f"{name}: variants must be a non-empty list")
        if not isinstance(layer_counts, list) or not layer_counts:
            errors.append(f"{name}: layer_counts must be a non-empty list")
        elif isinstance(variants, list) and len(layer_counts) != len(variants):
            errors.append(f"{name}: {len(variants)} variants but {len(layer_counts)} layer counts")
        elif any(not isinstance(count, int) or count < 1 for count in layer_counts):
            errors.append(f"{name}: layer counts must be positive integers: {layer_counts}")

        field_errors: List[str] = []
        require_number(record, "base_cost_mflops", field_errors, positive=True)
        accuracy = require_number(record, "base_accuracy", field_errors, minimum=0)
        if accuracy is not None and accuracy > 100:
            field_errors.append(f"base_accuracy must be <= 100: {accuracy}")
        errors.extend(f"{name}: {error}" for error in field_errors)

        return len(errors) == 0, errors

    def check_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        config = _require_mapping(config, "services config")
        services = config.get("services")
        if not isinstance(services, dict) or not services:
            raise ConfigurationError("services config needs a non-empty 'services' mapping")

        profile = config.get("profile", {}) or {}
        profile_errors: List[str] = []
        if "cost_factor" in profile:
            factor = require_number(profile, "cost_factor", profile_errors, positive=True)
            if factor is not None and factor >= 1:
                profile_errors.append(f"cost_factor must be below 1: {factor}")
        for key in ("accuracy_drop", "accuracy_tolerance"):
            if key in profile:
                require_number(profile, key, profile_errors, minimum=0)
        if profile_errors:
            raise ConfigurationError("Invalid catalog profile: " + "; ".join(profile_errors))

        records = []
        for name, row in services.items():
            if not isinstance(row, dict):
                raise ConfigurationError(f"service '{name}' must be a mapping")
            records.append({"service": name, **row})
        self.check(records)
        return config


class DeviceValidator(BaseValidator):
    """One record per compute component of device.yaml, plus the device-wide fields"""

    def __init__(self):
        super().__init__("device")

    def validate_record(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        errors: List[str] = []
        component_id = record.get("id", "?")

        if not record.get("id"):
            errors.append("component without id")
        if record.get("kind") not in COMPONENT_KINDS:
            errors.append(f"{component_id}: kind must be one of {COMPONENT_KINDS}, got {record.get('kind')}")

        field_errors: List[str] = []
        require_number(record, "peak_gflops", field_errors, positive=True)
        require_number(record, "reference_freq_ghz", field_errors, positive=True)
        require_number(record, "dynamic_weight", field_errors, minimum=0)
        if "per_core" in record and not isinstance(record["per_core"], bool):
            field_errors.append("per_core must be a boolean")
        errors.extend(f"{component_id}: {error}" for error in field_errors)

        return len(errors) == 0, errors

    def validate_dataset(self, records: List[Dict[str, Any]]) -> List[str]:
        errors = []
        if not records:
            errors.append("device needs at least one compute component")
        ids = [record["id"] for record in records]
        if len(ids) != len(set(ids)):
            errors.append(f"duplicate component ids: {ids}")
        if records and sum(float(record["dynamic_weight"]) for record in records) <= 0:
            errors.append("dynamic weights must not all be zero")
        return errors

    def check_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        config = _require_mapping(config, "device config")
        errors: List[str] = []
        require_number(config, "max_cores", errors, minimum=1)
        require_number(config, "memory_bandwidth_gbps", errors, positive=True)
        require_number(config, "reference_mem_freq_ghz", errors, positive=True)
        require_number(config, "frame_interval_ms", errors, positive=True)
        require_number(config, "reference_power_w", errors, positive=True)
        fraction = require_number(config, "static_fraction", errors, minimum=0)
        if fraction is not None and fraction >= 1:
            errors.append(f"static_fraction must be below 1: {fraction}")
        if errors:
            raise ConfigurationError("Invalid device config: " + "; ".join(errors))

        components = config.get("components")
        if not isinstance(components, list):
            raise ConfigurationError("device config needs a 'components' list")
        self.check(components)
        return config


class ScenarioValidator(BaseValidator):
    """A scenario file is a single record"""

    def __init__(self):
        super().__init__("scenario")

    def validate_record(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        errors: List[str] = []

        if not record.get("name"):
            errors.append("missing scenario name")
        days = require_number(record, "days", errors, minimum=1)
        if days is not None and days != int(days):
            errors.append(f"days must be an integer: {days}")
        if "seed" in record and not isinstance(record["seed"], int):
            errors.append(f"seed must be an integer: {record['seed']}")

        trace = record.get("trace")
        if not isinstance(trace, dict) or not (trace.get("profile") or trace.get("path")):
            errors.append("trace must name a profile or a path")
        elif trace.get("profile") and trace["profile"] not in TRACE_PROFILE_NAMES:
            errors.append(f"unknown trace profile {trace['profile']}; known: {TRACE_PROFILE_NAMES}")

        workload = record.get("workload")
        if not isinstance(workload, dict) or not workload.get("intensity"):
            errors.append("workload must name an intensity")

        threshold = record.get("threshold")
        if threshold is not None and threshold not in THRESHOLD_PRESETS:
            errors.append(f"threshold must be one of {THRESHOLD_PRESETS}, got {threshold}")
        if "latency_threshold_ms" in record:
            require_number(record, "latency_threshold_ms", errors, positive=True)
        if threshold is None and "latency_threshold_ms" not in record:
            errors.append("either threshold or latency_threshold_ms is required")

        weights = record.get("weights", {}) or {}
        if not isinstance(weights, dict):
            errors.append("weights must be a mapping")
        else:
            w_latency = require_number(weights, "latency", errors, minimum=0) if "latency" in weights else 1.0
            w_power = require_number(weights, "power", errors, minimum=0) if "power" in weights else 0.0
            if w_latency == 0 and w_power == 0:
                errors.append("weights must not both be zero")

        search = record.get("search", {}) or {}
        if not isinstance(search, dict):
            errors.append("search must be a mapping")
        else:
            for key in ("max_evaluations", "batch_size", "leaf_size", "max_partitions"):
                if key in search:
                    value = require_number(search, key, errors, minimum=1)
                    if value is not None and value != int(value):
                        errors.append(f"search.{key} must be an integer: {value}")
            if "exploration" in search:
                require_number(search, "exploration", errors, positive=True)

        if "monitor_period_s" in record:
            require_number(record, "monitor_period_s", errors, positive=True)
        if "upgrades" in record and not isinstance(record["upgrades"], bool):
            errors.append("upgrades must be a boolean")
        evaluator = record.get("evaluator", "oracle")
        if evaluator not in EVALUATOR_KINDS:
            errors.append(f"evaluator must be one of {EVALUATOR_KINDS}, got {evaluator}")
        if evaluator == "estimator" and not record.get("estimator_path"):
            errors.append("evaluator 'estimator' needs an estimator_path")

        return len(errors) == 0, errors

    def check_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        config = _require_mapping(config, "scenario")
        self.check([config])
        return config
