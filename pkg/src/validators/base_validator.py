from abc import ABC, abstractmethod
from typing import Any, Dict, List, Tuple

from src.utils.errors import ConfigurationError
from src.utils.logger import setup_logger


class BaseValidator(ABC):
    """Record-level validation with a batch summary"""

    def __init__(self, validator_name: str):
        self.validator_name = validator_name
        self.logger = setup_logger(f"validator.{validator_name}")

    @abstractmethod
    def validate_record(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        pass

    def validate_dataset(self, records: List[Dict[str, Any]]) -> List[str]:
        """Cross-record rules; empty list when the batch as a whole is consistent"""
        return []

    def validate_batch(self, records: List[Dict[str, Any]]) -> Dict[str, Any]:
        valid_records = []
        invalid_records = []

        for record in records:
            is_valid, errors = self.validate_record(record)

            if is_valid:
                valid_records.append(record)
            else:
                invalid_records.append({"record": record, "errors": errors})
                self.logger.warning(f"Invalid {self.validator_name} record: {record} - {errors}")

        summary = {
            "total_records": len(records),
            "valid_count": len(valid_records),
            "invalid_count": len(invalid_records),
            "valid_records": valid_records,
            "invalid_records": invalid_records,
            "dataset_errors": self.validate_dataset(records) if not invalid_records else [],
        }

        self.logger.debug(
            f"Validation complete: {summary['valid_count']}/{summary['total_records']} valid"
        )
        return summary

    def check(self, records: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        """Validate and raise one ConfigurationError listing every problem"""
        summary = self.validate_batch(records)
        problems = []
        for invalid in summary["invalid_records"]:
            problems.extend(invalid["errors"])
        problems.extend(summary["dataset_errors"])

        if problems:
            self.logger.error(f"{self.validator_name} validation failed with {len(problems)} errors")
            raise ConfigurationError(
                f"Invalid {self.validator_name} data: " + "; ".join(problems)
            )
        return summary["valid_records"]


def require_number(
    record: Dict[str, Any], field: str, errors: List[str], *, positive: bool = False, minimum=None
):
    """Append an error unless record[field] is numeric (and within bounds); returns the float or None"""
    if field not in record or record[field] is None or record[field] == "":
        errors.append(f"Missing required field: {field}")
        return None
    try:
        value = float(record[field])
    except (TypeError, ValueError):
        errors.append(f"{field} must be a number: {record[field]}")
        return None
    if value != value:  # NaN
        errors.append(f"{field} must not be NaN")
        return None
    if positive and value <= 0:
        errors.append(f"{field} must be positive: {value}")
    if minimum is not None and value < minimum:
        errors.append(f"{field} must be >= {minimum}: {value}")
    return value
