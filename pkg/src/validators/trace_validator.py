from typing import Any, Dict, List, Tuple

from src.validators.base_validator import BaseValidator, require_number

TRACE_COLUMNS = ("timestamp_seconds", "ci_gco2_per_kwh")


class TraceValidator(BaseValidator):
    """Rows of a two-column CI trace CSV"""

    def __init__(self):
        super().__init__("ci_trace")

    def validate_record(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        errors: List[str] = []
        row = record.get("row_number", "?")

        timestamp = require_number(record, "timestamp_seconds", errors)
        ci = require_number(record, "ci_gco2_per_kwh", errors)

        if timestamp is not None and timestamp < 0:
            errors.append(f"Row {row}: timestamp must be >= 0: {timestamp}")
        if ci is not None and ci < 0:
            errors.append(f"Row {row}: carbon intensity must be >= 0: {ci}")

        return len(errors) == 0, errors

    def validate_dataset(self, records: List[Dict[str, Any]]) -> List[str]:
        if not records:
            return ["Trace has no samples"]

        errors = []
        previous = None
        for record in records:
            timestamp = float(record["timestamp_seconds"])
            if previous is not None and timestamp <= previous:
                errors.append(
                    f"Row {record.get('row_number', '?')}: timestamps must be strictly "
                    f"increasing ({timestamp} after {previous})"
                )
            previous = timestamp
        return errors
