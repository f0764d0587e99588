from typing import Any, Dict, List, Tuple

from src.validators.base_validator import BaseValidator, require_number

MODE_COLUMNS = ("mode", "cores", "f_cpu_ghz", "f_gpu_ghz", "f_mem_ghz", "p_max_w")


class ModeValidator(BaseValidator):
    """Rows of the operating-mode lookup table"""

    def __init__(self):
        super().__init__("modes")

    def validate_record(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        errors: List[str] = []
        label = f"mode {record.get('mode', '?')}"

        mode_id = require_number(record, "mode", errors, minimum=1)
        cores = require_number(record, "cores", errors, minimum=1)
        for column in ("f_cpu_ghz", "f_gpu_ghz", "f_mem_ghz", "p_max_w"):
            require_number(record, column, errors, positive=True)

        if mode_id is not None and mode_id != int(mode_id):
            errors.append(f"mode must be an integer: {mode_id}")
        if cores is not None and cores != int(cores):
            errors.append(f"cores must be an integer: {cores}")

        errors = [f"{label}: {error}" for error in errors]
        return len(errors) == 0, errors

    def validate_dataset(self, records: List[Dict[str, Any]]) -> List[str]:
        errors = []
        if len(records) < 2:
            errors.append(f"at least 2 operating modes are required, got {len(records)}")

        ids = [int(record["mode"]) for record in records]
        duplicates = sorted({mode_id for mode_id in ids if ids.count(mode_id) > 1})
        if duplicates:
            errors.append(f"duplicate mode ids: {duplicates}")
            return errors

        ordered = sorted(records, key=lambda record: int(record["mode"]))
        for upper, lower in zip(ordered, ordered[1:]):
            if not float(lower["p_max_w"]) < float(upper["p_max_w"]):
                errors.append(
                    f"power caps must strictly decrease with mode id: mode {lower['mode']} "
                    f"({lower['p_max_w']} W) after mode {upper['mode']} ({upper['p_max_w']} W)"
                )
        return errors
