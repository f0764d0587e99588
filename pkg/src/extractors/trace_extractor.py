"""
CSV reader for carbon-intensity traces
"""
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from src.extractors.base_extractor import BaseExtractor
from src.utils.errors import ConfigurationError
from src.validators.trace_validator import TRACE_COLUMNS


class TraceExtractor(BaseExtractor):
    """Reads a CI trace CSV into row records"""

    def __init__(self, path: Union[str, Path]):
        super().__init__(path, "ci_trace")

    def read_csv_file(self) -> pd.DataFrame:
        if not self.path.exists():
            raise ConfigurationError(f"CI trace not found: {self.path}")

        try:
            df = pd.read_csv(self.path, encoding="utf-8")
        except UnicodeDecodeError:
            self.logger.warning(f"UTF-8 failed, trying latin-1 for {self.path.name}")
            df = pd.read_csv(self.path, encoding="latin-1")
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ConfigurationError(f"Unreadable CI trace {self.path}: {e}")

        missing = [column for column in TRACE_COLUMNS if column not in df.columns]
        if missing:
            raise ConfigurationError(
                f"CI trace {self.path} is missing header columns {missing}; "
                f"expected {list(TRACE_COLUMNS)}"
            )
        self.logger.debug(f"Read {len(df)} rows from {self.path.name}")
        return df

    def transform_dataframe_to_records(self, df: pd.DataFrame) -> List[Dict[str, Any]]:
        records = []
        for idx, row in enumerate(df[list(TRACE_COLUMNS)].itertuples(index=False)):
            records.append(
                {
                    "row_number": idx + 2,
                    "timestamp_seconds": row[0],
                    "ci_gco2_per_kwh": row[1],
                }
            )
        return records

    def extract(self) -> List[Dict[str, Any]]:
        return self.transform_dataframe_to_records(self.read_csv_file())
