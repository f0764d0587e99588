"""
Report, comparison and search-trace writers
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from src.loaders.base_loader import BaseLoader
from src.runtime.simulator import SimulationReport

REPORT_FILE = "report.json"
DAILY_FILE = "daily.csv"
COMPARISON_FILE = "comparison.csv"
SEARCH_TRACE_FILE = "search_trace.csv"


def _plain(value: Any) -> Any:
    """numpy scalars and non-finite floats in JSON-safe form"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


class ReportLoader(BaseLoader):
    """Writes report.json (sorted keys), daily.csv and search_trace.csv"""

    def __init__(self):
        super().__init__("report")

    def write_frame(self, frame: pd.DataFrame, path: Union[str, Path]) -> Path:
        with self.atomic_path(path) as tmp:
            frame.to_csv(tmp, index=False, float_format="%.10g")
        return Path(path)

    def write_json(self, document: Dict[str, Any], path: Union[str, Path]) -> Path:
        return self.write_text(path, json.dumps(_plain(document), indent=2, sort_keys=True) + "\n")

    def load(self, data: SimulationReport, out_dir: Union[str, Path]) -> List[Path]:
        out_dir = Path(out_dir)
        written = [
            self.write_json(data.to_dict(), out_dir / REPORT_FILE),
            self.write_frame(data.daily, out_dir / DAILY_FILE),
            self.write_frame(data.search_trace, out_dir / SEARCH_TRACE_FILE),
        ]
        self.logger.info(f"Wrote {data.policy} report for {len(data.daily)} days to {out_dir}")
        return written

    def load_comparison(self, result: Dict[str, Any], out_dir: Union[str, Path]) -> List[Path]:
        """One report directory per policy plus comparison.csv"""
        out_dir = Path(out_dir)
        written: List[Path] = []
        for label, report in result["reports"].items():
            written.extend(self.load(report, out_dir / label.replace(":", "_")))
        written.append(self.write_frame(result["comparison"], out_dir / COMPARISON_FILE))
        self.logger.info(f"Wrote comparison of {len(result['reports'])} policies to {out_dir}")
        return written
