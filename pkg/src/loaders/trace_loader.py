from pathlib import Path
from typing import List, Union

from src.carbon.intensity import CiTrace
from src.loaders.base_loader import BaseLoader


class TraceLoader(BaseLoader):
    """Writes a CI trace as timestamp_seconds,ci_gco2_per_kwh"""

    def __init__(self):
        super().__init__("ci_trace")

    def load(self, data: CiTrace, out_dir: Union[str, Path], filename: str = "") -> List[Path]:
        path = Path(out_dir) / (filename or f"{data.name}.csv")
        with self.atomic_path(path) as tmp:
            data.to_frame().to_csv(tmp, index=False)
        self.logger.info(f"Wrote {data.values.size} CI samples to {path}")
        return [path]
