"""
YAML reader for mode tables, device files, service catalogs and scenarios
"""
from pathlib import Path
from typing import Any, Dict, Union

from src.extractors.base_extractor import BaseExtractor
from src.utils.config import load_yaml


class YamlExtractor(BaseExtractor):
    """Reads one YAML mapping (modes, device, catalog or scenario)"""

    def __init__(self, path: Union[str, Path], source_name: str = "yaml"):
        super().__init__(path, source_name)

    def extract(self) -> Dict[str, Any]:
        return load_yaml(self.path)
