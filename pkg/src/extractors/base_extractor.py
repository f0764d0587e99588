"""
Base extractor class that all file readers inherit from
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Union

from src.utils.logger import setup_logger


class BaseExtractor(ABC):
    """Abstract base class for config and trace readers"""

    def __init__(self, path: Union[str, Path], source_name: str):
        self.path = Path(path)
        self.source_name = source_name
        self.extracted_data: Any = None
        self.logger = setup_logger(f"extractor.{source_name}")

    @abstractmethod
    def extract(self) -> Any:
        """
        Read the source file
        Must be implemented by child classes
        """
        pass

    def record_count(self) -> int:
        if self.extracted_data is None:
            return 0
        try:
            return len(self.extracted_data)
        except TypeError:
            return 1

    def run(self) -> Any:
        """
        Run the extraction process

        Returns:
            Extracted data
        """
        self.logger.debug(f"Starting extraction of {self.source_name} from {self.path}")

        try:
            self.extracted_data = self.extract()
            self.logger.info(
                f"Extraction complete: {self.record_count()} records of {self.source_name} "
                f"from {self.path.name}"
            )
            return self.extracted_data
        except Exception as e:
            self.logger.error(f"Extraction failed for {self.source_name}: {e}")
            raise

    def get_metadata(self) -> Dict[str, Any]:
        """Get extraction metadata"""
        return {
            "source_name": self.source_name,
            "path": str(self.path),
            "record_count": self.record_count(),
        }
