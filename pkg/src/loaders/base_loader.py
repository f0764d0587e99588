"""
Base loader class for the files a run writes
"""
import os
import tempfile
from abc import ABC, abstractmethod
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, List, Union

from src.utils.logger import setup_logger


class BaseLoader(ABC):
    """Writers put every file in place atomically: temp sibling, then os.replace"""

    def __init__(self, loader_name: str):
        self.loader_name = loader_name
        self.logger = setup_logger(f"loader.{loader_name}")

    @abstractmethod
    def load(self, data: Any, out_dir: Union[str, Path]) -> List[Path]:
        """
        Write data under out_dir
        Must be implemented by child classes

        Returns:
            Paths written
        """
        pass

    @contextmanager
    def atomic_path(self, path: Union[str, Path]) -> Iterator[Path]:
        """Yield a temporary path in the target's directory; replace the target on success"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        os.close(fd)
        tmp_path = Path(tmp_name)
        try:
            yield tmp_path
            os.replace(tmp_path, path)
            self.logger.debug(f"Wrote {path}")
        except Exception as e:
            self.logger.error(f"Failed to write {path}: {e}")
            raise
        finally:
            if tmp_path.exists():
                tmp_path.unlink()

    def write_text(self, path: Union[str, Path], text: str) -> Path:
        with self.atomic_path(path) as tmp:
            tmp.write_text(text, encoding="utf-8")
        return Path(path)
