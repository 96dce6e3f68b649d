"""
Abstract base class for storage handlers.
"""

from abc import ABC, abstractmethod
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..utils.errors import StorageError


class BaseStorage(ABC):
    """Base class for result file writers."""

    extension = ''

    def __init__(self, config: Dict):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.output_dir = self._get_output_dir()

    def _get_output_dir(self) -> Path:
        """Get or create output directory."""
        output_dir = Path(self.config.get('output_dir', 'outputs'))
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create output directory {output_dir}: {e}", path=str(output_dir)) from e
        return output_dir

    def _default_filename(self) -> str:
        """<run name>_<unix time>.<ext>, with non-alphanumerics in the name replaced by '_'."""
        name_part = "".join(c if c.isalnum() else '_' for c in self.config.get('name', 'results'))
        return f"{name_part.lower()}_{int(time.time())}.{self.extension}"

    @abstractmethod
    def save(self, data: Union[List[Dict], Dict[str, Any]], filename: Optional[str] = None) -> str:
        """Save data to storage and return the file path."""
        pass
