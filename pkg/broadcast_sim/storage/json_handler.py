"""
JSON storage implementation.
"""

import json
from typing import Any, Dict, List, Optional, Union

from .base_storage import BaseStorage
from ..utils.errors import StorageError


class JSONStorage(BaseStorage):
    """JSON file storage handler."""

    extension = 'json'

    def save(self, data: Union[List[Dict], Dict[str, Any]], filename: Optional[str] = None) -> str:
        """Save a list of row objects or a single document to a JSON file."""
        filepath = self.output_dir / (filename or self._default_filename())

        try:
            with open(filepath, 'w', encoding='utf-8') as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
        except OSError as e:
            self.logger.error(f"Failed to save JSON to {filepath}: {e}")
            raise StorageError(f"Failed to save JSON to {filepath}: {e}", path=str(filepath)) from e
        self.logger.info(f"Data saved to {filepath}")
        return str(filepath)
