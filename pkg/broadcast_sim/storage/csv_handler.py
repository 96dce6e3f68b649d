"""
CSV storage implementation.
"""

from typing import Dict, List, Optional, Sequence

import pandas as pd

from .base_storage import BaseStorage
from ..utils.errors import StorageError


class CSVStorage(BaseStorage):
    """CSV storage handler."""

    extension = 'csv'

    def save(self, data: List[Dict], filename: Optional[str] = None,
             columns: Optional[Sequence[str]] = None) -> str:
        """
        Save rows to a CSV file. `columns` fixes the header and its order;
        otherwise the keys of the first row are used. None values are written
        as empty fields.
        """
        filepath = self.output_dir / (filename or self._default_filename())
        if columns is None:
            columns = list(data[0].keys()) if data else []
        if not data:
            self.logger.warning("No rows provided; writing header only.")

        try:
            # object dtype keeps integer columns with gaps as integers
            df = pd.DataFrame(data, columns=list(columns), dtype=object)
            df.to_csv(filepath, index=False, encoding='utf-8')
        except OSError as e:
            self.logger.error(f"Failed to save CSV to {filepath}: {e}")
            raise StorageError(f"Failed to save CSV to {filepath}: {e}", path=str(filepath)) from e
        self.logger.info(f"{len(data)} rows saved to {filepath}")
        return str(filepath)
