import os
import csv
import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config import OUTPUT_DIR

logger = logging.getLogger(__name__)


class FileHandler:
    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = output_dir or OUTPUT_DIR

        # Create output directory if it doesn't exist
        if not os.path.exists(self.output_dir):
            os.makedirs(self.output_dir)

    def path_for(self, filename: str) -> str:
        if os.path.isabs(filename):
            return filename
        return os.path.join(self.output_dir, filename)

    def write_json(self, filename: str, payload: Any) -> Tuple[bool, Optional[str], Optional[str]]:
        """
        Write a JSON document

        Args:
            filename: File name, relative to the output directory, or an absolute path
            payload: JSON-serializable data

        Returns:
            Tuple of (success: bool, file_path: Optional[str], error_message: Optional[str])
        """
        file_path = self.path_for(filename)
        try:
            parent = os.path.dirname(file_path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(file_path, 'w', encoding='utf-8') as f:
                json.dump(payload, f, indent=2, sort_keys=True)
                f.write('\n')
            logger.info(f"Wrote {file_path}")
            return True, file_path, None
        except (OSError, TypeError, ValueError) as e:
            logger.error(f"Error writing {file_path}: {str(e)}")
            return False, None, f"Write error: {str(e)}"

    def read_json(self, filename: str) -> Tuple[bool, Optional[Any], Optional[str]]:
        """
        Read a JSON document

        Returns:
            Tuple of (success: bool, payload, error_message: Optional[str])
        """
        file_path = self.path_for(filename)
        try:
            with open(file_path, encoding='utf-8') as f:
                return True, json.load(f), None
        except OSError as e:
            logger.error(f"Error reading {file_path}: {str(e)}")
            return False, None, f"Read error: {str(e)}"
        except json.JSONDecodeError as e:
            logger.error(f"Malformed JSON in {file_path}: {str(e)}")
            return False, None, f"Malformed JSON: {str(e)}"

    def write_csv(self, filename: str, rows: Sequence[Dict[str, Any]],
                  columns: Optional[List[str]] = None) -> Tuple[bool, Optional[str], Optional[str]]:
        """
        Write rows as CSV; columns default to every key in first-seen order
        """
        file_path = self.path_for(filename)
        if columns is None:
            columns = []
            for row in rows:
                columns.extend(key for key in row if key not in columns)
        try:
            parent = os.path.dirname(file_path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(file_path, 'w', newline='', encoding='utf-8') as f:
                writer = csv.DictWriter(f, fieldnames=columns, restval='', extrasaction='ignore')
                writer.writeheader()
                writer.writerows(rows)
            logger.info(f"Wrote {len(rows)} rows to {file_path}")
            return True, file_path, None
        except OSError as e:
            logger.error(f"Error writing {file_path}: {str(e)}")
            return False, None, f"Write error: {str(e)}"
