"""
Base repository with file reads and atomic writes.
Writes go to a temporary file in the destination directory and are renamed into place.
"""

import json
import logging
import os
from pathlib import Path
import tempfile
from typing import Any, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class BaseFileRepository:
    """
    Base repository providing file operations shared by all repositories.
    """

    encoding = "utf-8"

    def read_text(self, path: PathLike) -> str:
        """Read a whole file as text."""
        return Path(path).read_text(encoding=self.encoding)

    def write_text(self, path: PathLike, content: str) -> Path:
        """
        Atomically write text to path.

        Args:
            path: Destination file
            content: Text to write

        Returns:
            Destination path

        Raises:
            OSError: If the directory is not writable
        """
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        handle, temporary = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
        try:
            with os.fdopen(handle, "w", encoding=self.encoding, newline="") as stream:
                stream.write(content)
            os.replace(temporary, target)
        except Exception:
            if os.path.exists(temporary):
                os.unlink(temporary)
            logger.error(f"Failed to write {target}")
            raise
        logger.debug(f"Wrote {target}")
        return target

    def read_json(self, path: PathLike) -> Any:
        return json.loads(self.read_text(path))

    def write_json(self, path: PathLike, payload: Any) -> Path:
        return self.write_text(path, json.dumps(payload, indent=2) + "\n")
