"""
Report repository: JSON reports and CSV tables.
"""

from io import StringIO
import logging
from pathlib import Path
from typing import Optional

import pandas as pd
from pydantic import ValidationError as PydanticValidationError

from gridplace.config import Settings, get_settings
from gridplace.repositories.base import BaseFileRepository, PathLike
from gridplace.schemas.report import PlacementDocument, ReportBase
from gridplace.services.error_handler import ErrorHandlerService
from gridplace.utils.exceptions import GridParseError

logger = logging.getLogger(__name__)


class ReportRepository(BaseFileRepository):
    """Repository for command outputs."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def save_report(self, path: PathLike, report: ReportBase) -> Path:
        """Write a report with format version and generator stamped in."""
        report = report.model_copy(
            update={
                "format_version": self.settings.report_format_version,
                "generated_by": f"{self.settings.app_name} {self.settings.app_version}",
            }
        )
        return self.write_json(path, report.model_dump(mode="json"))

    def save_frame(self, path: PathLike, frame: pd.DataFrame) -> Path:
        """Write a table as CSV without the index."""
        buffer = StringIO()
        frame.to_csv(buffer, index=False)
        return self.write_text(path, buffer.getvalue())

    @staticmethod
    def render_frame(frame: pd.DataFrame) -> str:
        buffer = StringIO()
        frame.to_csv(buffer, index=False)
        return buffer.getvalue()

    def load_placement(self, path: PathLike) -> PlacementDocument:
        """
        Read a placement file written by `optimize`.

        Raises:
            GridParseError: If the file is not a valid placement document
        """
        try:
            return PlacementDocument.model_validate(self.read_json(path))
        except (OSError, ValueError) as e:
            if isinstance(e, PydanticValidationError):
                details = ErrorHandlerService.validation_details(e)
                raise GridParseError(f"invalid placement file {path}", details)
            raise GridParseError(f"cannot read placement file {path}: {e}")
