"""
Grid repository: grid JSON files in and out.
"""

import logging
from typing import Optional

from gridplace.models.grid import GridModel
from gridplace.repositories.base import BaseFileRepository, PathLike
from gridplace.services.grid import GridService

logger = logging.getLogger(__name__)


class GridRepository(BaseFileRepository):
    """Repository for grid documents."""

    def __init__(self, grid_service: Optional[GridService] = None):
        self.grid_service = grid_service or GridService()

    def load(self, path: PathLike) -> GridModel:
        """Load and validate a grid file."""
        return self.grid_service.load_grid(path)

    def save(self, path: PathLike, grid) -> None:
        """Write a GridModel or a grid dictionary."""
        payload = grid.to_dict() if isinstance(grid, GridModel) else grid
        self.write_json(path, payload)
        logger.info(f"Saved grid with {len(payload['buses'])} buses to {path}")
