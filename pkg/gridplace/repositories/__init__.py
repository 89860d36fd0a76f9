"""
File repositories for grids and reports.
"""

from .base import BaseFileRepository
from .grid import GridRepository
from .report import ReportRepository

__all__ = ["BaseFileRepository", "GridRepository", "ReportRepository"]
