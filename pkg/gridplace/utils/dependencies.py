"""
Shared command dependencies: settings, services and repositories for one run.
Also the output helpers every command uses.
"""

import argparse
from dataclasses import dataclass, field
import json
import logging
import sys
from typing import Optional, TextIO

import pandas as pd

from gridplace.config import Settings, get_settings
from gridplace.models.grid import GridModel, OperatingPoint
from gridplace.repositories.grid import GridRepository
from gridplace.repositories.report import ReportRepository
from gridplace.schemas.report import ReportBase
from gridplace.services.analysis import AnalysisService
from gridplace.services.grid import GridService

logger = logging.getLogger(__name__)


@dataclass
class CommandContext:
    """Everything a command handler needs."""

    settings: Settings
    analysis: AnalysisService
    grids: GridRepository
    reports: ReportRepository
    stdout: TextIO = field(default_factory=lambda: sys.stdout)

    def load_grid(self, args: argparse.Namespace) -> GridModel:
        return self.grids.load(args.grid)

    def operating_point(self, args: argparse.Namespace) -> OperatingPoint:
        """Grid file -> operating point, honoring --homogenize and --kron."""
        grid = self.load_grid(args)
        return self.analysis.prepare(
            grid,
            homogenize=getattr(args, "homogenize", False),
            kron=getattr(args, "kron", False),
        )

    def emit_report(self, report: ReportBase, output: Optional[str] = None) -> None:
        """Write a JSON report to output, or print it."""
        if output:
            path = self.reports.save_report(output, report)
            logger.info(f"Wrote {path}")
            return
        report = report.model_copy(
            update={
                "format_version": self.settings.report_format_version,
                "generated_by": f"{self.settings.app_name} {self.settings.app_version}",
            }
        )
        self.stdout.write(report.model_dump_json(indent=2) + "\n")

    def emit_frame(self, frame: pd.DataFrame, output: Optional[str] = None, fmt: str = "csv") -> None:
        """Write a table as CSV (or JSON records) to output, or print it."""
        if fmt == "json":
            content = json.dumps(frame.to_dict(orient="records"), indent=2) + "\n"
            if output:
                self.reports.write_text(output, content)
                logger.info(f"Wrote {output}")
            else:
                self.stdout.write(content)
            return
        if output:
            path = self.reports.save_frame(output, frame)
            logger.info(f"Wrote {path}")
            return
        self.stdout.write(self.reports.render_frame(frame))


def get_context(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> CommandContext:
    """
    Build the per-run dependencies from parsed arguments.

    Args:
        args: Parsed command line; --threads caps the worker pool
        stdout: Stream for printed output, sys.stdout by default
    """
    settings = get_settings()
    threads = getattr(args, "threads", None)
    grid_service = GridService(settings)
    return CommandContext(
        settings=settings,
        analysis=AnalysisService(settings, threads=threads),
        grids=GridRepository(grid_service),
        reports=ReportRepository(settings),
        stdout=stdout or sys.stdout,
    )
