"""
Command-line sub-commands of gridplace.
Each module registers its parsers and handlers on the shared sub-parser set.
"""

import argparse

from gridplace import __version__
from gridplace.commands import analysis, grid, placement
from gridplace.commands.common import positive_int


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with every sub-command registered."""
    parser = argparse.ArgumentParser(
        prog="gridplace",
        description="Frequency-disturbance measures, sensitivities and placement of inertia and damping.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=positive_int, help="Worker threads, GRIDPLACE_THREADS by default")
    parser.add_argument("--schema", action="store_true", help="Print the CSV column documentation and exit")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging level, GRIDPLACE_LOG_LEVEL by default",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    grid.register(subparsers)
    analysis.register(subparsers)
    placement.register(subparsers)
    return parser


__all__ = ["build_parser"]
