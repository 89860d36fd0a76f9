"""
Command-line entry point.
Parses arguments, configures logging and converts failures into exit codes.
"""

import json
import logging
import sys
from typing import List, Optional, TextIO

from gridplace.commands import build_parser
from gridplace.config import get_settings
from gridplace.schemas.report import CSV_COLUMNS
from gridplace.services.error_handler import ErrorHandlerService
from gridplace.utils.dependencies import get_context
from gridplace.utils.exceptions import EXIT_OK, EXIT_USER_ERROR

logger = logging.getLogger(__name__)


def configure_logging(level: str) -> None:
    """Log records go to stderr so stdout stays machine-readable."""
    logging.basicConfig(
        level=level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Run one command.

    Returns:
        0 on success, 2 for invalid input, 3 for numerical failures
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    out = stdout or sys.stdout

    run_id = ErrorHandlerService.generate_run_id()
    try:
        settings = get_settings()
        configure_logging(args.log_level or settings.log_level)

        if args.schema:
            out.write(json.dumps(CSV_COLUMNS, indent=2) + "\n")
            return EXIT_OK
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_USER_ERROR

        logger.info(f"Starting {settings.app_name} v{settings.app_version} [{run_id}]: {args.command}")
        return args.handler(args, get_context(args, out))
    except Exception as e:
        payload, exit_code = ErrorHandlerService.handle(e, run_id)
        sys.stderr.write(json.dumps(payload, indent=2) + "\n")
        return exit_code


if __name__ == "__main__":
    sys.exit(main())
