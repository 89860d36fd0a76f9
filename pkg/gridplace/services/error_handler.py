"""
Error handling service for consistent error payloads and exit codes.
Every failure reaching the command line passes through here exactly once.
"""

from datetime import datetime, timezone
import logging
import traceback
from typing import Any, Dict, List, Optional, Tuple
import uuid

from pydantic import ValidationError as PydanticValidationError

from gridplace.schemas.error import ErrorResponse
from gridplace.utils.exceptions import EXIT_NUMERICAL_ERROR, EXIT_USER_ERROR, GridPlaceError

logger = logging.getLogger(__name__)


class ErrorHandlerService:
    """
    Service for turning exceptions into structured error payloads.
    Payloads read {"error": {"code", "message", "timestamp", "run_id", "exit_code", "details"?}}.
    """

    @staticmethod
    def format_error_response(
        error_code: str,
        message: str,
        exit_code: int,
        details: Optional[List[Dict[str, Any]]] = None,
        run_id: Optional[str] = None,
    ) -> Dict[str, Any]:
        """
        Format an error payload in a consistent structure.

        Args:
            error_code: Error code identifier
            message: Human-readable error message
            exit_code: Process exit code
            details: Optional list of detailed error information
            run_id: Optional run identifier for tracking

        Returns:
            Formatted error dictionary
        """
        response = {
            "error": {
                "code": error_code,
                "message": message,
                "timestamp": ErrorHandlerService._get_current_timestamp(),
                "exit_code": exit_code,
            }
        }

        if details:
            response["error"]["details"] = details

        if run_id:
            response["error"]["run_id"] = run_id

        return ErrorResponse.model_validate(response).model_dump(exclude_none=True)

    @staticmethod
    def handle_gridplace_error(exception: GridPlaceError, run_id: Optional[str] = None) -> Tuple[Dict[str, Any], int]:
        """Payload and exit code for a known failure."""
        run_id = run_id or ErrorHandlerService.generate_run_id()
        logger.warning(
            f"Command failed [{run_id}]: {exception.error_code} - {exception.detail}",
            extra={
                "error_code": exception.error_code,
                "exit_code": exception.exit_code,
                "run_id": run_id,
            },
        )
        payload = ErrorHandlerService.format_error_response(
            error_code=exception.error_code,
            message=exception.detail,
            exit_code=exception.exit_code,
            details=exception.details,
            run_id=run_id,
        )
        return payload, exception.exit_code

    @staticmethod
    def handle_validation_error(
        exception: PydanticValidationError,
        run_id: Optional[str] = None,
    ) -> Tuple[Dict[str, Any], int]:
        """Pydantic validation failures become PARSE_ERROR with per-field details."""
        run_id = run_id or ErrorHandlerService.generate_run_id()
        details = ErrorHandlerService.validation_details(exception, include_input=True)

        logger.warning(
            f"Validation Error [{run_id}]: {len(details)} field errors",
            extra={"error_count": len(details), "run_id": run_id},
        )
        payload = ErrorHandlerService.format_error_response(
            error_code="PARSE_ERROR",
            message="Input validation failed",
            exit_code=EXIT_USER_ERROR,
            details=details,
            run_id=run_id,
        )
        return payload, EXIT_USER_ERROR

    @staticmethod
    def validation_details(exception: PydanticValidationError, include_input: bool = False) -> List[Dict[str, Any]]:
        """
        Flatten pydantic errors into {"field", "message", "type"} entries.
        Fields read as "buses -> 1 -> inertia". Scalar inputs are echoed when include_input is set.
        """
        details = []
        for error in exception.errors():
            detail = {
                "field": " -> ".join(str(loc) for loc in error["loc"]),
                "message": error["msg"],
                "type": error["type"],
            }
            if include_input:
                value = error.get("input")
                detail["input"] = value if isinstance(value, (str, int, float, bool)) else None
            details.append(detail)
        return details

    @staticmethod
    def handle_unexpected_error(exception: Exception, run_id: Optional[str] = None) -> Tuple[Dict[str, Any], int]:
        """Anything else is an internal failure, logged with its traceback."""
        run_id = run_id or ErrorHandlerService.generate_run_id()
        logger.error(
            f"Unexpected Error [{run_id}]: {type(exception).__name__} - {exception}",
            extra={
                "run_id": run_id,
                "exception_type": type(exception).__name__,
                "traceback": traceback.format_exc(),
            },
            exc_info=True,
        )
        payload = ErrorHandlerService.format_error_response(
            error_code="INTERNAL_ERROR",
            message=f"Unexpected {type(exception).__name__}: {exception}",
            exit_code=EXIT_NUMERICAL_ERROR,
            run_id=run_id,
        )
        return payload, EXIT_NUMERICAL_ERROR

    @staticmethod
    def handle(exception: Exception, run_id: Optional[str] = None) -> Tuple[Dict[str, Any], int]:
        """Dispatch on the exception type."""
        if isinstance(exception, GridPlaceError):
            return ErrorHandlerService.handle_gridplace_error(exception, run_id)
        if isinstance(exception, PydanticValidationError):
            return ErrorHandlerService.handle_validation_error(exception, run_id)
        return ErrorHandlerService.handle_unexpected_error(exception, run_id)

    @staticmethod
    def generate_run_id() -> str:
        """Short unique identifier of a command run."""
        return str(uuid.uuid4())[:8]

    @staticmethod
    def _get_current_timestamp() -> str:
        """Current UTC timestamp in ISO format."""
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")
