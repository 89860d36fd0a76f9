"""
Error payload schemas.
Every failure printed by the command line has this shape.
"""

from typing import Any, List, Optional

from pydantic import BaseModel, Field


class ErrorDetail(BaseModel):
    """Schema for individual error detail."""

    field: Optional[str] = Field(
        None,
        description="Field name that caused the error",
        examples=["buses -> 0 -> inertia"],
    )

    message: str = Field(
        ...,
        description="Human-readable error message",
        examples=["Input should be greater than or equal to 0"],
    )

    type: Optional[str] = Field(
        None,
        description="Error type identifier",
        examples=["greater_than_equal"],
    )

    input: Optional[Any] = Field(
        None,
        description="Input value that caused the error",
        examples=[-1.0],
    )


class ErrorBody(BaseModel):
    """Schema for the error body."""

    code: str = Field(..., description="Error code identifier", examples=["DISCONNECTED_GRID"])
    message: str = Field(..., description="Human-readable error message")
    timestamp: str = Field(..., description="Error timestamp in ISO format", examples=["2024-01-01T00:00:00Z"])
    run_id: Optional[str] = Field(None, description="Identifier of the command run", examples=["abc12345"])
    exit_code: int = Field(..., description="Process exit code", examples=[2])
    details: Optional[List[ErrorDetail]] = Field(None, description="Per-field validation details")


class ErrorResponse(BaseModel):
    """Wrapper so error payloads read {"error": {...}}."""

    error: ErrorBody
