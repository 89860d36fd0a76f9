"""
Pydantic schemas for grid input, reports and error payloads.
"""

# Grid input schemas
from .grid import BusSchema, GridDocument, LineSchema

# Report schemas
from .report import (
    CSV_COLUMNS,
    CurvePoint,
    MeasureReport,
    MeasureRow,
    PlacementDocument,
    ReportBase,
    SimulationSidecar,
    ValidationReport,
    VulnerabilityReport,
)

# Error schemas
from .error import ErrorBody, ErrorDetail, ErrorResponse

__all__ = [
    "BusSchema",
    "LineSchema",
    "GridDocument",
    "CSV_COLUMNS",
    "ReportBase",
    "MeasureRow",
    "MeasureReport",
    "ValidationReport",
    "PlacementDocument",
    "CurvePoint",
    "VulnerabilityReport",
    "SimulationSidecar",
    "ErrorDetail",
    "ErrorBody",
    "ErrorResponse",
]
